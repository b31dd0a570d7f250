//! Query types shared by the ranked sketch, the baseline and the oracle.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::VertexId;

/// Weight of a single labeled edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeQuery {
    pub src: VertexId,
    pub dst: VertexId,
    pub label: u16,
}

impl EdgeQuery {
    pub fn new(src: VertexId, dst: VertexId, label: u16) -> Self {
        Self { src, dst, label }
    }
}

impl fmt::Display for EdgeQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.src, self.dst, self.label)
    }
}

/// Minimum weight over a set of labeled edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphQuery {
    edges: Vec<EdgeQuery>,
}

impl SubgraphQuery {
    pub fn new(edges: Vec<EdgeQuery>) -> Result<Self> {
        if edges.is_empty() {
            return Err(SketchError::Query("sub-graph query needs at least one edge".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        if let Some(dup) = edges.iter().find(|e| !seen.insert(**e)) {
            return Err(SketchError::Query(format!("duplicate edge ({dup}) in sub-graph query")));
        }
        Ok(Self { edges })
    }

    pub fn edges(&self) -> &[EdgeQuery] {
        &self.edges
    }
}

/// Is `dst` reachable from `src` using only edges whose label is allowed?
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachabilityQuery {
    pub src: VertexId,
    pub dst: VertexId,
    labels: Vec<u16>,
}

impl ReachabilityQuery {
    pub fn new(src: VertexId, dst: VertexId, labels: impl IntoIterator<Item = u16>) -> Result<Self> {
        let mut labels: Vec<u16> = labels.into_iter().collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.is_empty() {
            return Err(SketchError::Query("reachability query needs at least one label".into()));
        }
        Ok(Self { src, dst, labels })
    }

    /// Allowed labels, sorted and deduplicated.
    pub fn labels(&self) -> &[u16] {
        &self.labels
    }
}

pub(crate) fn check_labels(labels: impl IntoIterator<Item = u16>, num_labels: usize) -> Result<()> {
    for l in labels {
        if l as usize >= num_labels {
            return Err(SketchError::LabelOutOfRange {
                label: l as usize,
                num_labels,
            });
        }
    }
    Ok(())
}

/// Common query surface of the summaries compared by the benchmark.
pub trait GraphSketch: Send + Sync {
    fn name(&self) -> &'static str;

    fn num_labels(&self) -> usize;

    fn estimate_edge(&self, q: &EdgeQuery) -> Result<f64>;

    /// Minimum over the edge estimates; zero as soon as any edge is zero.
    fn estimate_subgraph(&self, q: &SubgraphQuery) -> Result<f64> {
        let mut best = f64::INFINITY;
        for e in q.edges() {
            let est = self.estimate_edge(e)?;
            if est == 0.0 {
                return Ok(0.0);
            }
            best = best.min(est);
        }
        Ok(best)
    }

    fn estimate_reachable(&self, q: &ReachabilityQuery) -> Result<bool>;

    fn memory_footprint(&self) -> usize;
}
