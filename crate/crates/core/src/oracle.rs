//! Exact ground truth for desk-scale verification.

use std::collections::VecDeque;

use indexmap::{IndexMap, IndexSet};

use crate::error::{Result, SketchError};
use crate::query::{EdgeQuery, ReachabilityQuery, SubgraphQuery};
use crate::sketch::{AggregateMode, EdgeEvent};
use crate::VertexId;

pub const DEFAULT_EVENT_CAP: usize = 10_000_000;

/// Exact per-edge aggregates plus per-label adjacency.
///
/// Iteration order is insertion order, so everything derived from an
/// `ExactGraph` is a deterministic function of the stream.
#[derive(Clone, Debug)]
pub struct ExactGraph {
    mode: AggregateMode,
    weights: IndexMap<EdgeQuery, f64>,
    /// `adjacency[label][src]` = destinations with positive weight.
    adjacency: Vec<IndexMap<VertexId, IndexSet<VertexId>>>,
    events: usize,
    event_cap: usize,
}

impl ExactGraph {
    pub fn new(num_labels: usize, mode: AggregateMode) -> Self {
        Self::with_event_cap(num_labels, mode, DEFAULT_EVENT_CAP)
    }

    pub fn with_event_cap(num_labels: usize, mode: AggregateMode, event_cap: usize) -> Self {
        Self {
            mode,
            weights: IndexMap::new(),
            adjacency: vec![IndexMap::new(); num_labels],
            events: 0,
            event_cap,
        }
    }

    pub fn num_labels(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_events(&self) -> usize {
        self.events
    }

    pub fn insert(&mut self, event: &EdgeEvent) -> Result<()> {
        if self.events >= self.event_cap {
            return Err(SketchError::EventCapExceeded { cap: self.event_cap });
        }
        let label = event.label as usize;
        if label >= self.adjacency.len() {
            return Err(SketchError::LabelOutOfRange {
                label,
                num_labels: self.adjacency.len(),
            });
        }
        let amount = self.mode.contribution(event)?;
        let key = EdgeQuery::new(event.src, event.dst, event.label);
        let total = self.weights.entry(key).or_insert(0.0);
        *total += amount;
        if *total > 0.0 {
            self.adjacency[label].entry(event.src).or_default().insert(event.dst);
        }
        self.events += 1;
        Ok(())
    }

    pub fn insert_all<'a>(&mut self, events: impl IntoIterator<Item = &'a EdgeEvent>) -> Result<()> {
        events.into_iter().try_for_each(|e| self.insert(e))
    }

    pub fn edge_weight(&self, q: &EdgeQuery) -> f64 {
        self.weights.get(q).copied().unwrap_or(0.0)
    }

    /// Minimum exact weight over the query's edges; zero if any is absent.
    pub fn subgraph_weight(&self, q: &SubgraphQuery) -> f64 {
        q.edges()
            .iter()
            .map(|e| self.edge_weight(e))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn reachable(&self, q: &ReachabilityQuery) -> bool {
        if q.src == q.dst {
            return true;
        }
        let labels: Vec<&IndexMap<VertexId, IndexSet<VertexId>>> = q
            .labels()
            .iter()
            .filter_map(|&l| self.adjacency.get(l as usize))
            .collect();
        let mut visited = IndexSet::new();
        let mut queue = VecDeque::new();
        visited.insert(q.src);
        queue.push_back(q.src);
        while let Some(u) = queue.pop_front() {
            for adj in &labels {
                for &v in adj.get(&u).into_iter().flatten() {
                    if v == q.dst {
                        return true;
                    }
                    if visited.insert(v) {
                        queue.push_back(v);
                    }
                }
            }
        }
        false
    }

    /// Distinct edges seen, in first-arrival order, with their exact weights.
    pub fn edges(&self) -> impl Iterator<Item = (&EdgeQuery, f64)> + '_ {
        self.weights.iter().map(|(k, &w)| (k, w))
    }

    pub fn num_distinct_edges(&self) -> usize {
        self.weights.len()
    }

    /// Distinct edges that have positive weight.
    pub fn positive_edges(&self) -> Vec<EdgeQuery> {
        self.weights.iter().filter(|(_, &w)| w > 0.0).map(|(k, _)| *k).collect()
    }

    /// Vertices that appear as an endpoint, in first-seen order.
    pub fn vertices(&self) -> Vec<VertexId> {
        let mut seen = IndexSet::new();
        for q in self.weights.keys() {
            seen.insert(q.src);
            seen.insert(q.dst);
        }
        seen.into_iter().collect()
    }

    pub fn out_neighbors(&self, label: u16, src: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency
            .get(label as usize)
            .and_then(|adj| adj.get(&src))
            .into_iter()
            .flatten()
            .copied()
    }
}
