//! Edge and sub-graph weight estimation over a [`SbgSketch`].

use crate::error::Result;
use crate::query::{EdgeQuery, SubgraphQuery};
use crate::rank::{compare_priority, rank_at, Priority};
use crate::sketch::{SbgSketch, SketchLayer};
use crate::VertexId;

fn layer_estimate(layer: &SketchLayer, src: VertexId, dst: VertexId, stored: &[u8], label: usize) -> f64 {
    let (aggregates, ranks) = layer.run(layer.hash.bucket(src), layer.hash.bucket(dst));
    let mut estimate = f64::INFINITY;
    for (m, &rank) in ranks.iter().enumerate() {
        match compare_priority(rank_at(stored, label, m), rank) {
            Priority::Equal => estimate = estimate.min(aggregates[m]),
            // The edge would have claimed this cell: it was never inserted.
            Priority::Higher => return 0.0,
            Priority::Lower => {}
        }
    }
    if estimate.is_infinite() {
        0.0
    } else {
        estimate
    }
}

impl SbgSketch {
    /// Estimated aggregate weight of one labeled edge.
    ///
    /// Never below the true weight, and zero only for edges that were never
    /// inserted. Costs `O(L)` per layer.
    pub fn estimate_edge(&self, q: &EdgeQuery) -> Result<f64> {
        let label = q.label as usize;
        self.check_label(label)?;
        let stored = self.stored_ranks(q.src, q.dst, label);
        let mut best = f64::INFINITY;
        for layer in &self.layers {
            let est = layer_estimate(layer, q.src, q.dst, stored, label);
            if est == 0.0 {
                return Ok(0.0);
            }
            best = best.min(est);
        }
        Ok(best)
    }

    /// Minimum of the edge estimates of `q`, or zero if any of them is zero.
    pub fn estimate_subgraph(&self, q: &SubgraphQuery) -> Result<f64> {
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

    /// Estimate that consults only the home matrix of the queried label,
    /// ignoring every rented cell. This is what the sketch would answer
    /// without ranking.
    pub fn estimate_edge_home_only(&self, q: &EdgeQuery) -> Result<f64> {
        let label = q.label as usize;
        self.check_label(label)?;
        let mut best = f64::INFINITY;
        for (p, layer) in self.layers.iter().enumerate() {
            let cell = self.cell(p, label, layer.hash.bucket(q.src), layer.hash.bucket(q.dst));
            let est = if cell.rank == 0 { cell.aggregate } else { 0.0 };
            best = best.min(est);
        }
        Ok(best)
    }
}
