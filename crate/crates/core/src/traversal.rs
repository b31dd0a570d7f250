//! Label-constrained reachability over the summarized topology.

use std::collections::VecDeque;

use crate::error::Result;
use crate::query::{check_labels, ReachabilityQuery};
use crate::sketch::SbgSketch;

/// Breadth-first search over hashed vertices `0..d`.
///
/// `has_edge(u, v)` decides whether hashed vertex `u` links to `v`.
pub(crate) fn bfs_reaches<F>(dimension: usize, from: usize, to: usize, has_edge: F) -> bool
where
    F: Fn(usize, usize) -> bool,
{
    if from == to {
        return true;
    }
    let mut visited = vec![false; dimension];
    let mut queue = VecDeque::with_capacity(dimension);
    visited[from] = true;
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        for v in 0..dimension {
            if !visited[v] && has_edge(u, v) {
                if v == to {
                    return true;
                }
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    false
}

impl SbgSketch {
    /// Estimated constrained reachability.
    ///
    /// A layer follows a hashed edge `u -> v` only if cell `(u, v)` holds
    /// rank zero in the matrix of some allowed label, i.e. an edge of that
    /// label was certainly written there. The layers' answers are ANDed.
    /// Never a false negative; false positives come from hash collisions.
    pub fn estimate_reachable(&self, q: &ReachabilityQuery) -> Result<bool> {
        check_labels(q.labels().iter().copied(), self.num_labels())?;
        if q.src == q.dst {
            return Ok(true);
        }
        let d = self.dimension;
        let labels: Vec<usize> = q.labels().iter().map(|&l| l as usize).collect();
        for layer in &self.layers {
            let from = layer.hash.bucket(q.src);
            let to = layer.hash.bucket(q.dst);
            let reached = bfs_reaches(d, from, to, |u, v| {
                let ranks = layer.run(u, v).1;
                labels.iter().any(|&l| ranks[l] == 0)
            });
            if !reached {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
