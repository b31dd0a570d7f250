//! The unranked baseline: one matrix per label, no renting.
//!
//! Cells hold plain aggregates laid out label-major, then row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::hash::{layer_vertex_hash, VertexHash};
use crate::par;
use crate::query::{check_labels, EdgeQuery, GraphSketch, ReachabilityQuery, SubgraphQuery};
use crate::sketch::{dimension_for_budget, AggregateMode, EdgeEvent, SbgSketch, AGGREGATE_BYTES};
use crate::traversal::bfs_reaches;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TcmConfig {
    pub num_labels: usize,
    pub num_layers: usize,
    pub memory_budget_bytes: usize,
    pub aggregate_mode: AggregateMode,
    pub seed: u64,
    pub dimension: Option<usize>,
}

impl TcmConfig {
    pub fn new(num_labels: usize, num_layers: usize, memory_budget_bytes: usize) -> Self {
        Self {
            num_labels,
            num_layers,
            memory_budget_bytes,
            aggregate_mode: AggregateMode::Unit,
            seed: 0,
            dimension: None,
        }
    }

    pub fn with_exact_dimension(num_labels: usize, num_layers: usize, dimension: usize) -> Self {
        let budget = num_layers * num_labels * dimension * dimension * AGGREGATE_BYTES;
        Self {
            dimension: Some(dimension),
            ..Self::new(num_labels, num_layers, budget)
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn mode(mut self, mode: AggregateMode) -> Self {
        self.aggregate_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<usize> {
        if self.num_labels == 0 || self.num_labels > u16::MAX as usize {
            return Err(SketchError::Config(format!("invalid number of labels {}", self.num_labels)));
        }
        if self.num_layers == 0 {
            return Err(SketchError::Config("number of layers must be positive".into()));
        }
        match self.dimension {
            Some(0) => Err(SketchError::Config("matrix dimension must be positive".into())),
            Some(d) => {
                let footprint = self.num_layers * self.num_labels * d * d * AGGREGATE_BYTES;
                if footprint > self.memory_budget_bytes {
                    return Err(SketchError::Config(format!(
                        "dimension {d} needs {footprint} bytes, budget is {}",
                        self.memory_budget_bytes
                    )));
                }
                Ok(d)
            }
            None => {
                let d = dimension_for_budget(self.memory_budget_bytes, self.num_layers, self.num_labels, AGGREGATE_BYTES);
                if d < 2 {
                    return Err(SketchError::BudgetTooSmall {
                        budget: self.memory_budget_bytes,
                        dimension: d,
                    });
                }
                Ok(d)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct TcmLayer {
    pub(crate) hash: VertexHash,
    pub(crate) cells: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TcmSketch {
    pub(crate) config: TcmConfig,
    pub(crate) dimension: usize,
    pub(crate) layers: Vec<TcmLayer>,
}

impl TcmSketch {
    pub fn new(config: TcmConfig) -> Result<Self> {
        let dimension = config.validate()?;
        let cells = config.num_labels * dimension * dimension;
        let layers = (0..config.num_layers)
            .map(|p| TcmLayer {
                hash: layer_vertex_hash(config.seed, p, dimension),
                cells: vec![0.0; cells],
            })
            .collect();
        Ok(Self { config, dimension, layers })
    }

    pub fn config(&self) -> &TcmConfig {
        &self.config
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn vertex_bucket(&self, layer: usize, v: u64) -> usize {
        self.layers[layer].hash.bucket(v)
    }

    #[inline]
    fn index(&self, label: usize, row: usize, col: usize) -> usize {
        (label * self.dimension + row) * self.dimension + col
    }

    pub fn cell(&self, layer: usize, label: usize, row: usize, col: usize) -> f64 {
        self.layers[layer].cells[self.index(label, row, col)]
    }

    fn check_label(&self, label: usize) -> Result<()> {
        if label >= self.config.num_labels {
            Err(SketchError::LabelOutOfRange { label, num_labels: self.config.num_labels })
        } else {
            Ok(())
        }
    }

    fn prepared(&self, event: &EdgeEvent) -> Result<(usize, f64)> {
        let label = event.label as usize;
        self.check_label(label)?;
        Ok((label, self.config.aggregate_mode.contribution(event)?))
    }

    pub fn insert(&mut self, event: &EdgeEvent) -> Result<()> {
        let (label, amount) = self.prepared(event)?;
        let d = self.dimension;
        for layer in &mut self.layers {
            let (r, c) = (layer.hash.bucket(event.src), layer.hash.bucket(event.dst));
            layer.cells[(label * d + r) * d + c] += amount;
        }
        Ok(())
    }

    fn apply(layer: &mut TcmLayer, d: usize, events: &[EdgeEvent], amounts: &[f64]) {
        for (e, &amount) in events.iter().zip(amounts) {
            let (r, c) = (layer.hash.bucket(e.src), layer.hash.bucket(e.dst));
            layer.cells[(e.label as usize * d + r) * d + c] += amount;
        }
    }

    fn amounts(&self, events: &[EdgeEvent]) -> Result<Vec<f64>> {
        events.iter().map(|e| self.prepared(e).map(|(_, a)| a)).collect()
    }

    pub fn insert_batch(&mut self, events: &[EdgeEvent]) -> Result<()> {
        let amounts = self.amounts(events)?;
        let d = self.dimension;
        par::for_each_mut(&mut self.layers, |layer| Self::apply(layer, d, events, &amounts));
        Ok(())
    }

    pub fn insert_batch_sequential(&mut self, events: &[EdgeEvent]) -> Result<()> {
        let amounts = self.amounts(events)?;
        let d = self.dimension;
        for layer in &mut self.layers {
            Self::apply(layer, d, events, &amounts);
        }
        Ok(())
    }

    /// Minimum over layers of the edge's cell in its label's matrix.
    pub fn estimate_edge(&self, q: &EdgeQuery) -> Result<f64> {
        let label = q.label as usize;
        self.check_label(label)?;
        Ok(self
            .layers
            .iter()
            .map(|layer| layer.cells[self.index(label, layer.hash.bucket(q.src), layer.hash.bucket(q.dst))])
            .fold(f64::INFINITY, f64::min))
    }

    pub fn estimate_subgraph(&self, q: &SubgraphQuery) -> Result<f64> {
        GraphSketch::estimate_subgraph(self, q)
    }

    /// Reachability over non-zero cells of the allowed labels' matrices,
    /// ANDed across layers.
    pub fn estimate_reachable(&self, q: &ReachabilityQuery) -> Result<bool> {
        check_labels(q.labels().iter().copied(), self.config.num_labels)?;
        if q.src == q.dst {
            return Ok(true);
        }
        let d = self.dimension;
        for layer in &self.layers {
            let reached = bfs_reaches(d, layer.hash.bucket(q.src), layer.hash.bucket(q.dst), |u, v| {
                q.labels().iter().any(|&l| layer.cells[(l as usize * d + u) * d + v] > 0.0)
            });
            if !reached {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `P * L * d^2 * 8` bytes.
    pub fn memory_footprint(&self) -> usize {
        self.layers.len() * self.config.num_labels * self.dimension * self.dimension * AGGREGATE_BYTES
    }
}

impl GraphSketch for TcmSketch {
    fn name(&self) -> &'static str {
        "tcm"
    }

    fn num_labels(&self) -> usize {
        self.config.num_labels
    }

    fn estimate_edge(&self, q: &EdgeQuery) -> Result<f64> {
        TcmSketch::estimate_edge(self, q)
    }

    fn estimate_reachable(&self, q: &ReachabilityQuery) -> Result<bool> {
        TcmSketch::estimate_reachable(self, q)
    }

    fn memory_footprint(&self) -> usize {
        TcmSketch::memory_footprint(self)
    }
}

impl GraphSketch for SbgSketch {
    fn name(&self) -> &'static str {
        "sbg"
    }

    fn num_labels(&self) -> usize {
        SbgSketch::num_labels(self)
    }

    fn estimate_edge(&self, q: &EdgeQuery) -> Result<f64> {
        SbgSketch::estimate_edge(self, q)
    }

    fn estimate_subgraph(&self, q: &SubgraphQuery) -> Result<f64> {
        SbgSketch::estimate_subgraph(self, q)
    }

    fn estimate_reachable(&self, q: &ReachabilityQuery) -> Result<bool> {
        SbgSketch::estimate_reachable(self, q)
    }

    fn memory_footprint(&self) -> usize {
        SbgSketch::memory_footprint(self)
    }
}
