//! The self-balanced ranked sketch: layout, configuration and insertion.
//!
//! Each of the `P` layers owns `L` matrices of `d x d` cells. The `L` cells
//! that share a `(row, col)` position are stored next to each other, so an
//! insertion touches one contiguous run of `L` ranks and `L` aggregates.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::hash::{layer_vertex_hash, seeded_stream, EdgeHash, VertexHash, STREAM_EDGE_HASH, STREAM_RANKS};
use crate::par;
use crate::rank::{
    factorial_saturating, RankTable, RankVector, MAX_LABELS,
    UNOCCUPIED,
};
use crate::VertexId;

/// Bytes per aggregate (64-bit float).
pub const AGGREGATE_BYTES: usize = 8;
/// Bytes per ranked cell: aggregate plus one rank byte.
pub const CELL_BYTES: usize = AGGREGATE_BYTES + 1;

/// One streamed labeled, weighted edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEvent {
    pub src: VertexId,
    pub dst: VertexId,
    pub label: u16,
    pub weight: f64,
}

impl EdgeEvent {
    pub fn new(src: VertexId, dst: VertexId, label: u16, weight: f64) -> Self {
        Self { src, dst, label, weight }
    }

    /// An arrival counted with weight one.
    pub fn unit(src: VertexId, dst: VertexId, label: u16) -> Self {
        Self::new(src, dst, label, 1.0)
    }
}

/// How a cell aggregates the edges written to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateMode {
    /// Every arrival counts one, whatever its weight.
    Unit,
    /// Arrivals add their weight.
    Weighted,
}

impl AggregateMode {
    pub(crate) fn as_byte(self) -> u8 {
        match self {
            AggregateMode::Unit => 0,
            AggregateMode::Weighted => 1,
        }
    }

    pub(crate) fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(AggregateMode::Unit),
            1 => Some(AggregateMode::Weighted),
            _ => None,
        }
    }

    /// Contribution of an already validated event.
    #[inline]
    pub(crate) fn amount(self, event: &EdgeEvent) -> f64 {
        match self {
            AggregateMode::Unit => 1.0,
            AggregateMode::Weighted => event.weight,
        }
    }

    /// The amount an event contributes to a cell.
    pub(crate) fn contribution(self, event: &EdgeEvent) -> Result<f64> {
        match self {
            AggregateMode::Unit => Ok(1.0),
            AggregateMode::Weighted => {
                if event.weight.is_finite() && event.weight >= 0.0 {
                    Ok(event.weight)
                } else {
                    Err(SketchError::InvalidWeight(event.weight))
                }
            }
        }
    }
}

/// Default number of stored rank vectors: `min((L-1)!, 64)`.
pub fn default_rank_vectors(num_labels: usize) -> usize {
    factorial_saturating(num_labels.saturating_sub(1)).min(64) as usize
}

/// Matrix dimension for a budget: `floor(sqrt(budget / (P * L * cell_bytes)))`.
pub fn dimension_for_budget(budget: usize, num_layers: usize, num_labels: usize, cell_bytes: usize) -> usize {
    let per_matrix = budget / (num_layers * num_labels * cell_bytes);
    per_matrix.isqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    pub num_labels: usize,
    pub num_layers: usize,
    pub memory_budget_bytes: usize,
    pub num_rank_vectors: usize,
    pub aggregate_mode: AggregateMode,
    pub first_arrival_optimization: bool,
    pub seed: u64,
    /// Fixes the matrix dimension instead of deriving it from the budget.
    /// The footprint must still fit the budget.
    pub dimension: Option<usize>,
}

impl SketchConfig {
    /// Unit-count configuration with the first-arrival optimization on.
    pub fn new(num_labels: usize, num_layers: usize, memory_budget_bytes: usize) -> Self {
        Self {
            num_labels,
            num_layers,
            memory_budget_bytes,
            num_rank_vectors: default_rank_vectors(num_labels),
            aggregate_mode: AggregateMode::Unit,
            first_arrival_optimization: true,
            seed: 0,
            dimension: None,
        }
    }

    /// Smallest configuration holding exactly `dimension x dimension` matrices.
    pub fn with_exact_dimension(num_labels: usize, num_layers: usize, dimension: usize) -> Self {
        let budget = num_layers * num_labels * dimension * dimension * CELL_BYTES;
        Self {
            dimension: Some(dimension),
            ..Self::new(num_labels, num_layers, budget)
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn rank_vectors(mut self, count: usize) -> Self {
        self.num_rank_vectors = count;
        self
    }

    /// Switches the aggregate mode. Weighted mode turns the first-arrival
    /// optimization off, since it is only sound for unit counts.
    pub fn mode(mut self, mode: AggregateMode) -> Self {
        self.aggregate_mode = mode;
        if mode == AggregateMode::Weighted {
            self.first_arrival_optimization = false;
        }
        self
    }

    pub fn first_arrival(mut self, enabled: bool) -> Self {
        self.first_arrival_optimization = enabled;
        self
    }

    /// Checks the configuration and returns the matrix dimension.
    pub fn validate(&self) -> Result<usize> {
        if self.num_labels == 0 || self.num_labels > MAX_LABELS {
            return Err(SketchError::Config(format!(
                "number of labels must be in 1..={MAX_LABELS}, got {}",
                self.num_labels
            )));
        }
        if self.num_layers == 0 {
            return Err(SketchError::Config("number of layers must be positive".into()));
        }
        RankTable::validate(self.num_labels, self.num_rank_vectors)?;
        if self.first_arrival_optimization && self.aggregate_mode != AggregateMode::Unit {
            return Err(SketchError::Config(
                "first-arrival optimization requires unit-count mode".into(),
            ));
        }
        let d = match self.dimension {
            Some(d) => {
                if d == 0 {
                    return Err(SketchError::Config("matrix dimension must be positive".into()));
                }
                let footprint = self.num_layers * self.num_labels * d * d * CELL_BYTES;
                if footprint > self.memory_budget_bytes {
                    return Err(SketchError::Config(format!(
                        "dimension {d} needs {footprint} bytes, budget is {}",
                        self.memory_budget_bytes
                    )));
                }
                d
            }
            None => {
                let d = dimension_for_budget(
                    self.memory_budget_bytes,
                    self.num_layers,
                    self.num_labels,
                    CELL_BYTES,
                );
                if d < 2 {
                    return Err(SketchError::BudgetTooSmall {
                        budget: self.memory_budget_bytes,
                        dimension: d,
                    });
                }
                d
            }
        };
        Ok(d)
    }
}

/// A cell as seen from outside the sketch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub rank: u8,
    pub aggregate: f64,
}

impl Cell {
    pub const EMPTY: Cell = Cell { rank: UNOCCUPIED, aggregate: 0.0 };

    pub fn is_occupied(&self) -> bool {
        self.rank != UNOCCUPIED
    }
}

/// One hash layer: a vertex hash and `L` interleaved `d x d` matrices.
#[derive(Clone, Debug)]
pub struct SketchLayer {
    pub(crate) hash: VertexHash,
    num_labels: usize,
    ranks: Vec<u8>,
    aggregates: Vec<f64>,
}

impl SketchLayer {
    fn new(hash: VertexHash, num_labels: usize) -> Self {
        let cells = hash.buckets() * hash.buckets() * num_labels;
        Self {
            hash,
            num_labels,
            ranks: vec![UNOCCUPIED; cells],
            aggregates: vec![0.0; cells],
        }
    }

    pub fn hash(&self) -> &VertexHash {
        &self.hash
    }

    #[inline(always)]
    fn base(&self, row: usize, col: usize) -> usize {
        (row * self.hash.buckets() + col) * self.num_labels
    }

    /// Aggregates and ranks of the run of `L` cells at `(row, col)`.
    #[inline(always)]
    pub(crate) fn run(&self, row: usize, col: usize) -> (&[f64], &[u8]) {
        let base = self.base(row, col);
        let n = self.num_labels;
        (&self.aggregates[base..base + n], &self.ranks[base..base + n])
    }

    fn get(&self, row: usize, col: usize, label: usize) -> Cell {
        let i = self.base(row, col) + label;
        Cell {
            rank: self.ranks[i],
            aggregate: self.aggregates[i],
        }
    }

    fn set(&mut self, row: usize, col: usize, label: usize, cell: Cell) {
        let i = self.base(row, col) + label;
        self.ranks[i] = cell.rank;
        self.aggregates[i] = cell.aggregate;
    }

    /// Applies one edge with full rank vector `ranks_of_edge` to its cell run.
    #[inline(always)]
    fn insert(&mut self, src: VertexId, dst: VertexId, ranks_of_edge: &[u8], label: usize, amount: f64, first_arrival: bool) {
        let n = ranks_of_edge.len();
        let base = self.base(self.hash.bucket(src), self.hash.bucket(dst));
        let ranks = &mut self.ranks[base..base + n];
        let aggregates = &mut self.aggregates[base..base + n];
        // A home cell without rank zero proves this edge is new to the layer,
        // so only evictions apply.
        let evictions_only = first_arrival && ranks[label] != 0;
        let adds = !evictions_only;
        for ((rank, aggregate), &edge_rank) in ranks.iter_mut().zip(aggregates.iter_mut()).zip(ranks_of_edge) {
            update_cell(rank, aggregate, edge_rank, adds, amount);
        }
    }

    /// [`insert`](Self::insert) for a compile-time number of labels, which
    /// lets the cell loop unroll.
    #[inline(always)]
    fn insert_fixed<const N: usize>(&mut self, src: VertexId, dst: VertexId, ranks_of_edge: &[u8], label: usize, amount: f64, first_arrival: bool) {
        let base = self.base(self.hash.bucket(src), self.hash.bucket(dst));
        let ranks: &mut [u8; N] = (&mut self.ranks[base..base + N]).try_into().unwrap();
        let aggregates: &mut [f64; N] = (&mut self.aggregates[base..base + N]).try_into().unwrap();
        let ranks_of_edge: &[u8; N] = ranks_of_edge.try_into().unwrap();
        let evictions_only = first_arrival && ranks[label] != 0;
        // Masks first, so the aggregate blend is one straight-line pass.
        let adds = (evictions_only as u64).wrapping_sub(1);
        let mut keep = [0u64; N];
        let mut take = [0u64; N];
        for m in 0..N {
            let (edge_rank, cell_rank) = (ranks_of_edge[m], ranks[m]);
            let higher = 0u64.wrapping_sub((edge_rank < cell_rank) as u64);
            keep[m] = !higher;
            take[m] = higher | (0u64.wrapping_sub((edge_rank == cell_rank) as u64) & adds);
            ranks[m] = edge_rank.min(cell_rank);
        }
        let amount_bits = amount.to_bits();
        for m in 0..N {
            aggregates[m] = f64::from_bits(aggregates[m].to_bits() & keep[m]) + f64::from_bits(amount_bits & take[m]);
        }
    }
}

/// compare_priority outcome applied to one cell: Higher replaces, Equal adds
/// (unless only evictions apply), Lower keeps. Outcomes are data dependent,
/// so the aggregate is blended arithmetically instead of branching.
/// Aggregates are finite, so multiplying by zero clears them exactly.
#[inline(always)]
fn update_cell(rank: &mut u8, aggregate: &mut f64, edge_rank: u8, adds: bool, amount: f64) {
    let cell_rank = *rank;
    let higher = edge_rank < cell_rank;
    let keep = (!higher) as u8 as f64;
    let take = (higher | (edge_rank == cell_rank && adds)) as u8 as f64;
    *aggregate = *aggregate * keep + amount * take;
    *rank = edge_rank.min(cell_rank);
}

/// The self-balanced graph sketch.
#[derive(Clone, Debug)]
pub struct SbgSketch {
    pub(crate) config: SketchConfig,
    pub(crate) dimension: usize,
    pub(crate) layers: Vec<SketchLayer>,
    pub(crate) rank_table: RankTable,
    pub(crate) edge_hash: EdgeHash,
}

impl SbgSketch {
    pub fn new(config: SketchConfig) -> Result<Self> {
        let dimension = config.validate()?;
        let mut rank_rng = seeded_stream(config.seed, STREAM_RANKS);
        let rank_table = RankTable::generate(config.num_labels, config.num_rank_vectors, &mut rank_rng)?;
        let mut edge_rng = seeded_stream(config.seed, STREAM_EDGE_HASH);
        let edge_hash = EdgeHash::random(&mut edge_rng, rank_table.len());
        let layers = (0..config.num_layers)
            .map(|p| SketchLayer::new(layer_vertex_hash(config.seed, p, dimension), config.num_labels))
            .collect();
        Ok(Self {
            config,
            dimension,
            layers,
            rank_table,
            edge_hash,
        })
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn num_labels(&self) -> usize {
        self.config.num_labels
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[SketchLayer] {
        &self.layers
    }

    pub fn rank_table(&self) -> &RankTable {
        &self.rank_table
    }

    pub(crate) fn check_label(&self, label: usize) -> Result<()> {
        if label >= self.config.num_labels {
            Err(SketchError::LabelOutOfRange {
                label,
                num_labels: self.config.num_labels,
            })
        } else {
            Ok(())
        }
    }

    /// The stored permutation (without the injected zero) selected for an edge.
    #[inline]
    pub(crate) fn stored_ranks(&self, src: VertexId, dst: VertexId, label: usize) -> &[u8] {
        self.rank_table.stored(self.edge_hash.index(src, dst, label))
    }

    /// The rank vector assigned to `(src, dst, label)`.
    pub fn rank_vector(&self, src: VertexId, dst: VertexId, label: usize) -> Result<RankVector> {
        self.check_label(label)?;
        Ok(RankVector::with_zero_at(self.stored_ranks(src, dst, label), label))
    }

    /// Row/column index of `v` in layer `layer`.
    pub fn vertex_bucket(&self, layer: usize, v: VertexId) -> usize {
        self.layers[layer].hash.bucket(v)
    }

    /// Cell `(row, col)` of matrix `label` in layer `layer`.
    pub fn cell(&self, layer: usize, label: usize, row: usize, col: usize) -> Cell {
        self.layers[layer].get(row, col, label)
    }

    /// Overwrites one cell. Only for reconstructing documented sketch states.
    #[doc(hidden)]
    pub fn set_cell(&mut self, layer: usize, label: usize, row: usize, col: usize, cell: Cell) {
        self.layers[layer].set(row, col, label, cell);
    }

    /// Validates an event and returns its rank-table index.
    fn prepare(&self, event: &EdgeEvent) -> Result<u32> {
        let label = event.label as usize;
        self.check_label(label)?;
        self.config.aggregate_mode.contribution(event)?;
        Ok(self.edge_hash.index(event.src, event.dst, label) as u32)
    }

    /// Inserts one edge into every layer.
    pub fn insert(&mut self, event: &EdgeEvent) -> Result<()> {
        let rank_index = self.prepare(event)?;
        let mode = self.config.aggregate_mode;
        let first = self.config.first_arrival_optimization;
        let label = event.label as usize;
        let mut buf = [0u8; 256];
        let ranks = self.rank_table.full(rank_index as usize, label, &mut buf);
        for layer in &mut self.layers {
            layer.insert(event.src, event.dst, ranks, label, mode.amount(event), first);
        }
        Ok(())
    }

    /// Per-event rank lookup keys: offsets into the expanded table when it
    /// exists, table indices otherwise.
    fn prepare_all(&self, events: &[EdgeEvent]) -> Result<Vec<u32>> {
        let table = &self.rank_table;
        if table.is_expanded() {
            events
                .iter()
                .map(|e| Ok(table.expanded_offset(self.prepare(e)? as usize, e.label as usize) as u32))
                .collect()
        } else {
            events.iter().map(|e| self.prepare(e)).collect()
        }
    }

    fn apply(layer: &mut SketchLayer, events: &[EdgeEvent], prepared: &[u32], table: &RankTable, mode: AggregateMode, first: bool) {
        if table.is_expanded() {
            macro_rules! fixed {
                ($($n:literal)*) => {
                    match layer.num_labels {
                        $($n => {
                            for (e, &offset) in events.iter().zip(prepared) {
                                let ranks = table.expanded_at(offset as usize);
                                layer.insert_fixed::<$n>(e.src, e.dst, ranks, e.label as usize, mode.amount(e), first);
                            }
                        })*
                        _ => {
                            for (e, &offset) in events.iter().zip(prepared) {
                                let ranks = table.expanded_at(offset as usize);
                                layer.insert(e.src, e.dst, ranks, e.label as usize, mode.amount(e), first);
                            }
                        }
                    }
                };
            }
            fixed!(1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16);
        } else {
            let mut buf = [0u8; 256];
            for (e, &rank_index) in events.iter().zip(prepared) {
                let label = e.label as usize;
                let ranks = table.full(rank_index as usize, label, &mut buf);
                layer.insert(e.src, e.dst, ranks, label, mode.amount(e), first);
            }
        }
    }

    /// Inserts a batch, replaying it into the layers concurrently when the
    /// `parallel` feature is on. Either every event is valid and all are
    /// inserted, or none is.
    pub fn insert_batch(&mut self, events: &[EdgeEvent]) -> Result<()> {
        let prepared = self.prepare_all(events)?;
        let (mode, first) = (self.config.aggregate_mode, self.config.first_arrival_optimization);
        let table = &self.rank_table;
        par::for_each_mut(&mut self.layers, |layer| Self::apply(layer, events, &prepared, table, mode, first));
        Ok(())
    }

    /// Same result as [`insert_batch`](Self::insert_batch), always on the calling thread.
    pub fn insert_batch_sequential(&mut self, events: &[EdgeEvent]) -> Result<()> {
        let prepared = self.prepare_all(events)?;
        let (mode, first) = (self.config.aggregate_mode, self.config.first_arrival_optimization);
        for layer in &mut self.layers {
            Self::apply(layer, events, &prepared, &self.rank_table, mode, first);
        }
        Ok(())
    }

    /// Accounted cell storage: `P * L * d^2 * 9` bytes.
    pub fn memory_footprint(&self) -> usize {
        self.layers.len() * self.config.num_labels * self.dimension * self.dimension * CELL_BYTES
    }

    /// Cell-for-cell equality with another sketch.
    pub fn same_cells(&self, other: &SbgSketch) -> bool {
        self.dimension == other.dimension
            && self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.ranks == b.ranks
                    && a.aggregates.iter().map(|x| x.to_bits()).eq(b.aggregates.iter().map(|x| x.to_bits()))
            })
    }
}
