//! Synthetic skewed streams and query workloads drawn from an exact graph.

use indexmap::{IndexMap, IndexSet};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{weighted::WeightedIndex, Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::hash::seeded_stream;
use crate::oracle::ExactGraph;
use crate::query::{EdgeQuery, ReachabilityQuery, SubgraphQuery};
use crate::sketch::{AggregateMode, EdgeEvent};
use crate::VertexId;

const STREAM_EVENTS: u64 = 1 << 40;
const STREAM_EDGE_QUERIES: u64 = (1 << 40) + 1;
const STREAM_SUBGRAPH_QUERIES: u64 = (1 << 40) + 2;
const STREAM_REACH_QUERIES: u64 = (1 << 40) + 3;

/// Relative label frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelWeights {
    /// One positive weight per label, e.g. `[100, 1]`.
    Explicit(Vec<f64>),
    /// Label `i` has weight `1 / (i + 1)^s`.
    Zipf(f64),
}

impl LabelWeights {
    pub fn resolve(&self, num_labels: usize) -> Result<Vec<f64>> {
        let weights = match self {
            Self::Explicit(w) => {
                if w.len() != num_labels {
                    return Err(SketchError::Config(format!(
                        "{} label weights for {num_labels} labels",
                        w.len()
                    )));
                }
                w.clone()
            }
            Self::Zipf(s) => {
                if !s.is_finite() || *s < 0.0 {
                    return Err(SketchError::Config(format!("invalid Zipf exponent {s}")));
                }
                (0..num_labels).map(|i| ((i + 1) as f64).powf(-s)).collect()
            }
        };
        if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(SketchError::Config("label weights must be positive".into()));
        }
        Ok(weights)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewedStreamSpec {
    pub num_vertices: u64,
    pub num_labels: usize,
    pub label_weights: LabelWeights,
    pub num_events: usize,
    pub mode: AggregateMode,
    /// Zipf exponent for endpoint popularity; 0 draws endpoints uniformly.
    pub vertex_skew: f64,
    /// When set, every label draws its events from a fixed pool of distinct
    /// edges, sized in proportion to the label weight, so edges repeat.
    /// Otherwise every event draws fresh endpoints.
    pub distinct_edges: Option<usize>,
    /// Zipf exponent for edge popularity inside a pool; 0 is uniform.
    pub edge_skew: f64,
    pub seed: u64,
}

impl SkewedStreamSpec {
    pub fn new(num_vertices: u64, num_labels: usize, label_weights: LabelWeights, num_events: usize) -> Self {
        Self {
            num_vertices,
            num_labels,
            label_weights,
            num_events,
            mode: AggregateMode::Unit,
            vertex_skew: 0.0,
            distinct_edges: None,
            edge_skew: 0.0,
            seed: 0,
        }
    }

    /// The default benchmark workload: 10^5 uniformly drawn vertices and a
    /// pool of `num_events / 5` distinct edges replayed with Zipf(1)
    /// popularity.
    pub fn repeated_edges(num_labels: usize, label_weights: LabelWeights, num_events: usize) -> Self {
        Self::new(100_000, num_labels, label_weights, num_events).edge_pool((num_events / 5).max(1), 1.0)
    }

    /// Repeated-edge workload: `distinct` pooled edges replayed with
    /// popularity exponent `skew`.
    pub fn edge_pool(mut self, distinct: usize, skew: f64) -> Self {
        self.distinct_edges = Some(distinct);
        self.edge_skew = skew;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn mode(mut self, mode: AggregateMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn vertex_skew(mut self, s: f64) -> Self {
        self.vertex_skew = s;
        self
    }
}

/// Fraction of events carried by the most frequent `ceil(share * L)` labels.
pub fn top_label_share(events: &[EdgeEvent], num_labels: usize, share: f64) -> f64 {
    if events.is_empty() || num_labels == 0 {
        return 0.0;
    }
    let mut counts = vec![0usize; num_labels];
    for e in events {
        if let Some(c) = counts.get_mut(e.label as usize) {
            *c += 1;
        }
    }
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let top = ((share * num_labels as f64).ceil() as usize).clamp(1, num_labels);
    counts[..top].iter().sum::<usize>() as f64 / events.len() as f64
}

pub fn gen_skewed_stream(spec: &SkewedStreamSpec) -> Result<Vec<EdgeEvent>> {
    if spec.num_labels == 0 || spec.num_labels > u16::MAX as usize {
        return Err(SketchError::Config(format!("invalid label count {}", spec.num_labels)));
    }
    if spec.num_vertices == 0 {
        return Err(SketchError::Config("stream needs at least one vertex".into()));
    }
    let weights = spec.label_weights.resolve(spec.num_labels)?;
    let labels = WeightedIndex::new(&weights).map_err(|e| SketchError::Config(e.to_string()))?;
    let vertices = Zipf::new(spec.num_vertices as f64, spec.vertex_skew)
        .map_err(|e| SketchError::Config(format!("vertex skew: {e}")))?;
    let mut rng = seeded_stream(spec.seed, STREAM_EVENTS);
    let endpoints = |rng: &mut _| {
        let src = vertices.sample(rng) as VertexId - 1;
        let dst = vertices.sample(rng) as VertexId - 1;
        (src, dst)
    };

    let pools = match spec.distinct_edges {
        None => None,
        Some(distinct) => {
            let total: f64 = weights.iter().sum();
            let capacity = spec.num_vertices.saturating_mul(spec.num_vertices);
            let mut pools = Vec::with_capacity(spec.num_labels);
            for w in &weights {
                let size = ((distinct as f64 * w / total).round() as u64).clamp(1, capacity) as usize;
                let mut pool = IndexSet::with_capacity(size);
                while pool.len() < size {
                    pool.insert(endpoints(&mut rng));
                }
                let popularity = Zipf::new(size as f64, spec.edge_skew)
                    .map_err(|e| SketchError::Config(format!("edge skew: {e}")))?;
                pools.push((pool, popularity));
            }
            Some(pools)
        }
    };

    let events = (0..spec.num_events)
        .map(|_| {
            let label = labels.sample(&mut rng);
            let (src, dst) = match &pools {
                None => endpoints(&mut rng),
                Some(pools) => {
                    let (pool, popularity) = &pools[label];
                    pool[popularity.sample(&mut rng) as usize - 1]
                }
            };
            let weight = match spec.mode {
                AggregateMode::Unit => 1.0,
                AggregateMode::Weighted => rng.random_range(1..=10) as f64,
            };
            EdgeEvent::new(src, dst, label as u16, weight)
        })
        .collect();
    Ok(events)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeSampling {
    /// Uniform over distinct observed triples.
    #[default]
    Uniform,
    /// Proportional to each triple's exact aggregate.
    FrequencyWeighted,
}

/// Edge queries with positive exact answers, sampled with replacement.
pub fn gen_edge_queries(oracle: &ExactGraph, n: usize, seed: u64, sampling: EdgeSampling) -> Vec<EdgeQuery> {
    let edges = oracle.positive_edges();
    if n == 0 || edges.is_empty() {
        return Vec::new();
    }
    let mut rng = seeded_stream(seed, STREAM_EDGE_QUERIES);
    match sampling {
        EdgeSampling::Uniform => (0..n).map(|_| *edges.choose(&mut rng).unwrap()).collect(),
        EdgeSampling::FrequencyWeighted => {
            let dist = WeightedIndex::new(edges.iter().map(|e| oracle.edge_weight(e))).expect("positive weights");
            (0..n).map(|_| edges[dist.sample(&mut rng)]).collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgraphShape {
    /// Three edges closing a cycle over three distinct vertices, any
    /// orientation.
    Triangle,
    /// Directed path with the given number of edges.
    Path(usize),
    /// Connected edge set of the given size, grown from a random edge.
    Connected(usize),
}

impl SubgraphShape {
    pub fn default_mix() -> Vec<Self> {
        vec![Self::Triangle, Self::Path(2), Self::Path(3), Self::Path(4), Self::Connected(4)]
    }
}

struct Incidence {
    edges: Vec<EdgeQuery>,
    /// Edge indices leaving each vertex.
    out: IndexMap<VertexId, Vec<usize>>,
    /// Edge indices touching each vertex in either direction.
    touching: IndexMap<VertexId, Vec<usize>>,
}

impl Incidence {
    fn new(oracle: &ExactGraph) -> Self {
        let edges = oracle.positive_edges();
        let mut out: IndexMap<VertexId, Vec<usize>> = IndexMap::new();
        let mut touching: IndexMap<VertexId, Vec<usize>> = IndexMap::new();
        for (i, e) in edges.iter().enumerate() {
            out.entry(e.src).or_default().push(i);
            touching.entry(e.src).or_default().push(i);
            if e.dst != e.src {
                touching.entry(e.dst).or_default().push(i);
            }
        }
        Self { edges, out, touching }
    }

    fn other_end(&self, edge: usize, v: VertexId) -> VertexId {
        let e = &self.edges[edge];
        if e.src == v {
            e.dst
        } else {
            e.src
        }
    }

    fn path<R: Rng>(&self, len: usize, rng: &mut R) -> Option<Vec<usize>> {
        let mut chosen = vec![rng.random_range(0..self.edges.len())];
        while chosen.len() < len {
            let end = self.edges[*chosen.last().unwrap()].dst;
            let next: Vec<usize> = self
                .out
                .get(&end)
                .into_iter()
                .flatten()
                .copied()
                .filter(|i| !chosen.contains(i))
                .collect();
            chosen.push(*next.choose(rng)?);
        }
        Some(chosen)
    }

    fn triangle<R: Rng>(&self, rng: &mut R) -> Option<Vec<usize>> {
        let first = rng.random_range(0..self.edges.len());
        let (a, b) = (self.edges[first].src, self.edges[first].dst);
        if a == b {
            return None;
        }
        let mut closers = Vec::new();
        for &bc in &self.touching[&b] {
            let c = self.other_end(bc, b);
            if c == a || c == b {
                continue;
            }
            for &ca in &self.touching[&c] {
                if self.other_end(ca, c) == a && ca != bc {
                    closers.push((bc, ca));
                }
            }
        }
        let &(bc, ca) = closers.choose(rng)?;
        Some(vec![first, bc, ca])
    }

    fn connected<R: Rng>(&self, size: usize, rng: &mut R) -> Option<Vec<usize>> {
        let first = rng.random_range(0..self.edges.len());
        let mut chosen: IndexSet<usize> = IndexSet::from([first]);
        let mut vertices: IndexSet<VertexId> = IndexSet::from([self.edges[first].src, self.edges[first].dst]);
        while chosen.len() < size {
            let frontier: Vec<usize> = vertices
                .iter()
                .flat_map(|v| self.touching[v].iter().copied())
                .filter(|i| !chosen.contains(i))
                .collect::<IndexSet<_>>()
                .into_iter()
                .collect();
            let &next = frontier.choose(rng)?;
            chosen.insert(next);
            vertices.insert(self.edges[next].src);
            vertices.insert(self.edges[next].dst);
        }
        Some(chosen.into_iter().collect())
    }
}

/// Sub-graph queries whose edges all exist in `oracle`. Shapes are tried
/// round-robin, so a shape the graph lacks does not block the others; fewer
/// than `n` queries are returned when the graph does not contain enough
/// instances.
pub fn gen_subgraph_queries(oracle: &ExactGraph, n: usize, seed: u64, shapes: &[SubgraphShape]) -> Vec<SubgraphQuery> {
    let index = Incidence::new(oracle);
    if n == 0 || shapes.is_empty() || index.edges.is_empty() {
        return Vec::new();
    }
    let mut rng = seeded_stream(seed, STREAM_SUBGRAPH_QUERIES);
    let mut out = Vec::with_capacity(n);
    let max_attempts = 100 * n;
    let mut attempts = 0;
    while out.len() < n && attempts < max_attempts {
        let shape = shapes[attempts % shapes.len()];
        attempts += 1;
        let picked = match shape {
            SubgraphShape::Triangle => index.triangle(&mut rng),
            SubgraphShape::Path(len) => index.path(len.max(1), &mut rng),
            SubgraphShape::Connected(size) => index.connected(size.max(1), &mut rng),
        };
        if let Some(edges) = picked {
            let q = SubgraphQuery::new(edges.into_iter().map(|i| index.edges[i]).collect())
                .expect("distinct edge indices give distinct edges");
            out.push(q);
        }
    }
    out
}

/// Reachability queries the exact graph answers `false`, each allowing
/// between 1 and `ceil(L / 2)` labels.
pub fn gen_unreachable_queries(oracle: &ExactGraph, n: usize, seed: u64) -> Vec<ReachabilityQuery> {
    let vertices = oracle.vertices();
    let num_labels = oracle.num_labels();
    if n == 0 || vertices.len() < 2 || num_labels == 0 {
        return Vec::new();
    }
    let max_labels = num_labels.div_ceil(2);
    let all_labels: Vec<u16> = (0..num_labels as u16).collect();
    let mut rng = seeded_stream(seed, STREAM_REACH_QUERIES);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 200 * n {
        attempts += 1;
        let src = *vertices.choose(&mut rng).unwrap();
        let dst = *vertices.choose(&mut rng).unwrap();
        if src == dst {
            continue;
        }
        let size = rng.random_range(1..=max_labels);
        let mut labels = all_labels.clone();
        labels.shuffle(&mut rng);
        labels.truncate(size);
        let q = ReachabilityQuery::new(src, dst, labels).expect("non-empty label set");
        if !oracle.reachable(&q) {
            out.push(q);
        }
    }
    out
}
