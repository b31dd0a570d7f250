//! Side-by-side accuracy benchmark of the ranked sketch and the baseline.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};
use crate::metrics::{average_relative_error, error_reduction_pct, true_negative_recall};
use crate::oracle::ExactGraph;
use crate::par;
use crate::query::{EdgeQuery, GraphSketch, ReachabilityQuery, SubgraphQuery};
use crate::sketch::{AggregateMode, EdgeEvent, SbgSketch, SketchConfig};
use crate::stream::stream_byte_size;
use crate::tcm::{TcmConfig, TcmSketch};
use crate::workload::{gen_edge_queries, gen_subgraph_queries, gen_unreachable_queries, EdgeSampling, SubgraphShape};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Sketch memory as a fraction of the stream's byte size, in (0, 1).
    pub factor: f64,
    pub num_hashes: usize,
    pub mode: AggregateMode,
    pub first_arrival: bool,
    pub rank_vectors: Option<usize>,
    pub seed: u64,
    pub edge_queries: usize,
    pub subgraph_queries: usize,
    pub reach_queries: usize,
    pub sampling: EdgeSampling,
    pub shapes: Vec<SubgraphShape>,
    /// Labels in the top `ceil(share * L)` by event count are "frequent".
    pub frequent_label_share: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            factor: 0.1,
            num_hashes: 2,
            mode: AggregateMode::Unit,
            first_arrival: true,
            rank_vectors: None,
            seed: 0,
            edge_queries: 10_000,
            subgraph_queries: 1_000,
            reach_queries: 1_000,
            sampling: EdgeSampling::Uniform,
            shapes: SubgraphShape::default_mix(),
            frequent_label_share: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub name: String,
    pub dimension: usize,
    pub memory_bytes: usize,
    pub edge_are: Option<f64>,
    pub frequent_edge_are: Option<f64>,
    pub edge_are_by_label: Vec<Option<f64>>,
    pub subgraph_are: Option<f64>,
    pub true_negative_recall: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSummary {
    pub events: usize,
    pub distinct_edges: usize,
    pub stream_bytes: usize,
    pub label_counts: Vec<usize>,
    pub frequent_labels: Vec<u16>,
    pub edge_queries: usize,
    pub subgraph_queries: usize,
    pub reach_queries: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub sbg: u64,
    pub tcm: u64,
    pub workload: u64,
}

/// Wall-clock measurements in milliseconds; the only nondeterministic part
/// of a report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub sbg_construction_ms: f64,
    pub tcm_construction_ms: f64,
    pub oracle_construction_ms: f64,
    pub sbg_query_ms: f64,
    pub tcm_query_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub num_labels: usize,
    pub memory_budget_bytes: usize,
    pub seeds: Seeds,
    pub workload: WorkloadSummary,
    pub sbg: StructureReport,
    pub tcm: StructureReport,
    pub edge_error_reduction_pct: Option<f64>,
    pub frequent_edge_error_reduction_pct: Option<f64>,
    pub subgraph_error_reduction_pct: Option<f64>,
    pub timings: Timings,
}

impl BenchReport {
    /// The report as JSON without the timing block.
    pub fn deterministic_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().unwrap().remove("timings");
        v
    }
}

/// Memory budget for a factor: `floor(F * stream bytes)`.
pub fn budget_for_factor(factor: f64, num_events: usize) -> Result<usize> {
    if !(factor > 0.0 && factor < 1.0) {
        return Err(SketchError::Config(format!("sketch-size factor must be in (0, 1), got {factor}")));
    }
    Ok((factor * stream_byte_size(num_events) as f64).floor() as usize)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

fn frequent_labels(counts: &[usize], share: f64) -> Vec<u16> {
    let mut order: Vec<u16> = (0..counts.len() as u16).collect();
    order.sort_by(|&a, &b| counts[b as usize].cmp(&counts[a as usize]).then(a.cmp(&b)));
    let top = ((share * counts.len() as f64).ceil() as usize).clamp(1, counts.len().max(1));
    let mut out: Vec<u16> = order.into_iter().take(top).collect();
    out.sort_unstable();
    out
}

struct Workload {
    edges: Vec<EdgeQuery>,
    edge_truth: Vec<f64>,
    subgraphs: Vec<SubgraphQuery>,
    subgraph_truth: Vec<f64>,
    reach: Vec<ReachabilityQuery>,
    frequent: Vec<u16>,
}

fn are_of(estimates: &[f64], truth: &[f64], keep: impl Fn(usize) -> bool) -> Result<Option<f64>> {
    let pairs: Vec<(f64, f64)> = estimates
        .iter()
        .zip(truth)
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, (&e, &t))| (e, t))
        .collect();
    if pairs.is_empty() {
        Ok(None)
    } else {
        average_relative_error(&pairs).map(Some)
    }
}

fn evaluate(sketch: &dyn GraphSketch, dimension: usize, w: &Workload, num_labels: usize) -> Result<(StructureReport, f64)> {
    let start = Instant::now();
    let edge_est = par::map(&w.edges, |q| sketch.estimate_edge(q)).into_iter().collect::<Result<Vec<_>>>()?;
    let sub_est = par::map(&w.subgraphs, |q| sketch.estimate_subgraph(q)).into_iter().collect::<Result<Vec<_>>>()?;
    let reach_est = par::map(&w.reach, |q| sketch.estimate_reachable(q)).into_iter().collect::<Result<Vec<_>>>()?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    let by_label = (0..num_labels as u16)
        .map(|l| are_of(&edge_est, &w.edge_truth, |i| w.edges[i].label == l))
        .collect::<Result<Vec<_>>>()?;
    let report = StructureReport {
        name: sketch.name().to_string(),
        dimension,
        memory_bytes: sketch.memory_footprint(),
        edge_are: are_of(&edge_est, &w.edge_truth, |_| true)?,
        frequent_edge_are: are_of(&edge_est, &w.edge_truth, |i| w.frequent.contains(&w.edges[i].label))?,
        edge_are_by_label: by_label,
        subgraph_are: are_of(&sub_est, &w.subgraph_truth, |_| true)?,
        true_negative_recall: if reach_est.is_empty() {
            None
        } else {
            Some(true_negative_recall(&reach_est)?)
        },
    };
    Ok((report, elapsed))
}

/// Replays `events` into both sketches and the exact graph, then measures
/// accuracy on generated query workloads.
pub fn bench_run(events: &[EdgeEvent], num_labels: usize, config: &BenchConfig) -> Result<BenchReport> {
    let budget = budget_for_factor(config.factor, events.len())?;
    let seeds = Seeds {
        sbg: config.seed,
        tcm: config.seed ^ 0x7463_6d00_0000_0000,
        workload: config.seed ^ 0x776b_6c64_0000_0000,
    };

    let mut sbg_cfg = SketchConfig::new(num_labels, config.num_hashes, budget)
        .seed(seeds.sbg)
        .mode(config.mode)
        .first_arrival(config.first_arrival && config.mode == AggregateMode::Unit);
    if let Some(r) = config.rank_vectors {
        sbg_cfg = sbg_cfg.rank_vectors(r);
    }
    let tcm_cfg = TcmConfig::new(num_labels, config.num_hashes, budget).seed(seeds.tcm).mode(config.mode);
    let mut sbg = SbgSketch::new(sbg_cfg)?;
    let mut tcm = TcmSketch::new(tcm_cfg)?;
    let mut oracle = ExactGraph::new(num_labels, config.mode);

    let ((sbg_built, tcm_built), oracle_built) = par::join(
        || {
            par::join(
                || timed(|| sbg.insert_batch(events)),
                || timed(|| tcm.insert_batch(events)),
            )
        },
        || timed(|| oracle.insert_all(events)),
    );
    let (sbg_res, sbg_ms) = sbg_built;
    let (tcm_res, tcm_ms) = tcm_built;
    let (oracle_res, oracle_ms) = oracle_built;
    sbg_res?;
    tcm_res?;
    oracle_res?;

    let mut label_counts = vec![0usize; num_labels];
    for e in events {
        label_counts[e.label as usize] += 1;
    }
    let edges = gen_edge_queries(&oracle, config.edge_queries, seeds.workload, config.sampling);
    let subgraphs = gen_subgraph_queries(&oracle, config.subgraph_queries, seeds.workload, &config.shapes);
    let reach = gen_unreachable_queries(&oracle, config.reach_queries, seeds.workload);
    let workload = Workload {
        edge_truth: edges.iter().map(|q| oracle.edge_weight(q)).collect(),
        subgraph_truth: subgraphs.iter().map(|q| oracle.subgraph_weight(q)).collect(),
        edges,
        subgraphs,
        reach,
        frequent: frequent_labels(&label_counts, config.frequent_label_share),
    };

    let (sbg_report, sbg_query_ms) = evaluate(&sbg, sbg.dimension(), &workload, num_labels)?;
    let (tcm_report, tcm_query_ms) = evaluate(&tcm, tcm.dimension(), &workload, num_labels)?;
    let reduction = |ours: Option<f64>, base: Option<f64>| error_reduction_pct(ours?, base?);

    Ok(BenchReport {
        config: config.clone(),
        num_labels,
        memory_budget_bytes: budget,
        seeds,
        workload: WorkloadSummary {
            events: events.len(),
            distinct_edges: oracle.num_distinct_edges(),
            stream_bytes: stream_byte_size(events.len()),
            label_counts,
            frequent_labels: workload.frequent.clone(),
            edge_queries: workload.edges.len(),
            subgraph_queries: workload.subgraphs.len(),
            reach_queries: workload.reach.len(),
        },
        edge_error_reduction_pct: reduction(sbg_report.edge_are, tcm_report.edge_are),
        frequent_edge_error_reduction_pct: reduction(sbg_report.frequent_edge_are, tcm_report.frequent_edge_are),
        subgraph_error_reduction_pct: reduction(sbg_report.subgraph_are, tcm_report.subgraph_are),
        sbg: sbg_report,
        tcm: tcm_report,
        timings: Timings {
            sbg_construction_ms: sbg_ms,
            tcm_construction_ms: tcm_ms,
            oracle_construction_ms: oracle_ms,
            sbg_query_ms,
            tcm_query_ms,
        },
    })
}
