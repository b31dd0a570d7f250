//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so every line is printed whether or not it
//! passes. Exits non-zero if any criterion fails.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbg_sketch::bench::{bench_run, budget_for_factor, BenchConfig};
use sbg_sketch::bounds::{simulate_eviction, tcm_error_ccdf, sbg_error_bound, BoundParams};
use sbg_sketch::metrics::average_relative_error;
use sbg_sketch::sketch::{dimension_for_budget, CELL_BYTES};
use sbg_sketch::snapshot::{read_sbg, read_tcm, write_sbg, write_tcm};
use sbg_sketch::workload::{gen_skewed_stream, gen_subgraph_queries, gen_unreachable_queries, LabelWeights, SkewedStreamSpec, SubgraphShape};
use sbg_sketch::{
    AggregateMode, EdgeEvent, EdgeQuery, ExactGraph, GraphSketch, ReachabilityQuery, SbgSketch, SketchConfig, SubgraphQuery,
    TcmConfig, TcmSketch,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Criteria 1 and 2: one sweep over random streams.

const SWEEP_STREAMS: usize = 1_000;
const SWEEP_LABELS: [usize; 3] = [2, 5, 16];

#[derive(Default)]
struct Sweep {
    streams: usize,
    queries: usize,
    sbg_under: usize,
    tcm_under: usize,
    sbg_false_zero: usize,
    tcm_false_zero: usize,
    unit_streams: usize,
    weighted_streams: usize,
    elapsed: Duration,
}

fn random_stream(r: &mut ChaCha8Rng, seed: u64, num_labels: usize, mode: AggregateMode, num_events: usize) -> Vec<EdgeEvent> {
    let num_vertices = r.random_range(20..=(num_events as u64).max(21));
    let weights = LabelWeights::Zipf(r.random_range(0.0..2.0));
    let mut spec = SkewedStreamSpec::new(num_vertices, num_labels, weights, num_events)
        .seed(seed)
        .mode(mode)
        .vertex_skew(if r.random_bool(0.5) { 0.0 } else { r.random_range(0.5..1.5) });
    if r.random_bool(0.5) {
        let distinct = r.random_range(num_events / 20..=num_events / 2).max(1);
        spec = spec.edge_pool(distinct, r.random_range(0.0..1.5));
    }
    gen_skewed_stream(&spec).expect("valid stream spec")
}

/// Budget from a random sketch-size factor, raised so that `d >= 2`.
fn random_budget(r: &mut ChaCha8Rng, num_events: usize, num_layers: usize, num_labels: usize) -> usize {
    let factor = r.random_range(0.02..0.35);
    budget_for_factor(factor, num_events).unwrap().max(num_layers * num_labels * CELL_BYTES * 4)
}

fn sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let start = Instant::now();
        let mut out = Sweep::default();
        for i in 0..SWEEP_STREAMS {
            let seed = 1_000 + i as u64;
            let mut r = rng(seed);
            let num_labels = SWEEP_LABELS[i % SWEEP_LABELS.len()];
            let mode = if (i / 3) % 2 == 0 { AggregateMode::Unit } else { AggregateMode::Weighted };
            let num_events = 10f64.powf(r.random_range(3.0..=5.0)).round() as usize;
            let events = random_stream(&mut r, seed, num_labels, mode, num_events);
            let num_layers = r.random_range(1..=4);
            let budget = random_budget(&mut r, num_events, num_layers, num_labels);
            let first_arrival = mode == AggregateMode::Unit && r.random_bool(0.75);

            let sbg_cfg = SketchConfig::new(num_labels, num_layers, budget)
                .seed(seed)
                .mode(mode)
                .first_arrival(first_arrival);
            let mut sbg = SbgSketch::new(sbg_cfg).unwrap();
            let mut tcm = TcmSketch::new(TcmConfig::new(num_labels, num_layers, budget).seed(seed).mode(mode)).unwrap();
            let mut oracle = ExactGraph::new(num_labels, mode);
            sbg.insert_batch(&events).unwrap();
            tcm.insert_batch(&events).unwrap();
            oracle.insert_all(&events).unwrap();

            let mut queries: Vec<(EdgeQuery, f64)> = oracle.edges().map(|(q, w)| (*q, w)).collect();
            let vertices = oracle.vertices();
            for _ in 0..200 {
                let q = EdgeQuery::new(
                    *vertices.choose(&mut r).unwrap(),
                    *vertices.choose(&mut r).unwrap(),
                    r.random_range(0..num_labels) as u16,
                );
                queries.push((q, oracle.edge_weight(&q)));
            }
            for (q, truth) in &queries {
                let s = sbg.estimate_edge(q).unwrap();
                let t = tcm.estimate_edge(q).unwrap();
                out.sbg_under += usize::from(s < *truth);
                out.tcm_under += usize::from(t < *truth);
                out.sbg_false_zero += usize::from(s == 0.0 && *truth != 0.0);
                out.tcm_false_zero += usize::from(t == 0.0 && *truth != 0.0);
            }
            out.queries += queries.len();
            out.streams += 1;
            match mode {
                AggregateMode::Unit => out.unit_streams += 1,
                AggregateMode::Weighted => out.weighted_streams += 1,
            }
        }
        out.elapsed = start.elapsed();
        out
    })
}

fn criterion_1() -> Outcome {
    let s = sweep();
    let pass = s.streams >= 1_000 && s.unit_streams > 0 && s.weighted_streams > 0 && s.sbg_under == 0 && s.tcm_under == 0;
    Outcome::new(
        pass,
        format!(
            "{} streams ({} unit, {} weighted), {} edge queries: sbg underestimates {}, tcm underestimates {}",
            s.streams, s.unit_streams, s.weighted_streams, s.queries, s.sbg_under, s.tcm_under
        ),
    )
}

fn criterion_2() -> Outcome {
    let s = sweep();
    let pass = s.streams >= 1_000 && s.sbg_false_zero == 0;
    Outcome::new(
        pass,
        format!(
            "{} streams, {} edge queries: sbg zero estimates of present edges {} (tcm {})",
            s.streams, s.queries, s.sbg_false_zero, s.tcm_false_zero
        ),
    )
}

/// A destination reachable from `src` by a random walk over `labels`, if
/// `src` has any allowed out-edge.
fn walk(oracle: &ExactGraph, r: &mut ChaCha8Rng, src: u64, labels: &[u16]) -> Option<u64> {
    let steps = r.random_range(1..=6);
    let mut at = src;
    let mut moved = false;
    for _ in 0..steps {
        let next: Vec<u64> = labels.iter().flat_map(|&l| oracle.out_neighbors(l, at)).collect();
        match next.choose(r) {
            Some(&v) => {
                at = v;
                moved = true;
            }
            None => break,
        }
    }
    moved.then_some(at)
}

fn criterion_3() -> Outcome {
    let mut positives = 0usize;
    let mut pairs = 0usize;
    let (mut sbg_missed, mut tcm_missed) = (0usize, 0usize);
    for i in 0..300u64 {
        let seed = 50_000 + i;
        let mut r = rng(seed);
        let num_labels = SWEEP_LABELS[i as usize % 3];
        let num_events = r.random_range(100..=3_000);
        let mode = if i % 2 == 0 { AggregateMode::Unit } else { AggregateMode::Weighted };
        let events = random_stream(&mut r, seed, num_labels, mode, num_events);
        let num_layers = r.random_range(1..=3);
        let budget = random_budget(&mut r, num_events, num_layers, num_labels);
        let mut sbg = SbgSketch::new(SketchConfig::new(num_labels, num_layers, budget).seed(seed).mode(mode)).unwrap();
        let mut tcm = TcmSketch::new(TcmConfig::new(num_labels, num_layers, budget).seed(seed).mode(mode)).unwrap();
        let mut oracle = ExactGraph::new(num_labels, mode);
        sbg.insert_batch(&events).unwrap();
        tcm.insert_batch(&events).unwrap();
        oracle.insert_all(&events).unwrap();
        let vertices = oracle.vertices();

        for j in 0..8 {
            let mut labels: Vec<u16> = (0..num_labels as u16).collect();
            labels.shuffle(&mut r);
            labels.truncate(r.random_range(1..=num_labels));
            let src = *vertices.choose(&mut r).unwrap();
            let dst = if j < 6 {
                match walk(&oracle, &mut r, src, &labels) {
                    Some(v) => v,
                    None => continue,
                }
            } else {
                *vertices.choose(&mut r).unwrap()
            };
            let q = ReachabilityQuery::new(src, dst, labels).unwrap();
            pairs += 1;
            if oracle.reachable(&q) {
                positives += 1;
                sbg_missed += usize::from(!sbg.estimate_reachable(&q).unwrap());
                tcm_missed += usize::from(!tcm.estimate_reachable(&q).unwrap());
            }
        }
    }
    let pass = positives >= 1_000 && sbg_missed == 0 && tcm_missed == 0;
    Outcome::new(
        pass,
        format!("{pairs} pairs, {positives} reachable: sbg false negatives {sbg_missed}, tcm false negatives {tcm_missed}"),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

struct SkewResult {
    name: &'static str,
    are_wins: usize,
    recall_wins: usize,
    sbg_are: f64,
    tcm_are: f64,
    sbg_recall: f64,
    tcm_recall: f64,
    elapsed: Duration,
}

fn skew_configuration(name: &'static str, num_labels: usize, weights: LabelWeights) -> SkewResult {
    let start = Instant::now();
    let (mut are_wins, mut recall_wins) = (0, 0);
    let (mut sa, mut ta, mut sr, mut tr) = (vec![], vec![], vec![], vec![]);
    for seed in 0..10u64 {
        let spec = SkewedStreamSpec::repeated_edges(num_labels, weights.clone(), 100_000).seed(seed);
        let events = gen_skewed_stream(&spec).unwrap();
        let cfg = BenchConfig {
            factor: 0.1,
            num_hashes: 2,
            seed,
            ..BenchConfig::default()
        };
        let report = bench_run(&events, num_labels, &cfg).unwrap();
        let (s_are, t_are) = (report.sbg.frequent_edge_are.unwrap(), report.tcm.frequent_edge_are.unwrap());
        let (s_rec, t_rec) = (report.sbg.true_negative_recall.unwrap(), report.tcm.true_negative_recall.unwrap());
        are_wins += usize::from(s_are <= t_are);
        recall_wins += usize::from(s_rec >= t_rec);
        sa.push(s_are);
        ta.push(t_are);
        sr.push(s_rec);
        tr.push(t_rec);
    }
    SkewResult {
        name,
        are_wins,
        recall_wins,
        sbg_are: median(sa),
        tcm_are: median(ta),
        sbg_recall: median(sr),
        tcm_recall: median(tr),
        elapsed: start.elapsed(),
    }
}

fn criterion_4() -> Outcome {
    let results = [
        skew_configuration("2 labels 100:1", 2, LabelWeights::Explicit(vec![100.0, 1.0])),
        skew_configuration("10 labels Zipf(1.2)", 10, LabelWeights::Zipf(1.2)),
    ];
    let pass = results
        .iter()
        .all(|r| r.are_wins >= 9 && r.recall_wins >= 9 && r.elapsed < Duration::from_secs(120));
    let detail = results
        .iter()
        .map(|r| {
            format!(
                "{}: ARE wins {}/10 (median sbg {:.3} vs tcm {:.3}), recall wins {}/10 (median sbg {:.3} vs tcm {:.3}) in {:.1}s",
                r.name,
                r.are_wins,
                r.sbg_are,
                r.tcm_are,
                r.recall_wins,
                r.sbg_recall,
                r.tcm_recall,
                r.elapsed.as_secs_f64()
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome::new(pass, detail)
}

fn criterion_5() -> Outcome {
    let num_labels = 10;
    // Dense enough for triangles and long paths.
    let spec = SkewedStreamSpec::new(2_000, num_labels, LabelWeights::Zipf(1.2), 20_000)
        .edge_pool(5_000, 1.0)
        .seed(5);
    let events = gen_skewed_stream(&spec).unwrap();
    let budget = budget_for_factor(0.1, events.len()).unwrap();
    let mut sbg = SbgSketch::new(SketchConfig::new(num_labels, 2, budget).seed(5)).unwrap();
    let mut tcm = TcmSketch::new(TcmConfig::new(num_labels, 2, budget).seed(5)).unwrap();
    let mut oracle = ExactGraph::new(num_labels, AggregateMode::Unit);
    sbg.insert_batch(&events).unwrap();
    tcm.insert_batch(&events).unwrap();
    oracle.insert_all(&events).unwrap();

    let queries = gen_subgraph_queries(&oracle, 1_000, 5, &SubgraphShape::default_mix());
    let sketches: [&dyn GraphSketch; 2] = [&sbg, &tcm];
    let mut mismatches = 0usize;
    for q in &queries {
        for s in sketches {
            let whole = s.estimate_subgraph(q).unwrap();
            let mut min = f64::INFINITY;
            for e in q.edges() {
                let est = s.estimate_edge(e).unwrap();
                min = if est == 0.0 { 0.0 } else { min.min(est) };
                if min == 0.0 {
                    break;
                }
            }
            mismatches += usize::from(whole.to_bits() != min.to_bits());
        }
    }

    // Absent edges the sketch recognises as never seen (estimate zero),
    // appended to every query.
    let mut r = rng(55);
    let vertices = oracle.vertices();
    let (mut zero_rule_checks, mut zero_rule_violations, mut absent_tried, mut absent_zero) = (0usize, 0usize, 0usize, 0usize);
    for (n, q) in queries.iter().enumerate() {
        let s = sketches[n % 2];
        let absent = loop {
            let e = EdgeQuery::new(
                *vertices.choose(&mut r).unwrap(),
                *vertices.choose(&mut r).unwrap(),
                r.random_range(0..num_labels) as u16,
            );
            if oracle.edge_weight(&e) != 0.0 || q.edges().contains(&e) {
                continue;
            }
            absent_tried += 1;
            if s.estimate_edge(&e).unwrap() == 0.0 {
                absent_zero += 1;
                break e;
            }
        };
        let mut edges = q.edges().to_vec();
        edges.insert(r.random_range(0..=edges.len()), absent);
        let extended = SubgraphQuery::new(edges).unwrap();
        zero_rule_checks += 1;
        zero_rule_violations += usize::from(s.estimate_subgraph(&extended).unwrap() != 0.0);
    }
    let pass = queries.len() >= 1_000 && mismatches == 0 && zero_rule_violations == 0;
    Outcome::new(
        pass,
        format!(
            "{} queries x 2 structures: min mismatches {mismatches}; zero rule {zero_rule_violations} violations in {zero_rule_checks} queries with a never-seen edge ({absent_zero}/{absent_tried} absent edges estimated zero)",
            queries.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let params = BoundParams::skewed_example();
    let bound0 = sbg_error_bound(0, &params).unwrap();
    let in_band = (0.5..=0.7).contains(&bound0);
    let mut dominated = true;
    let mut monotone = true;
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for k in 0..=200 {
        let tcm = tcm_error_ccdf(k, &params);
        let sbg = sbg_error_bound(k, &params).unwrap();
        dominated &= sbg <= tcm;
        monotone &= sbg <= prev.0 && tcm <= prev.1;
        prev = (sbg, tcm);
    }
    Outcome::new(
        in_band && dominated && monotone,
        format!(
            "sbg_error_bound(0) = {bound0:.4} (band [0.5, 0.7]: {}), tcm_error_ccdf(0) = {:.4}, bound <= tcm on k in 0..=200: {dominated}, non-increasing: {monotone}",
            if in_band { "inside" } else { "outside" },
            tcm_error_ccdf(0, &params)
        ),
    )
}

fn criterion_7() -> Outcome {
    let params = BoundParams::new(5, 1, 0.0, 2.0, 1.0);
    let sim = simulate_eviction(&params, 100_000, 7).unwrap();
    let mut violations = vec![];
    for k in 0..=10 {
        let empirical = sim.ccdf(k);
        let bound = sbg_error_bound(k, &params).unwrap();
        let slack = 3.0 * sim.std_error(k);
        if empirical > bound + slack {
            violations.push(format!("k={k}: empirical {empirical:.4} > bound {bound:.4} + 3 sigma {slack:.4}"));
        }
    }
    let detail = if violations.is_empty() {
        format!("empirical ccdf within bound + 3 sigma for k in 0..=10 (k=0: {:.4} vs {:.4})", sim.ccdf(0), sbg_error_bound(0, &params).unwrap())
    } else {
        violations.join("; ")
    };
    Outcome::new(violations.is_empty(), detail)
}

/// Distinct edges whose home positions never coincide with another edge of
/// the same label in any layer of `probe`.
fn collision_free_edges(probe: &SbgSketch, r: &mut ChaCha8Rng, num_labels: usize, per_label: usize) -> Vec<EdgeQuery> {
    let layers = probe.num_layers();
    let mut taken: HashSet<(usize, u16, usize, usize)> = HashSet::new();
    let mut edges = vec![];
    for label in 0..num_labels as u16 {
        let mut count = 0;
        while count < per_label {
            let (src, dst) = (r.random::<u64>(), r.random::<u64>());
            let cells: Vec<_> = (0..layers)
                .map(|p| (p, label, probe.vertex_bucket(p, src), probe.vertex_bucket(p, dst)))
                .collect();
            if cells.iter().any(|c| taken.contains(c)) {
                continue;
            }
            taken.extend(cells);
            edges.push(EdgeQuery::new(src, dst, label));
            count += 1;
        }
    }
    edges
}

fn criterion_8() -> Outcome {
    let d = 64;
    let mut runs = 0;
    let mut failures = vec![];
    for (i, &num_labels) in SWEEP_LABELS.iter().cycle().take(12).enumerate() {
        let seed = 800 + i as u64;
        let mode = if i % 2 == 0 { AggregateMode::Unit } else { AggregateMode::Weighted };
        let mut r = rng(seed);
        let mut sbg = SbgSketch::new(SketchConfig::with_exact_dimension(num_labels, 2, d).seed(seed).mode(mode)).unwrap();
        let mut tcm = TcmSketch::new(TcmConfig::with_exact_dimension(num_labels, 2, d).seed(seed).mode(mode)).unwrap();
        let per_label = r.random_range(d * d / 8..=d * d / 4);
        let edges = collision_free_edges(&sbg, &mut r, num_labels, per_label);
        // Both structures hash vertices identically at equal seed and d.
        let verified = edges.iter().all(|e| {
            (0..2).all(|p| {
                sbg.vertex_bucket(p, e.src) == tcm.vertex_bucket(p, e.src) && sbg.vertex_bucket(p, e.dst) == tcm.vertex_bucket(p, e.dst)
            })
        });
        let mut events = vec![];
        for e in &edges {
            for _ in 0..r.random_range(1..=5) {
                events.push(EdgeEvent::new(e.src, e.dst, e.label, r.random_range(1..=10) as f64));
            }
        }
        events.shuffle(&mut r);
        let mut oracle = ExactGraph::new(num_labels, mode);
        sbg.insert_batch(&events).unwrap();
        tcm.insert_batch(&events).unwrap();
        oracle.insert_all(&events).unwrap();
        let are = |s: &dyn GraphSketch| {
            let pairs: Vec<(f64, f64)> = edges.iter().map(|e| (s.estimate_edge(e).unwrap(), oracle.edge_weight(e))).collect();
            average_relative_error(&pairs).unwrap()
        };
        let (sa, ta) = (are(&sbg), are(&tcm));
        runs += 1;
        if !verified || sa != 0.0 || ta != 0.0 {
            failures.push(format!("L={num_labels} {mode:?}: verified {verified}, sbg ARE {sa}, tcm ARE {ta}"));
        }
    }
    let detail = if failures.is_empty() {
        format!("{runs} collision-free streams (d = {d}, up to d^2/4 edges per label): ARE = 0 for both")
    } else {
        failures.join("; ")
    };
    Outcome::new(failures.is_empty(), detail)
}

fn criterion_9() -> Outcome {
    let num_labels = 5;
    let num_layers = 2;
    let num_events = 1_000_000;
    let spec = SkewedStreamSpec::repeated_edges(num_labels, LabelWeights::Zipf(1.2), num_events).seed(9);
    let events = gen_skewed_stream(&spec).unwrap();
    let budget = budget_for_factor(0.1, num_events).unwrap();
    let d = dimension_for_budget(budget, num_layers, num_labels, CELL_BYTES);
    let (mut best_sbg, mut best_tcm) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..5 {
        let mut sbg = SbgSketch::new(SketchConfig::with_exact_dimension(num_labels, num_layers, d).seed(9)).unwrap();
        let start = Instant::now();
        sbg.insert_batch(&events).unwrap();
        best_sbg = best_sbg.min(start.elapsed().as_secs_f64());

        let mut tcm = TcmSketch::new(TcmConfig::with_exact_dimension(num_labels, num_layers, d).seed(9)).unwrap();
        let start = Instant::now();
        tcm.insert_batch(&events).unwrap();
        best_tcm = best_tcm.min(start.elapsed().as_secs_f64());
    }
    let ratio = best_sbg / best_tcm;
    Outcome::new(
        ratio <= 2.0,
        format!(
            "L={num_labels}, P={num_layers}, d={d} for both, 10^6 events: sbg {:.1} Mev/s, tcm {:.1} Mev/s, time ratio {ratio:.2} (limit 2.0)",
            num_events as f64 / best_sbg / 1e6,
            num_events as f64 / best_tcm / 1e6
        ),
    )
}

fn criterion_10() -> Outcome {
    let num_labels = 6;
    let spec = SkewedStreamSpec::repeated_edges(num_labels, LabelWeights::Zipf(1.2), 30_000).seed(10);
    let events = gen_skewed_stream(&spec).unwrap();
    let budget = budget_for_factor(0.1, events.len()).unwrap();
    let mut sbg = SbgSketch::new(SketchConfig::new(num_labels, 3, budget).seed(10)).unwrap();
    let mut tcm = TcmSketch::new(TcmConfig::new(num_labels, 3, budget).seed(10)).unwrap();
    let mut oracle = ExactGraph::new(num_labels, AggregateMode::Unit);
    sbg.insert_batch(&events).unwrap();
    tcm.insert_batch(&events).unwrap();
    oracle.insert_all(&events).unwrap();

    let mut buf = vec![];
    write_sbg(&mut buf, &sbg).unwrap();
    let sbg_back = read_sbg(buf.as_slice()).unwrap();
    buf.clear();
    write_tcm(&mut buf, &tcm).unwrap();
    let tcm_back = read_tcm(buf.as_slice()).unwrap();

    let mut r = rng(10);
    let vertices = oracle.vertices();
    let mut edge_qs: Vec<EdgeQuery> = oracle.positive_edges().into_iter().take(2_000).collect();
    for _ in 0..1_000 {
        edge_qs.push(EdgeQuery::new(*vertices.choose(&mut r).unwrap(), *vertices.choose(&mut r).unwrap(), r.random_range(0..num_labels) as u16));
    }
    let sub_qs = gen_subgraph_queries(&oracle, 300, 10, &SubgraphShape::default_mix());
    let reach_qs = gen_unreachable_queries(&oracle, 300, 10);
    let mut differences = 0usize;
    let pairs: [(&dyn GraphSketch, &dyn GraphSketch); 2] = [(&sbg, &sbg_back), (&tcm, &tcm_back)];
    for (a, b) in pairs {
        for q in &edge_qs {
            differences += usize::from(a.estimate_edge(q).unwrap().to_bits() != b.estimate_edge(q).unwrap().to_bits());
        }
        for q in &sub_qs {
            differences += usize::from(a.estimate_subgraph(q).unwrap().to_bits() != b.estimate_subgraph(q).unwrap().to_bits());
        }
        for q in &reach_qs {
            differences += usize::from(a.estimate_reachable(q).unwrap() != b.estimate_reachable(q).unwrap());
        }
    }
    let cells_equal = sbg.same_cells(&sbg_back);

    let cfg = BenchConfig {
        seed: 10,
        edge_queries: 2_000,
        subgraph_queries: 200,
        reach_queries: 200,
        ..BenchConfig::default()
    };
    let first = bench_run(&events, num_labels, &cfg).unwrap();
    let second = bench_run(&events, num_labels, &cfg).unwrap();
    let reports_equal = first.deterministic_json() == second.deterministic_json();

    Outcome::new(
        differences == 0 && cells_equal && reports_equal,
        format!(
            "round trip: {differences} differing answers over {} queries x 2 structures, cells identical {cells_equal}; repeated bench reports identical {reports_equal}",
            edge_qs.len() + sub_qs.len() + reach_qs.len()
        ),
    )
}

type Criterion = (usize, &'static str, fn() -> Outcome, Option<u64>);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "no-underestimation", criterion_1, Some(300)),
        (2, "zero soundness", criterion_2, Some(300)),
        (3, "reachability without false negatives", criterion_3, None),
        (4, "skew benefit", criterion_4, Some(240)),
        (5, "sub-graph min semantics", criterion_5, None),
        (6, "bound evaluator", criterion_6, Some(10)),
        (7, "bound vs simulation", criterion_7, Some(30)),
        (8, "exactness without collisions", criterion_8, None),
        (9, "throughput overhead", criterion_9, Some(60)),
        (10, "determinism and round trip", criterion_10, None),
    ];
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let mut elapsed = start.elapsed().as_secs_f64();
        if id == 2 {
            elapsed += sweep().elapsed.as_secs_f64();
        }
        let outcome = result.unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let over_time = limit.is_some_and(|l| elapsed > l as f64);
        let pass = outcome.pass && !over_time;
        failed += usize::from(!pass);
        let time_note = match limit {
            Some(l) if over_time => format!(" [{elapsed:.1}s, over the {l}s limit]"),
            _ => format!(" [{elapsed:.1}s]"),
        };
        println!(
            "{} criterion {id} ({name}): {}{time_note}",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
