//! The ranked sketch against the per-label baseline.

use proptest::prelude::*;

use sbg_sketch::metrics::average_relative_error;
use sbg_sketch::workload::{gen_skewed_stream, LabelWeights, SkewedStreamSpec};
use sbg_sketch::{
    AggregateMode, EdgeEvent, EdgeQuery, ExactGraph, ReachabilityQuery, SbgSketch, SketchConfig, SubgraphQuery, TcmConfig,
    TcmSketch,
};

fn pair(num_labels: usize, num_layers: usize, d: usize, seed: u64, mode: AggregateMode) -> (SbgSketch, TcmSketch) {
    let sbg = SketchConfig::with_exact_dimension(num_labels, num_layers, d)
        .mode(mode)
        .first_arrival(mode == AggregateMode::Unit)
        .seed(seed);
    let tcm = TcmConfig::with_exact_dimension(num_labels, num_layers, d).mode(mode).seed(seed);
    (SbgSketch::new(sbg).unwrap(), TcmSketch::new(tcm).unwrap())
}

fn stream() -> impl Strategy<Value = (usize, usize, usize, u64, bool, Vec<EdgeEvent>)> {
    (1usize..=5, 1usize..=3, 1usize..=6, any::<u64>(), any::<bool>()).prop_flat_map(|(l, p, d, seed, weighted)| {
        let event = (0u64..25, 0u64..25, 0..l as u16, 0u32..8).prop_map(move |(s, t, lab, w)| {
            if weighted {
                EdgeEvent::new(s, t, lab, f64::from(w))
            } else {
                EdgeEvent::unit(s, t, lab)
            }
        });
        prop::collection::vec(event, 1..150).prop_map(move |events| (l, p, d, seed, weighted, events))
    })
}

fn all_queries(num_labels: usize, events: &[EdgeEvent]) -> Vec<EdgeQuery> {
    events
        .iter()
        .flat_map(|e| (0..num_labels as u16).flat_map(move |l| [EdgeQuery::new(e.src, e.dst, l), EdgeQuery::new(e.dst, e.src, l)]))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ranked_sketch_never_loses_to_baseline((l, p, d, seed, weighted, events) in stream()) {
        let mode = if weighted { AggregateMode::Weighted } else { AggregateMode::Unit };
        let (mut sbg, mut tcm) = pair(l, p, d, seed, mode);
        sbg.insert_batch(&events).unwrap();
        tcm.insert_batch(&events).unwrap();
        let mut oracle = ExactGraph::new(l, mode);
        oracle.insert_all(&events).unwrap();
        for q in all_queries(l, &events) {
            let (s, t, h) = (sbg.estimate_edge(&q).unwrap(), tcm.estimate_edge(&q).unwrap(), sbg.estimate_edge_home_only(&q).unwrap());
            let exact = oracle.edge_weight(&q);
            prop_assert_eq!(h, t, "home-only view differs from baseline on {}", q);
            prop_assert!(s <= t);
            prop_assert!(t >= exact);
            if t == 0.0 {
                prop_assert_eq!(exact, 0.0);
            }
            if l == 1 {
                prop_assert_eq!(s, t);
            }
        }
    }

    #[test]
    fn baseline_reachability_has_no_false_negatives((l, p, d, seed, weighted, events) in stream(), pairs in prop::collection::vec((0u64..25, 0u64..25), 1..10)) {
        let mode = if weighted { AggregateMode::Weighted } else { AggregateMode::Unit };
        let (_, mut tcm) = pair(l, p, d, seed, mode);
        tcm.insert_batch(&events).unwrap();
        let mut oracle = ExactGraph::new(l, mode);
        oracle.insert_all(&events).unwrap();
        for (s, t) in pairs {
            let q = ReachabilityQuery::new(s, t, 0..l as u16).unwrap();
            if oracle.reachable(&q) {
                prop_assert!(tcm.estimate_reachable(&q).unwrap());
            }
        }
    }

    #[test]
    fn baseline_subgraph_is_min_of_edges((l, p, d, seed, _w, events) in stream()) {
        let (_, mut tcm) = pair(l, p, d, seed, AggregateMode::Unit);
        tcm.insert_batch(&events).unwrap();
        let mut edges: Vec<EdgeQuery> = vec![];
        for q in all_queries(l, &events).into_iter().take(40) {
            if !edges.contains(&q) {
                edges.push(q);
            }
        }
        let expected = edges.iter().map(|q| tcm.estimate_edge(q).unwrap()).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(tcm.estimate_subgraph(&SubgraphQuery::new(edges).unwrap()).unwrap(), expected);
    }
}

#[test]
fn baseline_examples() {
    let (_, mut tcm) = pair(3, 1, 1, 0, AggregateMode::Weighted);
    assert_eq!(tcm.estimate_edge(&EdgeQuery::new(1, 2, 0)).unwrap(), 0.0);
    tcm.insert(&EdgeEvent::new(1, 2, 0, 3.0)).unwrap();
    tcm.insert(&EdgeEvent::new(4, 5, 0, 2.5)).unwrap();
    assert_eq!(tcm.estimate_edge(&EdgeQuery::new(1, 2, 0)).unwrap(), 5.5);
    // Rare labels never borrow space from the busy one.
    assert_eq!(tcm.estimate_edge(&EdgeQuery::new(1, 2, 1)).unwrap(), 0.0);
    assert!(tcm.estimate_edge(&EdgeQuery::new(1, 2, 3)).is_err());

    let (_, mut tcm) = pair(3, 1, 64, 5, AggregateMode::Unit);
    let (a, b) = (0u64..).map(|a| (a, a + 1)).find(|&(a, b)| tcm.vertex_bucket(0, a) != tcm.vertex_bucket(0, b)).unwrap();
    tcm.insert(&EdgeEvent::unit(a, b, 0)).unwrap();
    assert!(tcm.estimate_reachable(&ReachabilityQuery::new(a, b, [0]).unwrap()).unwrap());
    assert!(!tcm.estimate_reachable(&ReachabilityQuery::new(a, b, [1, 2]).unwrap()).unwrap());
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

#[test]
fn more_layers_lower_median_error() {
    // Fixed memory per layer, one layer versus four, both structures.
    const PER_LAYER: usize = 100_000;
    let mut medians = vec![];
    for layers in [1, 4] {
        let (mut sbg_ares, mut tcm_ares) = (vec![], vec![]);
        for seed in 0..10 {
            let spec = SkewedStreamSpec::new(5_000, 8, LabelWeights::Zipf(1.2), 50_000).edge_pool(20_000, 1.0).seed(seed);
            let events = gen_skewed_stream(&spec).unwrap();
            let mut oracle = ExactGraph::new(8, AggregateMode::Unit);
            oracle.insert_all(&events).unwrap();
            let mut sbg = SbgSketch::new(SketchConfig::new(8, layers, PER_LAYER * layers).seed(seed)).unwrap();
            let mut tcm = TcmSketch::new(TcmConfig::new(8, layers, PER_LAYER * layers).seed(seed)).unwrap();
            sbg.insert_batch(&events).unwrap();
            tcm.insert_batch(&events).unwrap();
            let sbg_pairs: Vec<(f64, f64)> = oracle.edges().map(|(q, exact)| (sbg.estimate_edge(q).unwrap(), exact)).collect();
            let tcm_pairs: Vec<(f64, f64)> = oracle.edges().map(|(q, exact)| (tcm.estimate_edge(q).unwrap(), exact)).collect();
            sbg_ares.push(average_relative_error(&sbg_pairs).unwrap());
            tcm_ares.push(average_relative_error(&tcm_pairs).unwrap());
        }
        medians.push((median(sbg_ares), median(tcm_ares)));
    }
    let ((sbg1, tcm1), (sbg4, tcm4)) = (medians[0], medians[1]);
    assert!(sbg4 <= sbg1, "ranked: {sbg4} with 4 layers vs {sbg1} with 1");
    assert!(tcm4 <= tcm1, "baseline: {tcm4} with 4 layers vs {tcm1} with 1");
}
