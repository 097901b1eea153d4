mod common;

use common::{floyd, metric_strategy};
use proptest::prelude::*;
use revgreedy::metric::{metric_from_graph, validate_metric, Arithmetic, MetricSpace, Violation, WeightedGraph};
use revgreedy::Error;

/// A connected graph: a random spanning tree plus extra edges.
fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize, u64)>)> {
    (2usize..12).prop_flat_map(|n| {
        let tree = (1..n).map(|v| (0..v, 1u64..20)).collect::<Vec<_>>();
        let extra = prop::collection::vec((0..n, 0..n, 1u64..20), 0..2 * n);
        (Just(n), tree, extra).prop_map(|(n, tree, extra)| {
            let mut edges: Vec<_> = tree.into_iter().enumerate().map(|(i, (p, w))| (p, i + 1, w)).collect();
            edges.extend(extra.into_iter().filter(|(u, v, _)| u != v));
            (n, edges)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn generated_metrics_are_valid(m in metric_strategy(1..=15)) {
        prop_assert!(validate_metric(&m).is_valid());
    }

    #[test]
    fn shortest_paths_match_floyd_warshall((n, edges) in graph_strategy()) {
        let m = metric_from_graph(&WeightedGraph::new(n, edges.clone()).unwrap()).unwrap();
        let want = floyd(n, &edges);
        for (a, row) in want.iter().enumerate() {
            for (b, &d) in row.iter().enumerate() {
                prop_assert_eq!(m.d(a, b), d);
            }
        }
        prop_assert!(validate_metric(&m).is_valid());
    }

    #[test]
    fn raising_a_weight_never_shortens_a_path(
        (n, edges) in graph_strategy(),
        pick in any::<prop::sample::Index>(),
        bump in 1u64..10,
    ) {
        let before = metric_from_graph(&WeightedGraph::new(n, edges.clone()).unwrap()).unwrap();
        let mut raised = edges;
        let i = pick.index(raised.len());
        raised[i].2 += bump;
        let after = metric_from_graph(&WeightedGraph::new(n, raised).unwrap()).unwrap();
        for a in 0..n {
            for b in 0..n {
                prop_assert!(after.d(a, b) >= before.d(a, b));
            }
        }
    }
}

#[test]
fn each_axiom_violation_is_reported() {
    let m = MetricSpace::from_rows(vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]], Arithmetic::Exact)
        .unwrap();
    let r = validate_metric(&m);
    assert!(r.violations.iter().any(|v| matches!(v, Violation::Triangle { .. })));

    let m = MetricSpace::from_rows(vec![vec![0.0, 2.0], vec![3.0, 0.0]], Arithmetic::Exact).unwrap();
    assert!(validate_metric(&m).violations.contains(&Violation::Symmetry { a: 0, b: 1 }));

    let m = MetricSpace::from_rows(vec![vec![0.0, 0.0], vec![0.0, 0.0]], Arithmetic::Exact).unwrap();
    assert!(!validate_metric(&m).is_valid());

    let m = MetricSpace::from_rows(vec![vec![1.0, 2.0], vec![2.0, 0.0]], Arithmetic::Exact).unwrap();
    assert!(!validate_metric(&m).is_valid());
}

#[test]
fn disconnected_graph_is_rejected() {
    let g = WeightedGraph::new(4, vec![(0, 1, 1), (2, 3, 1)]).unwrap();
    assert!(matches!(metric_from_graph(&g), Err(Error::Disconnected(_, _))));
}

#[test]
fn float_mode_compares_within_eps() {
    let ar = Arithmetic::float();
    assert!(ar.eq(1.0, 1.0 + 1e-12));
    assert!(ar.le(1.0 + 1e-12, 1.0));
    assert!(!ar.lt(1.0, 1.0 + 1e-12));
    assert!(!Arithmetic::Exact.eq(1.0, 1.0 + 1e-12));
}
