//! Independent brute-force oracles shared by the integration tests. Nothing
//! here calls into the library's algorithms; only `MetricSpace::d` is read.

#![allow(dead_code)]

use proptest::prelude::*;
use revgreedy::metric::{random_metric, MetricSpace, RandomKind};

/// `max_c min_{f ∈ F} d(c, f)` straight from the definition.
pub fn brute_cost(m: &MetricSpace, f: &[usize]) -> f64 {
    (0..m.len())
        .map(|c| f.iter().map(|&x| m.d(c, x)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum k-center cost over every k-subset.
pub fn brute_opt(m: &MetricSpace, k: usize) -> f64 {
    subsets(m.len(), k)
        .iter()
        .map(|s| brute_cost(m, s))
        .fold(f64::INFINITY, f64::min)
}

/// Floyd–Warshall over an undirected weighted edge list.
pub fn floyd(n: usize, edges: &[(usize, usize, u64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        let w = w as f64;
        if w < d[u][v] {
            d[u][v] = w;
            d[v][u] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Smallest number of subsets of `f`, each of diameter at most `2·opt`, such
/// that every facility is in one and every same-ball pair shares one. The
/// candidates are every such subset of `f`, not just maximal cliques.
pub fn brute_gamma(m: &MetricSpace, opt: f64, balls: &[Vec<usize>], f: &[usize]) -> usize {
    let r = f.len();
    assert!(r <= 10, "oracle is exponential in |F|");
    let ok = |mask: u32| {
        let pts: Vec<usize> = (0..r).filter(|&i| mask >> i & 1 == 1).map(|i| f[i]).collect();
        pts.iter().all(|&a| pts.iter().all(|&b| m.d(a, b) <= 2.0 * opt + 1e-9))
    };
    let sets: Vec<u32> = (1..1u32 << r).filter(|&s| ok(s)).collect();
    let mut reqs: Vec<u32> = (0..r).map(|i| 1 << i).collect();
    for ball in balls {
        let inside: Vec<usize> = (0..r).filter(|&i| ball.contains(&f[i])).collect();
        for (a, &i) in inside.iter().enumerate() {
            for &j in &inside[a + 1..] {
                reqs.push(1 << i | 1 << j);
            }
        }
    }
    fn search(sets: &[u32], reqs: &[u32], chosen: &mut Vec<u32>, size: usize) -> bool {
        let open = reqs.iter().find(|&&q| !chosen.iter().any(|&s| s & q == q));
        let Some(&q) = open else { return true };
        if chosen.len() == size {
            return false;
        }
        for &s in sets.iter().filter(|&&s| s & q == q) {
            chosen.push(s);
            if search(sets, reqs, chosen, size) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    (1..=r).find(|&size| search(&sets, &reqs, &mut Vec::new(), size)).expect("singletons always work")
}

pub fn kind_strategy() -> impl Strategy<Value = RandomKind> {
    prop_oneof![
        (1usize..4, 10.0f64..1000.0).prop_map(|(dim, side)| RandomKind::Euclidean { dim, side }),
        (0.0f64..1.0, 1u64..20).prop_map(|(edge_prob, max_weight)| RandomKind::RandomGraph { edge_prob, max_weight }),
    ]
}

/// A random metric with `n` in `range`.
pub fn metric_strategy(range: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = MetricSpace> {
    (kind_strategy(), range, any::<u64>()).prop_map(|(kind, n, seed)| random_metric(kind, n, seed).unwrap())
}

/// A random metric together with a valid k.
pub fn instance_strategy(
    range: std::ops::RangeInclusive<usize>,
    max_k: usize,
) -> impl Strategy<Value = (MetricSpace, usize)> {
    metric_strategy(range).prop_flat_map(move |m| {
        let top = max_k.min(m.len());
        (Just(m), 1..=top)
    })
}
