//! Finite metric spaces with materialized distance matrices.
//!
//! Every point is both a client and a candidate facility. Two arithmetic
//! modes are supported: exact integers (graph-derived metrics, ties decided
//! exactly) and floating point with a comparison tolerance.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for tie and argmin decisions in floating mode.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Largest integer distance stored exactly; every sum formed by the
/// algorithms stays well below this.
const MAX_EXACT: f64 = 9_007_199_254_740_992.0; // 2^53

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Arithmetic {
    /// All distances are integers, comparisons are exact.
    Exact,
    /// Distances are reals, comparisons use tolerance `eps`.
    Float { eps: f64 },
}

impl Arithmetic {
    pub fn float() -> Self {
        Arithmetic::Float { eps: DEFAULT_EPS }
    }

    pub fn eps(self) -> f64 {
        match self {
            Arithmetic::Exact => 0.0,
            Arithmetic::Float { eps } => eps,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Arithmetic::Exact)
    }

    #[inline]
    pub fn le(self, a: f64, b: f64) -> bool {
        a <= b + self.eps()
    }

    #[inline]
    pub fn lt(self, a: f64, b: f64) -> bool {
        a < b - self.eps()
    }

    #[inline]
    pub fn eq(self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.eps()
    }
}

/// A finite point set `0..n` with an `n × n` distance matrix.
///
/// Construction checks shape and value sanity only; the metric axioms are
/// checked by [`validate_metric`], which is how an invalid matrix gets a
/// useful report instead of a bare error.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpace {
    n: usize,
    dist: Vec<f64>,
    arithmetic: Arithmetic,
}

impl MetricSpace {
    pub fn from_rows(rows: Vec<Vec<f64>>, arithmetic: Arithmetic) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        let mut dist = Vec::with_capacity(n * n);
        for (a, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {a} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (b, d) in row.into_iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({a}, {b}) = {d} is not a finite nonnegative number"
                    )));
                }
                if arithmetic.is_exact() && (d.fract() != 0.0 || d > MAX_EXACT) {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({a}, {b}) = {d} is not an exact integer"
                    )));
                }
                dist.push(d);
            }
        }
        Ok(MetricSpace { n, dist, arithmetic })
    }

    pub fn from_int_rows(rows: Vec<Vec<u64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|d| d as f64).collect())
            .collect();
        Self::from_rows(rows, Arithmetic::Exact)
    }

    /// Every pair of distinct points at distance 1.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        let dist = (0..n * n)
            .map(|i| if i / n == i % n { 0.0 } else { 1.0 })
            .collect();
        Ok(MetricSpace {
            n,
            dist,
            arithmetic: Arithmetic::Exact,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.dist[a * self.n..(a + 1) * self.n]
    }

    pub fn arithmetic(&self) -> Arithmetic {
        self.arithmetic
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Sorted distinct off-diagonal distances.
    pub fn distinct_distances(&self) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.n)
            .flat_map(|a| (a + 1..self.n).map(move |b| (a, b)))
            .map(|(a, b)| self.d(a, b))
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn check_point(&self, p: usize) -> Result<()> {
        if p < self.n {
            Ok(())
        } else {
            Err(Error::PointOutOfRange { point: p, n: self.n })
        }
    }
}

/// Undirected graph with positive integer edge weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize, u64)>,
}

impl WeightedGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize, u64)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::EmptyInstance);
        }
        for &(u, v, w) in &edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{vertex_count}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if w == 0 {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has weight 0")));
            }
        }
        Ok(WeightedGraph {
            vertex_count,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }

    fn adjacency(&self) -> Vec<Vec<(usize, u64)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v, w) in &self.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        adj
    }
}

/// Shortest-path completion of `g`, in exact arithmetic.
///
/// One Dijkstra per source; the graphs we build are sparse.
pub fn metric_from_graph(g: &WeightedGraph) -> Result<MetricSpace> {
    let n = g.vertex_count;
    let adj = g.adjacency();
    let mut dist = vec![0.0; n * n];
    let mut best = vec![u64::MAX; n];
    let mut heap = BinaryHeap::new();
    for src in 0..n {
        best.fill(u64::MAX);
        best[src] = 0;
        heap.push(Reverse((0u64, src)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > best[u] {
                continue;
            }
            for &(v, w) in &adj[u] {
                let nd = d + w;
                if nd < best[v] {
                    best[v] = nd;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        for (v, &d) in best.iter().enumerate() {
            if d == u64::MAX {
                return Err(Error::Disconnected(src, v));
            }
            dist[src * n + v] = d as f64;
        }
    }
    Ok(MetricSpace {
        n,
        dist,
        arithmetic: Arithmetic::Exact,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "axiom", rename_all = "kebab-case")]
pub enum Violation {
    /// `d(a, a) != 0`
    Identity { a: usize, value: f64 },
    /// `d(a, b) != d(b, a)`
    Symmetry { a: usize, b: usize },
    /// `d(a, b) == 0` for `a != b`
    Separation { a: usize, b: usize },
    /// `d(a, c) > d(a, b) + d(b, c)`
    Triangle { a: usize, b: usize, c: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every metric axiom and lists each violation with its witness.
pub fn validate_metric(m: &MetricSpace) -> ValidationReport {
    let n = m.len();
    let ar = m.arithmetic();
    let mut violations = Vec::new();
    for a in 0..n {
        if !ar.eq(m.d(a, a), 0.0) {
            violations.push(Violation::Identity { a, value: m.d(a, a) });
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if !ar.eq(m.d(a, b), m.d(b, a)) {
                violations.push(Violation::Symmetry { a, b });
            }
            if ar.le(m.d(a, b), 0.0) || ar.le(m.d(b, a), 0.0) {
                violations.push(Violation::Separation { a, b });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            let ab = m.d(a, b);
            for c in 0..n {
                if ar.lt(ab + m.d(b, c), m.d(a, c)) {
                    violations.push(Violation::Triangle { a, b, c });
                }
            }
        }
    }
    ValidationReport { violations }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RandomKind {
    /// Uniform points in `[0, side)^dim` with Euclidean distances.
    Euclidean { dim: usize, side: f64 },
    /// Random spanning tree plus independent extra edges, integer weights
    /// drawn from `1..=max_weight`.
    RandomGraph { edge_prob: f64, max_weight: u64 },
}

impl RandomKind {
    pub fn euclidean() -> Self {
        RandomKind::Euclidean { dim: 2, side: 100.0 }
    }

    pub fn random_graph() -> Self {
        RandomKind::RandomGraph {
            edge_prob: 0.3,
            max_weight: 10,
        }
    }
}

pub fn random_metric(kind: RandomKind, n: usize, seed: u64) -> Result<MetricSpace> {
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        RandomKind::Euclidean { dim, side } => {
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.random::<f64>() * side).collect())
                .collect();
            let rows = pts
                .iter()
                .map(|p| {
                    pts.iter()
                        .map(|q| {
                            p.iter()
                                .zip(q)
                                .map(|(x, y)| (x - y) * (x - y))
                                .sum::<f64>()
                                .sqrt()
                        })
                        .collect()
                })
                .collect();
            MetricSpace::from_rows(rows, Arithmetic::float())
        }
        RandomKind::RandomGraph {
            edge_prob,
            max_weight,
        } => {
            let g = random_graph(&mut rng, n, edge_prob, max_weight.max(1))?;
            metric_from_graph(&g)
        }
    }
}

fn random_graph(rng: &mut impl Rng, n: usize, edge_prob: f64, max_weight: u64) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push((u, v, rng.random_range(1..=max_weight)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(edge_prob.clamp(0.0, 1.0)) {
                edges.push((u, v, rng.random_range(1..=max_weight)));
            }
        }
    }
    WeightedGraph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_abc() -> WeightedGraph {
        WeightedGraph::new(3, vec![(0, 1, 1), (1, 2, 2)]).unwrap()
    }

    #[test]
    fn path_distances_add_up() {
        let m = metric_from_graph(&path_abc()).unwrap();
        assert_eq!(m.d(0, 2), 3.0);
        assert_eq!(m.d(2, 0), 3.0);
        assert!(validate_metric(&m).is_valid());
    }

    #[test]
    fn star_leaves_are_two_apart() {
        let g = WeightedGraph::new(4, vec![(0, 1, 1), (0, 2, 1), (0, 3, 1)]).unwrap();
        let m = metric_from_graph(&g).unwrap();
        for a in 1..4 {
            for b in 1..4 {
                if a != b {
                    assert_eq!(m.d(a, b), 2.0);
                }
            }
        }
    }

    #[test]
    fn disconnected_graph_names_a_pair() {
        let g = WeightedGraph::new(4, vec![(0, 1, 1), (2, 3, 1)]).unwrap();
        match metric_from_graph(&g) {
            Err(Error::Disconnected(0, v)) => assert!(v == 2 || v == 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn graph_rejects_self_loops_and_zero_weights() {
        assert!(WeightedGraph::new(2, vec![(1, 1, 1)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 1, 0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 2, 1)]).is_err());
    }

    #[test]
    fn asymmetric_matrix_reports_symmetry() {
        let m = MetricSpace::from_int_rows(vec![vec![0, 1], vec![2, 0]]).unwrap();
        let r = validate_metric(&m);
        assert!(r.violations.contains(&Violation::Symmetry { a: 0, b: 1 }));
    }

    #[test]
    fn long_side_reports_triangle() {
        let m = MetricSpace::from_int_rows(vec![vec![0, 1, 10], vec![1, 0, 1], vec![10, 1, 0]])
            .unwrap();
        let r = validate_metric(&m);
        assert!(r.violations.contains(&Violation::Triangle { a: 0, b: 1, c: 2 }));
    }

    #[test]
    fn exact_mode_rejects_fractions() {
        let rows = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        assert!(MetricSpace::from_rows(rows.clone(), Arithmetic::Exact).is_err());
        assert!(MetricSpace::from_rows(rows, Arithmetic::float()).is_ok());
    }

    #[test]
    fn random_single_point() {
        let m = random_metric(RandomKind::euclidean(), 1, 42).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.d(0, 0), 0.0);
        assert!(matches!(
            random_metric(RandomKind::euclidean(), 0, 1),
            Err(Error::EmptyInstance)
        ));
    }

    #[test]
    fn random_is_deterministic() {
        for kind in [RandomKind::euclidean(), RandomKind::random_graph()] {
            let a = random_metric(kind, 9, 3).unwrap();
            let b = random_metric(kind, 9, 3).unwrap();
            assert_eq!(a, b);
        }
        assert!(!random_metric(RandomKind::euclidean(), 3, 1).unwrap().arithmetic().is_exact());
        assert!(random_metric(RandomKind::random_graph(), 3, 1).unwrap().arithmetic().is_exact());
    }

    #[test]
    fn random_graph_n8_seed7_is_valid() {
        let m = random_metric(RandomKind::random_graph(), 8, 7).unwrap();
        assert!(validate_metric(&m).is_valid());
    }
}
