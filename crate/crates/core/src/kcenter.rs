//! k-center cost model, the reverse greedy engine and the farthest-first
//! baseline.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Arithmetic, MetricSpace};

/// A set of facilities, kept sorted and duplicate free.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FacilitySet(Vec<usize>);

impl FacilitySet {
    pub fn new(members: impl IntoIterator<Item = usize>, m: &MetricSpace) -> Result<Self> {
        let mut v: Vec<usize> = members.into_iter().collect();
        for &p in &v {
            m.check_point(p)?;
        }
        v.sort_unstable();
        v.dedup();
        Ok(FacilitySet(v))
    }

    /// Every point of an `n`-point space.
    pub fn all(n: usize) -> Self {
        FacilitySet((0..n).collect())
    }

    pub(crate) fn from_sorted(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        FacilitySet(v)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.0.binary_search(&p).is_ok()
    }

    pub fn without(&self, p: usize) -> Self {
        FacilitySet(self.0.iter().copied().filter(|&q| q != p).collect())
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// `d(c, F)` for a nonempty member list.
fn dist_to_set(m: &MetricSpace, members: &[usize], c: usize) -> f64 {
    members
        .iter()
        .map(|&f| m.d(c, f))
        .fold(f64::INFINITY, f64::min)
}

pub fn cost(m: &MetricSpace, f: &FacilitySet) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::EmptyFacilitySet);
    }
    Ok(cost_of(m, f.members()))
}

pub(crate) fn cost_of(m: &MetricSpace, members: &[usize]) -> f64 {
    (0..m.len())
        .map(|c| dist_to_set(m, members, c))
        .fold(0.0, f64::max)
}

/// Nearest facility to `c`; equidistant facilities resolve to the lowest index.
pub fn serves(m: &MetricSpace, f: &FacilitySet, c: usize) -> Result<usize> {
    m.check_point(c)?;
    let mut best: Option<(usize, f64)> = None;
    for &g in f.members() {
        let d = m.d(c, g);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((g, d));
        }
    }
    best.map(|(g, _)| g).ok_or(Error::EmptyFacilitySet)
}

/// `cost(F \ {g})` for every `g ∈ F`, in member order.
pub fn marginal_costs(m: &MetricSpace, f: &FacilitySet) -> Result<Vec<(usize, f64)>> {
    if f.len() <= 1 {
        return Err(Error::TooFewFacilities(f.len()));
    }
    let costs = marginals_of(m, f.members());
    Ok(f.members().iter().copied().zip(costs).collect())
}

/// Marginal costs from per-client (nearest, second nearest) tables.
///
/// For client `c` with nearest facility `a(c)` at `d1(c)` and runner-up at
/// `d2(c)`, removing `g` leaves `c` at `d2(c)` if `a(c) = g` and at `d1(c)`
/// otherwise. So `cost(F \ {g})` is the larger of the worst `d2` among
/// clients of `g` and the worst `d1` among everybody else's clients.
fn marginals_of(m: &MetricSpace, members: &[usize]) -> Vec<f64> {
    let k = members.len();
    debug_assert!(k >= 2);
    let mut own_max = vec![0.0f64; k];
    let mut without_max = vec![0.0f64; k];
    for c in 0..m.len() {
        let row = m.row(c);
        let (mut i1, mut d1, mut d2) = (0usize, f64::INFINITY, f64::INFINITY);
        for (i, &g) in members.iter().enumerate() {
            let d = row[g];
            if d < d1 {
                d2 = d1;
                d1 = d;
                i1 = i;
            } else if d < d2 {
                d2 = d;
            }
        }
        own_max[i1] = own_max[i1].max(d1);
        without_max[i1] = without_max[i1].max(d2);
    }
    // top two of own_max, so "max over the other groups" is O(1) per facility
    let (mut top, mut top_i, mut second) = (f64::NEG_INFINITY, usize::MAX, f64::NEG_INFINITY);
    for (i, &v) in own_max.iter().enumerate() {
        if v > top {
            second = top;
            top = v;
            top_i = i;
        } else if v > second {
            second = v;
        }
    }
    (0..k)
        .map(|i| {
            let others = if i == top_i { second } else { top };
            others.max(without_max[i])
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Remove the lowest-index facility of the argmin set.
    #[default]
    LowestIndex,
    /// Pick uniformly from the argmin set with a seeded generator.
    SeededRandom { seed: u64 },
    /// Follow a fixed removal sequence; each entry must be in the argmin set
    /// when its turn comes.
    Scripted { sequence: Vec<usize> },
}


#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub removed: usize,
    /// `cost(F_i)` after the removal.
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmin: Option<Vec<usize>>,
}

/// A full reverse greedy run `F_0 = C ⊇ F_1 ⊇ … ⊇ F_{n-k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub n: usize,
    pub k: usize,
    pub arithmetic: Arithmetic,
    pub policy: TiePolicy,
    pub steps: Vec<Step>,
    pub final_set: FacilitySet,
}

impl Trace {
    /// `cost(F_0), cost(F_1), …, cost(F_{n-k})`.
    pub fn costs(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.steps.iter().map(|s| s.cost))
            .collect()
    }

    pub fn final_cost(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cost)
    }

    /// `F_i`, rebuilt by replaying the first `i` removals.
    pub fn set_at(&self, i: usize) -> FacilitySet {
        let mut alive = vec![true; self.n];
        for s in &self.steps[..i] {
            alive[s.removed] = false;
        }
        FacilitySet::from_sorted((0..self.n).filter(|&p| alive[p]).collect())
    }

    pub fn removals(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.removed).collect()
    }
}

/// Mutable state of one reverse greedy run.
///
/// Used directly by verifiers that need to inspect every step.
pub struct GreedyState<'a> {
    metric: &'a MetricSpace,
    members: Vec<usize>,
    cost: f64,
}

impl<'a> GreedyState<'a> {
    pub fn new(metric: &'a MetricSpace) -> Self {
        GreedyState {
            metric,
            members: (0..metric.len()).collect(),
            cost: 0.0,
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn contains(&self, p: usize) -> bool {
        self.members.binary_search(&p).is_ok()
    }

    /// Marginal costs in member order; needs at least two members.
    pub fn marginals(&self) -> Vec<f64> {
        marginals_of(self.metric, &self.members)
    }

    /// Removes `p`, recording `new_cost` as the cost of the resulting set.
    fn remove_with_cost(&mut self, p: usize, new_cost: f64) {
        let pos = self.members.binary_search(&p).expect("facility present");
        self.members.remove(pos);
        self.cost = new_cost;
    }

    /// Removes `p` and recomputes the cost from scratch.
    pub fn remove(&mut self, p: usize) -> Result<f64> {
        let pos = self
            .members
            .binary_search(&p)
            .map_err(|_| Error::InvalidScript(format!("facility {p} is not in the current set")))?;
        if self.members.len() == 1 {
            return Err(Error::EmptyFacilitySet);
        }
        self.members.remove(pos);
        self.cost = cost_of(self.metric, &self.members);
        Ok(self.cost)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyOptions {
    /// Store the argmin set of every step in the trace.
    pub record_argmin: bool,
}

pub fn reverse_greedy(m: &MetricSpace, k: usize, policy: TiePolicy) -> Result<Trace> {
    reverse_greedy_with(m, k, policy, GreedyOptions::default())
}

pub fn reverse_greedy_with(
    m: &MetricSpace,
    k: usize,
    policy: TiePolicy,
    opts: GreedyOptions,
) -> Result<Trace> {
    let n = m.len();
    check_k(k, n)?;
    if let TiePolicy::Scripted { sequence } = &policy {
        check_script(sequence, n, k)?;
    }
    let ar = m.arithmetic();
    let mut rng = match &policy {
        TiePolicy::SeededRandom { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let mut state = GreedyState::new(m);
    let mut steps = Vec::with_capacity(n - k);
    for i in 0..n - k {
        let marg = state.marginals();
        let min = marg.iter().copied().fold(f64::INFINITY, f64::min);
        let argmin: Vec<usize> = state
            .members
            .iter()
            .zip(&marg)
            .filter(|&(_, &c)| ar.le(c, min))
            .map(|(&g, _)| g)
            .collect();
        let chosen = match &policy {
            TiePolicy::LowestIndex => argmin[0],
            TiePolicy::SeededRandom { .. } => {
                *argmin.choose(rng.as_mut().expect("rng")).expect("nonempty argmin")
            }
            TiePolicy::Scripted { sequence } => {
                let p = sequence[i];
                let pos = state.members.binary_search(&p).map_err(|_| {
                    Error::InvalidScript(format!("step {}: facility {p} already removed", i + 1))
                })?;
                if !ar.le(marg[pos], min) {
                    return Err(Error::IllegalScriptedStep {
                        step: i + 1,
                        facility: p,
                        cost: marg[pos],
                        min,
                    });
                }
                p
            }
        };
        let pos = state.members.binary_search(&chosen).expect("member");
        let new_cost = marg[pos];
        state.remove_with_cost(chosen, new_cost);
        steps.push(Step {
            removed: chosen,
            cost: new_cost,
            argmin: opts.record_argmin.then_some(argmin),
        });
    }
    Ok(Trace {
        n,
        k,
        arithmetic: ar,
        policy,
        steps,
        final_set: FacilitySet::from_sorted(state.members),
    })
}

/// Applies a removal script without legality checks and returns the final
/// set and its cost. For large instances where the full run is too slow.
pub fn apply_script(m: &MetricSpace, k: usize, script: &[usize]) -> Result<(FacilitySet, f64)> {
    let n = m.len();
    check_k(k, n)?;
    check_script(script, n, k)?;
    let mut alive = vec![true; n];
    for &p in script {
        alive[p] = false;
    }
    let set = FacilitySet::from_sorted((0..n).filter(|&p| alive[p]).collect());
    let c = cost_of(m, set.members());
    Ok((set, c))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 1 || k > n {
        Err(Error::InvalidK { k, n })
    } else {
        Ok(())
    }
}

fn check_script(seq: &[usize], n: usize, k: usize) -> Result<()> {
    if seq.len() != n - k {
        return Err(Error::InvalidScript(format!(
            "sequence has {} entries, expected n - k = {}",
            seq.len(),
            n - k
        )));
    }
    let mut seen = vec![false; n];
    for &p in seq {
        if p >= n {
            return Err(Error::PointOutOfRange { point: p, n });
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidScript(format!("facility {p} appears twice")));
        }
    }
    Ok(())
}

/// Farthest-first traversal from `first`; ties go to the lowest index.
pub fn greedy_farthest_first(m: &MetricSpace, k: usize, first: usize) -> Result<FacilitySet> {
    let n = m.len();
    check_k(k, n)?;
    m.check_point(first)?;
    let mut chosen = vec![first];
    let mut gap: Vec<f64> = m.row(first).to_vec();
    while chosen.len() < k {
        let mut next = 0;
        for p in 1..n {
            if gap[p] > gap[next] {
                next = p;
            }
        }
        chosen.push(next);
        for (p, g) in gap.iter_mut().enumerate() {
            *g = g.min(m.d(p, next));
        }
    }
    FacilitySet::new(chosen, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{metric_from_graph, WeightedGraph};

    fn two_points(d: u64) -> MetricSpace {
        MetricSpace::from_int_rows(vec![vec![0, d], vec![d, 0]]).unwrap()
    }

    fn brute_marginals(m: &MetricSpace, f: &FacilitySet) -> Vec<(usize, f64)> {
        f.members()
            .iter()
            .map(|&g| (g, cost(m, &f.without(g)).unwrap()))
            .collect()
    }

    #[test]
    fn cost_of_everything_is_zero() {
        let m = MetricSpace::uniform(5).unwrap();
        assert_eq!(cost(&m, &FacilitySet::all(5)).unwrap(), 0.0);
    }

    #[test]
    fn cost_two_points() {
        let m = two_points(5);
        assert_eq!(cost(&m, &FacilitySet::new([1], &m).unwrap()).unwrap(), 5.0);
    }

    #[test]
    fn cost_of_empty_set_is_an_error() {
        let m = two_points(5);
        let e = cost(&m, &FacilitySet::new([], &m).unwrap()).unwrap_err();
        assert_eq!(e.to_string(), "cost undefined for empty facility set");
        assert!(serves(&m, &FacilitySet::new([], &m).unwrap(), 0).is_err());
    }

    #[test]
    fn serves_prefers_self_then_lowest_index() {
        let m = MetricSpace::uniform(8).unwrap();
        let f = FacilitySet::new([3, 7], &m).unwrap();
        assert_eq!(serves(&m, &f, 7).unwrap(), 7);
        assert_eq!(serves(&m, &f, 0).unwrap(), 3);
    }

    #[test]
    fn marginals_uniform_and_pair() {
        let m = MetricSpace::uniform(6).unwrap();
        for (_, c) in marginal_costs(&m, &FacilitySet::all(6)).unwrap() {
            assert_eq!(c, 1.0);
        }
        let m = two_points(5);
        assert_eq!(
            marginal_costs(&m, &FacilitySet::all(2)).unwrap(),
            vec![(0, 5.0), (1, 5.0)]
        );
        assert!(matches!(
            marginal_costs(&m, &FacilitySet::new([0], &m).unwrap()),
            Err(Error::TooFewFacilities(1))
        ));
    }

    #[test]
    fn marginals_match_direct_evaluation() {
        let g = WeightedGraph::new(
            6,
            vec![(0, 1, 2), (1, 2, 1), (2, 3, 4), (3, 4, 1), (4, 5, 3), (5, 0, 2), (1, 4, 5)],
        )
        .unwrap();
        let m = metric_from_graph(&g).unwrap();
        for f in [vec![0, 1, 2, 3, 4, 5], vec![0, 3], vec![1, 2, 5], vec![0, 2, 4]] {
            let f = FacilitySet::new(f, &m).unwrap();
            assert_eq!(marginal_costs(&m, &f).unwrap(), brute_marginals(&m, &f));
        }
    }

    #[test]
    fn k_equals_n_is_a_no_op() {
        let m = MetricSpace::uniform(4).unwrap();
        let t = reverse_greedy(&m, 4, TiePolicy::LowestIndex).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.final_cost(), 0.0);
        assert_eq!(t.final_set, FacilitySet::all(4));
    }

    #[test]
    fn uniform_final_cost_is_one_for_any_policy() {
        let m = MetricSpace::uniform(7).unwrap();
        for k in 1..7 {
            for policy in [TiePolicy::LowestIndex, TiePolicy::SeededRandom { seed: k as u64 }] {
                let t = reverse_greedy(&m, k, policy).unwrap();
                assert_eq!(t.final_cost(), 1.0);
                assert_eq!(t.final_set.len(), k);
            }
        }
    }

    #[test]
    fn k_out_of_range() {
        let m = MetricSpace::uniform(3).unwrap();
        assert!(matches!(reverse_greedy(&m, 0, TiePolicy::LowestIndex), Err(Error::InvalidK { .. })));
        assert!(matches!(reverse_greedy(&m, 4, TiePolicy::LowestIndex), Err(Error::InvalidK { .. })));
        assert!(greedy_farthest_first(&m, 4, 0).is_err());
    }

    #[test]
    fn illegal_script_is_reported() {
        // path 0 -1- 1 -1- 2 -5- 3: removing 3 first costs 5, the minimum is 1
        let g = WeightedGraph::new(4, vec![(0, 1, 1), (1, 2, 1), (2, 3, 5)]).unwrap();
        let m = metric_from_graph(&g).unwrap();
        let err = reverse_greedy(&m, 2, TiePolicy::Scripted { sequence: vec![3, 0] }).unwrap_err();
        assert_eq!(
            err.to_string(),
            "illegal scripted step 1: facility 3 has marginal cost 5 > minimum 1"
        );
        let err = reverse_greedy(&m, 2, TiePolicy::Scripted { sequence: vec![0] }).unwrap_err();
        assert!(matches!(err, Error::InvalidScript(_)));
        let err = reverse_greedy(&m, 2, TiePolicy::Scripted { sequence: vec![0, 0] }).unwrap_err();
        assert!(matches!(err, Error::InvalidScript(_)));
    }

    #[test]
    fn trace_bookkeeping() {
        let g = WeightedGraph::new(4, vec![(0, 1, 1), (1, 2, 1), (2, 3, 5)]).unwrap();
        let m = metric_from_graph(&g).unwrap();
        let t = reverse_greedy_with(&m, 1, TiePolicy::LowestIndex, GreedyOptions { record_argmin: true })
            .unwrap();
        assert_eq!(t.steps.len(), 3);
        assert_eq!(t.set_at(3), t.final_set);
        for (i, s) in t.steps.iter().enumerate() {
            assert!(t.set_at(i).contains(s.removed));
            assert!(s.argmin.as_ref().unwrap().contains(&s.removed));
            assert_eq!(cost(&m, &t.set_at(i + 1)).unwrap(), s.cost);
        }
        let (set, c) = apply_script(&m, 1, &t.removals()).unwrap();
        assert_eq!(set, t.final_set);
        assert_eq!(c, t.final_cost());
    }

    #[test]
    fn farthest_first_small_cases() {
        let g = WeightedGraph::new(3, vec![(0, 1, 1), (1, 2, 1)]).unwrap();
        let m = metric_from_graph(&g).unwrap();
        assert_eq!(greedy_farthest_first(&m, 1, 1).unwrap().members(), &[1]);
        assert_eq!(greedy_farthest_first(&m, 2, 0).unwrap().members(), &[0, 2]);
    }
}
