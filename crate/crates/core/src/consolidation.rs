//! Consolidations, the consolidation number Γ, critical iterations of a
//! reverse greedy trace, and the check that Γ drops between consecutive
//! critical states.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::OptimalSolution;
use crate::kcenter::{FacilitySet, Trace};
use crate::metric::MetricSpace;

/// Everything a consolidation is judged against.
#[derive(Clone, Copy, Debug)]
pub struct ConsolidationContext<'a> {
    pub metric: &'a MetricSpace,
    pub opt_value: f64,
    pub balls: &'a [Vec<usize>],
    pub facilities: &'a FacilitySet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ConsolidationReport {
    Valid,
    /// A facility lies in no set.
    Covering { facility: usize },
    /// Set `set` holds two points farther apart than `2·OPT`.
    Diameter { set: usize, x: usize, y: usize },
    /// Facilities `f`, `g` share ball `ball` but no set.
    OptimalPairs { ball: usize, f: usize, g: usize },
}

impl ConsolidationReport {
    pub fn is_valid(&self) -> bool {
        matches!(self, ConsolidationReport::Valid)
    }
}

/// Same-ball facility pairs that must share a set.
fn required_pairs(ctx: &ConsolidationContext<'_>) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (t, ball) in ctx.balls.iter().enumerate() {
        let inside: Vec<usize> = ball
            .iter()
            .copied()
            .filter(|&p| ctx.facilities.contains(p))
            .collect();
        for (i, &f) in inside.iter().enumerate() {
            for &g in &inside[i + 1..] {
                out.push((t, f, g));
            }
        }
    }
    out
}

/// Checks Covering, Diameter and Optimal Pairs in that order and reports the
/// first violation.
pub fn is_consolidation(ctx: &ConsolidationContext<'_>, sets: &[Vec<usize>]) -> ConsolidationReport {
    for &f in ctx.facilities.members() {
        if !sets.iter().any(|s| s.contains(&f)) {
            return ConsolidationReport::Covering { facility: f };
        }
    }
    let ar = ctx.metric.arithmetic();
    let limit = 2.0 * ctx.opt_value;
    for (i, s) in sets.iter().enumerate() {
        for (a, &x) in s.iter().enumerate() {
            for &y in &s[a + 1..] {
                if !ar.le(ctx.metric.d(x, y), limit) {
                    return ConsolidationReport::Diameter { set: i, x, y };
                }
            }
        }
    }
    for (ball, f, g) in required_pairs(ctx) {
        if !sets.iter().any(|s| s.contains(&f) && s.contains(&g)) {
            return ConsolidationReport::OptimalPairs { ball, f, g };
        }
    }
    ConsolidationReport::Valid
}

#[derive(Clone, Copy, Debug)]
pub struct GammaConfig {
    /// Largest instance Γ is computed on.
    pub max_points: usize,
    /// Largest number of maximal cliques in the threshold graph.
    pub max_cliques: usize,
    /// Search-node budget for the cover search.
    pub node_budget: u64,
}

impl Default for GammaConfig {
    fn default() -> Self {
        GammaConfig {
            max_points: 40,
            max_cliques: 100_000,
            node_budget: 50_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaResult {
    pub value: usize,
    /// A minimum consolidation made of maximal cliques.
    pub witness: Vec<Vec<usize>>,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn and_not(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & !b).collect())
    }
    fn or(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a | b).collect())
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    fn is_subset(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

/// Adjacency rows of the threshold graph: `x ~ y` iff `d(x, y) ≤ 2·OPT`.
fn threshold_graph(m: &MetricSpace, opt_value: f64) -> Vec<Bits> {
    let n = m.len();
    let ar = m.arithmetic();
    (0..n)
        .map(|x| {
            let mut row = Bits::new(n);
            for y in 0..n {
                if y != x && ar.le(m.d(x, y), 2.0 * opt_value) {
                    row.set(y);
                }
            }
            row
        })
        .collect()
}

/// Bron–Kerbosch with Tomita pivoting. Fails once more than `cap` maximal
/// cliques exist.
fn maximal_cliques(adj: &[Bits], cap: usize) -> Option<Vec<Bits>> {
    fn expand(adj: &[Bits], r: &mut Bits, p: Bits, x: Bits, out: &mut Vec<Bits>, cap: usize) -> bool {
        if p.is_empty() && x.is_empty() {
            out.push(r.clone());
            return out.len() <= cap;
        }
        let pivot = p
            .or(&x)
            .iter()
            .max_by_key(|&u| p.and(&adj[u]).count())
            .expect("p or x nonempty");
        let mut p = p;
        let mut x = x;
        for v in p.and_not(&adj[pivot]).iter().collect::<Vec<_>>() {
            let mut r2 = r.clone();
            r2.set(v);
            if !expand(adj, &mut r2, p.and(&adj[v]), x.and(&adj[v]), out, cap) {
                return false;
            }
            let mut vb = Bits::new(adj.len());
            vb.set(v);
            p = p.and_not(&vb);
            x = x.or(&vb);
        }
        true
    }
    let n = adj.len();
    let mut all = Bits::new(n);
    (0..n).for_each(|i| all.set(i));
    let mut out = Vec::new();
    expand(adj, &mut Bits::new(n), all, Bits::new(n), &mut out, cap).then_some(out)
}

/// Exact consolidation number `Γ(F)`.
///
/// The search only considers maximal cliques of the threshold graph
/// (`d ≤ 2·OPT`). A set has diameter at most `2·OPT` exactly when it is a
/// clique there, and enlarging any set of a consolidation to a maximal
/// clique containing it keeps Covering and Optimal Pairs (they only ask for
/// membership) and keeps Diameter (still a clique). So some minimum
/// consolidation uses maximal cliques only, and the clique-restricted
/// minimum equals the unrestricted one.
///
/// Cover sizes `1, 2, …` are tried in turn, each by a depth-bounded search
/// that branches over the cliques satisfying one still-open requirement
/// (an uncovered facility, or a same-ball facility pair with no common set).
pub fn gamma(m: &MetricSpace, opt: &OptimalSolution, f: &FacilitySet, cfg: &GammaConfig) -> Result<GammaResult> {
    if f.is_empty() {
        return Err(Error::EmptyFacilitySet);
    }
    let n = m.len();
    if n > cfg.max_points {
        return Err(Error::GammaInfeasible { lower_bound: 1 });
    }
    let adj = threshold_graph(m, opt.opt_value);
    let cliques = maximal_cliques(&adj, cfg.max_cliques).ok_or(Error::GammaInfeasible { lower_bound: 1 })?;

    let ctx = ConsolidationContext {
        metric: m,
        opt_value: opt.opt_value,
        balls: &opt.balls,
        facilities: f,
    };
    let mut fmask = Bits::new(n);
    f.members().iter().for_each(|&p| fmask.set(p));
    let pairs: Vec<(usize, usize)> = required_pairs(&ctx).into_iter().map(|(_, a, b)| (a, b)).collect();

    // Only the facility part of a clique matters for the requirements; drop
    // cliques whose facility part is contained in another's.
    let mut parts: Vec<(Bits, usize)> = cliques
        .iter()
        .enumerate()
        .map(|(i, c)| (c.and(&fmask), i))
        .filter(|(b, _)| !b.is_empty())
        .collect();
    parts.sort_by(|a, b| b.0.count().cmp(&a.0.count()).then(a.0.cmp(&b.0)));
    let mut kept: Vec<(Bits, usize)> = Vec::new();
    for (b, i) in parts {
        if !kept.iter().any(|(k, _)| b.is_subset(k)) {
            kept.push((b, i));
        }
    }

    let mut search = CoverSearch {
        parts: kept.iter().map(|(b, _)| b.clone()).collect(),
        facilities: f.members().to_vec(),
        pairs,
        nodes: 0,
        budget: cfg.node_budget,
    };
    let mut chosen = Vec::new();
    for size in 1..=search.parts.len() {
        match search.run(&mut chosen, size) {
            Ok(true) => {
                let witness = chosen.iter().map(|&j| cliques[kept[j].1].iter().collect()).collect();
                return Ok(GammaResult { value: size, witness });
            }
            Ok(false) => {}
            Err(()) => return Err(Error::GammaInfeasible { lower_bound: size }),
        }
    }
    unreachable!("the whole clique list is a consolidation")
}

struct CoverSearch {
    parts: Vec<Bits>,
    facilities: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    nodes: u64,
    budget: u64,
}

impl CoverSearch {
    /// Candidate parts for the open requirement with the fewest options, or
    /// `None` when every requirement is met.
    fn open_requirement(&self, chosen: &[usize]) -> Option<Vec<usize>> {
        let mut best: Option<Vec<usize>> = None;
        let mut consider = |cands: Vec<usize>| {
            if best.as_ref().is_none_or(|b| cands.len() < b.len()) {
                best = Some(cands);
            }
        };
        for &f in &self.facilities {
            if !chosen.iter().any(|&j| self.parts[j].get(f)) {
                consider((0..self.parts.len()).filter(|&j| self.parts[j].get(f)).collect());
            }
        }
        for &(a, b) in &self.pairs {
            let both = |j: usize| self.parts[j].get(a) && self.parts[j].get(b);
            if !chosen.iter().any(|&j| both(j)) {
                consider((0..self.parts.len()).filter(|&j| both(j)).collect());
            }
        }
        best
    }

    fn run(&mut self, chosen: &mut Vec<usize>, size: usize) -> Result<bool, ()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(());
        }
        let Some(cands) = self.open_requirement(chosen) else {
            return Ok(true);
        };
        if chosen.len() == size {
            return Ok(false);
        }
        for j in cands {
            chosen.push(j);
            if self.run(chosen, size)? {
                return Ok(true);
            }
            chosen.pop();
        }
        Ok(false)
    }
}

/// `l → c_l`: the step `i` with `cost(F_i) ≤ 2l·OPT < cost(F_{i+1})`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CriticalIndexMap(pub BTreeMap<usize, usize>);

impl CriticalIndexMap {
    pub fn get(&self, l: usize) -> Option<usize> {
        self.0.get(&l).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest `l` with `c_l` defined.
    pub fn l_bar(&self) -> Option<usize> {
        self.0.keys().next_back().copied()
    }
}

pub fn critical_indices(trace: &Trace, opt_value: f64) -> CriticalIndexMap {
    critical_indices_of(&trace.costs(), opt_value, trace.arithmetic)
}

/// Same as [`critical_indices`] on a bare cost sequence `cost(F_0), …`.
pub fn critical_indices_of(costs: &[f64], opt_value: f64, ar: crate::metric::Arithmetic) -> CriticalIndexMap {
    let mut map = BTreeMap::new();
    if opt_value <= 0.0 {
        return CriticalIndexMap(map);
    }
    let max = costs.iter().copied().fold(0.0, f64::max);
    let mut l = 0usize;
    loop {
        let threshold = 2.0 * l as f64 * opt_value;
        if !ar.lt(threshold, max) {
            break;
        }
        if let Some(i) = costs
            .windows(2)
            .position(|w| ar.le(w[0], threshold) && ar.lt(threshold, w[1]))
        {
            map.insert(l, i);
        }
        l += 1;
    }
    CriticalIndexMap(map)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Premise {
    pub holds: bool,
    /// Ball index and two final facilities inside it, when the premise holds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(usize, usize, usize)>,
}

/// `∃ t : |O_t ∩ F| ≥ 2`
pub fn premise(opt: &OptimalSolution, final_set: &FacilitySet) -> Premise {
    for (t, ball) in opt.balls.iter().enumerate() {
        let mut inside = ball.iter().copied().filter(|&p| final_set.contains(p));
        if let (Some(a), Some(b)) = (inside.next(), inside.next()) {
            return Premise {
                holds: true,
                witness: Some((t, a, b)),
            };
        }
    }
    Premise {
        holds: false,
        witness: None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalGamma {
    pub l: usize,
    pub step: usize,
    /// `None` when Γ could not be computed within the caps.
    pub gamma: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Accounting {
    pub l_bar: usize,
    pub gamma_first: usize,
    pub gamma_last: usize,
    /// `l̄ ≤ Γ(F_{c_0}) − Γ(F_{c_l̄}) ≤ k − 1`
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaVerdict {
    Pass,
    Fail,
    PremiseNotApplicable,
    NoCriticalStates,
    Incomplete,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaDecrementReport {
    pub verdict: GammaVerdict,
    pub premise: Premise,
    pub critical: CriticalIndexMap,
    pub gamma_sequence: Vec<CriticalGamma>,
    /// Consecutive `(l, l+1)` pairs where Γ failed to drop.
    pub violations: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decrement_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accounting: Option<Accounting>,
}

/// Checks that Γ strictly drops between consecutive critical states of
/// `trace`, and the resulting accounting bound, for the supplied optimum.
pub fn verify_gamma_decrement(
    m: &MetricSpace,
    trace: &Trace,
    opt: &OptimalSolution,
    cfg: &GammaConfig,
) -> GammaDecrementReport {
    let premise = premise(opt, &trace.final_set);
    let critical = critical_indices(trace, opt.opt_value);
    let mut report = GammaDecrementReport {
        verdict: GammaVerdict::PremiseNotApplicable,
        premise,
        critical,
        gamma_sequence: Vec::new(),
        violations: Vec::new(),
        decrement_holds: None,
        accounting: None,
    };
    if !report.premise.holds {
        return report;
    }
    if report.critical.is_empty() {
        report.verdict = GammaVerdict::NoCriticalStates;
        return report;
    }
    let mut complete = true;
    for (&l, &step) in &report.critical.0 {
        let (gamma, lower_bound) = match gamma(m, opt, &trace.set_at(step), cfg) {
            Ok(g) => (Some(g.value), None),
            Err(Error::GammaInfeasible { lower_bound }) => {
                complete = false;
                (None, Some(lower_bound))
            }
            Err(e) => unreachable!("critical states are nonempty: {e}"),
        };
        report.gamma_sequence.push(CriticalGamma {
            l,
            step,
            gamma,
            lower_bound,
        });
    }
    for w in report.gamma_sequence.windows(2) {
        if w[1].l != w[0].l + 1 {
            continue;
        }
        if let (Some(a), Some(b)) = (w[0].gamma, w[1].gamma) {
            if b >= a {
                report.violations.push((w[0].l, w[1].l));
            }
        }
    }
    report.decrement_holds = Some(report.violations.is_empty());
    let first = report.gamma_sequence.first().expect("nonempty");
    let last = report.gamma_sequence.last().expect("nonempty");
    if let (0, Some(g0), Some(gl)) = (first.l, first.gamma, last.gamma) {
        let drop = g0 as i64 - gl as i64;
        report.accounting = Some(Accounting {
            l_bar: last.l,
            gamma_first: g0,
            gamma_last: gl,
            holds: last.l as i64 <= drop && drop < trace.k as i64,
        });
    }
    let accounting_ok = report.accounting.as_ref().is_none_or(|a| a.holds);
    report.verdict = if !report.violations.is_empty() || !accounting_ok {
        GammaVerdict::Fail
    } else if !complete || report.accounting.is_none() {
        GammaVerdict::Incomplete
    } else {
        GammaVerdict::Pass
    };
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_opt, ExactConfig};
    use crate::metric::{metric_from_graph, Arithmetic, WeightedGraph};

    fn line(n: usize) -> MetricSpace {
        let edges = (1..n).map(|v| (v - 1, v, 1)).collect();
        metric_from_graph(&WeightedGraph::new(n, edges).unwrap()).unwrap()
    }

    #[test]
    fn optimal_balls_are_a_consolidation() {
        let m = line(7);
        let opt = exact_opt(&m, 2, &ExactConfig::default()).unwrap();
        for f in [FacilitySet::all(7), FacilitySet::new([0, 6], &m).unwrap(), FacilitySet::new([3], &m).unwrap()] {
            let ctx = ConsolidationContext {
                metric: &m,
                opt_value: opt.opt_value,
                balls: &opt.balls,
                facilities: &f,
            };
            assert!(is_consolidation(&ctx, &opt.balls).is_valid());
        }
    }

    #[test]
    fn reports_each_violation_kind() {
        let m = line(6);
        let opt = exact_opt(&m, 2, &ExactConfig::default()).unwrap();
        assert_eq!(opt.opt_value, 1.0);
        let f = FacilitySet::new([0, 1, 2], &m).unwrap();
        let ctx = ConsolidationContext {
            metric: &m,
            opt_value: opt.opt_value,
            balls: &opt.balls,
            facilities: &f,
        };
        assert_eq!(is_consolidation(&ctx, &[]), ConsolidationReport::Covering { facility: 0 });
        assert_eq!(
            is_consolidation(&ctx, &[vec![0, 1, 2, 3]]),
            ConsolidationReport::Diameter { set: 0, x: 0, y: 3 }
        );
        // balls are {0,1,2} and {3,4,5}
        assert_eq!(
            is_consolidation(&ctx, &[vec![0, 1], vec![2]]),
            ConsolidationReport::OptimalPairs { ball: 0, f: 0, g: 2 }
        );
    }

    #[test]
    fn gamma_of_singleton_is_one() {
        let m = line(6);
        let opt = exact_opt(&m, 3, &ExactConfig::default()).unwrap();
        for p in 0..6 {
            let g = gamma(&m, &opt, &FacilitySet::new([p], &m).unwrap(), &GammaConfig::default()).unwrap();
            assert_eq!(g.value, 1);
        }
        assert!(gamma(&m, &opt, &FacilitySet::new([], &m).unwrap(), &GammaConfig::default()).is_err());
    }

    #[test]
    fn gamma_caps_degrade_to_lower_bound() {
        let m = line(6);
        let opt = exact_opt(&m, 2, &ExactConfig::default()).unwrap();
        let cfg = GammaConfig {
            max_points: 5,
            ..GammaConfig::default()
        };
        let e = gamma(&m, &opt, &FacilitySet::all(6), &cfg).unwrap_err();
        assert!(e.to_string().starts_with("Γ brute force infeasible"));
        let cfg = GammaConfig {
            node_budget: 1,
            ..GammaConfig::default()
        };
        assert!(matches!(
            gamma(&m, &opt, &FacilitySet::all(6), &cfg),
            Err(Error::GammaInfeasible { .. })
        ));
    }

    #[test]
    fn critical_indices_read_off_thresholds() {
        let map = critical_indices_of(&[0.0, 0.0, 1.0, 3.0, 5.0], 1.0, Arithmetic::Exact);
        assert_eq!(map.0, BTreeMap::from([(0, 1), (1, 2), (2, 3)]));
        assert!(critical_indices_of(&[0.0], 1.0, Arithmetic::Exact).is_empty());
    }

    #[test]
    fn premise_not_applicable_when_balls_keep_one_each() {
        let m = line(6);
        let opt = exact_opt(&m, 2, &ExactConfig::default()).unwrap();
        let t = crate::kcenter::reverse_greedy(&m, 2, crate::kcenter::TiePolicy::LowestIndex).unwrap();
        let r = verify_gamma_decrement(&m, &t, &opt, &GammaConfig::default());
        let one_each = opt.balls.iter().all(|b| b.iter().filter(|&&p| t.final_set.contains(p)).count() <= 1);
        if one_each {
            assert_eq!(r.verdict, GammaVerdict::PremiseNotApplicable);
        } else {
            assert_ne!(r.verdict, GammaVerdict::PremiseNotApplicable);
        }
    }
}
