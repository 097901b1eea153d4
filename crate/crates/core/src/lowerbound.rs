//! The adversarial star family on which reverse greedy, with suitably
//! scripted ties, ends at cost `(2k − 2)·OPT`.
//!
//! Star `C_0` and `C_1` each have a center and `2k − 2` leaves; star `C_i`
//! for `i ≥ 2` has `2k − i − 1` leaves. Star edges, the `C_0`/`C_1` center
//! edge and the `C_0`/`C_1` leaf matching have weight 1. For `i ≥ 2`, leaf
//! `j` of `C_i` is joined to leaf `j` of `C_0`, and the center of `C_i` to
//! leaf `2k − i` of `C_0`, all with weight `2i − 1`. Leaves are numbered from
//! 1 inside each star.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{opt_balls, OptimalSolution};
use crate::kcenter::{apply_script, FacilitySet, GreedyState, Trace};
use crate::metric::{metric_from_graph, MetricSpace, WeightedGraph};

/// Largest `k` for which the schedule is replayed with a legality check at
/// every step; beyond this only the final cost is checked.
pub const LEGALITY_CAP: usize = 25;

/// `½(3k − 2)(k + 1)`, the size of the unpadded instance.
pub fn base_size(k: usize) -> usize {
    (3 * k - 2) * (k + 1) / 2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Star {
    pub center: usize,
    /// `leaves[j - 1]` is leaf number `j`.
    pub leaves: Vec<usize>,
}

impl Star {
    pub fn leaf(&self, j: usize) -> usize {
        self.leaves[j - 1]
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.center).chain(self.leaves.iter().copied())
    }
}

#[derive(Clone, Debug)]
pub struct LowerBoundInstance {
    pub k: usize,
    pub n: usize,
    pub stars: Vec<Star>,
    /// Extra unit-weight leaves on `C_0`, numbered after the last vertex of
    /// `C_{k-1}` and outside every matching.
    pub padding: Vec<usize>,
    pub graph: WeightedGraph,
    pub metric: MetricSpace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    Star,
    Matching,
    Padding,
}

impl LowerBoundInstance {
    /// Builds the instance for `k`, padded up to `n` points when given.
    pub fn build(k: usize, n: Option<usize>) -> Result<Self> {
        if k < 2 {
            return Err(Error::ConstructionNeedsK2);
        }
        let base = base_size(k);
        let n = n.unwrap_or(base);
        if n < base {
            return Err(Error::TooFewPoints { k, n, min: base });
        }
        let mut next = 0usize;
        let mut stars = Vec::with_capacity(k);
        for i in 0..k {
            let leaves = if i < 2 { 2 * k - 2 } else { 2 * k - i - 1 };
            let center = next;
            stars.push(Star {
                center,
                leaves: (center + 1..=center + leaves).collect(),
            });
            next = center + leaves + 1;
        }
        debug_assert_eq!(next, base);
        let padding: Vec<usize> = (base..n).collect();

        let mut edges = Vec::new();
        for s in &stars {
            edges.extend(s.leaves.iter().map(|&l| (s.center, l, 1)));
        }
        let (c0, c1) = (&stars[0], &stars[1]);
        edges.push((c0.center, c1.center, 1));
        edges.extend(c0.leaves.iter().zip(&c1.leaves).map(|(&a, &b)| (a, b, 1)));
        for (i, s) in stars.iter().enumerate().skip(2) {
            let w = 2 * i as u64 - 1;
            edges.extend(s.leaves.iter().zip(&c0.leaves).map(|(&a, &b)| (a, b, w)));
            edges.push((s.center, c0.leaf(2 * k - i), w));
        }
        edges.extend(padding.iter().map(|&p| (c0.center, p, 1)));

        let graph = WeightedGraph::new(n, edges)?;
        let metric = metric_from_graph(&graph)?;
        Ok(LowerBoundInstance {
            k,
            n,
            stars,
            padding,
            graph,
            metric,
        })
    }

    pub fn centers(&self) -> Vec<usize> {
        self.stars.iter().map(|s| s.center).collect()
    }

    /// Star index of a vertex; padding belongs to `C_0`.
    pub fn star_of(&self, p: usize) -> usize {
        if self.padding.contains(&p) {
            return 0;
        }
        self.stars
            .iter()
            .position(|s| s.center == p || s.leaves.contains(&p))
            .expect("vertex belongs to a star")
    }

    /// Human-readable vertex names, e.g. `C0.center`, `C2.leaf3`, `C0.pad1`.
    pub fn labels(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.n];
        for (i, s) in self.stars.iter().enumerate() {
            out[s.center] = format!("C{i}.center");
            for (j, &l) in s.leaves.iter().enumerate() {
                out[l] = format!("C{i}.leaf{}", j + 1);
            }
        }
        for (j, &p) in self.padding.iter().enumerate() {
            out[p] = format!("C0.pad{}", j + 1);
        }
        out
    }

    pub fn edge_kind(&self, u: usize, v: usize) -> EdgeKind {
        if self.padding.contains(&u) || self.padding.contains(&v) {
            EdgeKind::Padding
        } else if self.star_of(u) == self.star_of(v) {
            EdgeKind::Star
        } else {
            EdgeKind::Matching
        }
    }

    /// The `k` survivors of the scripted run: leaves `1..=k` of `C_0`.
    pub fn designated_survivors(&self) -> FacilitySet {
        FacilitySet::from_sorted(self.stars[0].leaves[..self.k].to_vec())
    }
}

/// The star centers with OPT = 1; balls are computed from the metric.
pub fn known_opt(inst: &LowerBoundInstance) -> OptimalSolution {
    let mut sol = OptimalSolution {
        opt_value: 1.0,
        facilities: FacilitySet::from_sorted(inst.centers()),
        balls: Vec::new(),
    };
    sol.balls = opt_balls(&inst.metric, &sol);
    sol
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub point: usize,
    /// The cost the run should have right after this removal.
    pub phase: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub removals: Vec<Removal>,
}

impl PhaseSchedule {
    pub fn points(&self) -> Vec<usize> {
        self.removals.iter().map(|r| r.point).collect()
    }

    pub fn len(&self) -> usize {
        self.removals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.removals.is_empty()
    }

    /// `(phase, removals in that phase)` in schedule order.
    pub fn phase_sizes(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for r in &self.removals {
            match out.last_mut() {
                Some((p, c)) if *p == r.phase => *c += 1,
                _ => out.push((r.phase, 1)),
            }
        }
        out
    }

    /// Index of the first removal of each phase.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut at = 0;
        self.phase_sizes()
            .into_iter()
            .map(|(_, c)| {
                let b = at;
                at += c;
                b
            })
            .collect()
    }

    /// Phase in which each point is removed, `None` for survivors.
    pub fn phase_of(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for r in &self.removals {
            out[r.point] = Some(r.phase);
        }
        out
    }
}

/// The removal order that drives reverse greedy to cost `2k − 2`.
///
/// Phase 1 (cost 1): padding, the leaves then the center of `C_1`, then the
/// centers of `C_2, …, C_{k-1}`. Phase 2 (cost 2): the center of `C_0`, then
/// every leaf but leaf 1 of each `C_i`, `i ≥ 2`, in descending order. Then
/// for `i = 2, …, k − 1`: phase `2i − 1` removes leaf 1 of `C_i` and phase
/// `2i` removes leaf `2k − i` of `C_0`.
pub fn scripted_schedule(inst: &LowerBoundInstance) -> PhaseSchedule {
    let k = inst.k;
    let mut removals = Vec::with_capacity(inst.n - k);
    let mut push = |point, phase| removals.push(Removal { point, phase });
    for &p in &inst.padding {
        push(p, 1);
    }
    let c1 = &inst.stars[1];
    for &l in &c1.leaves {
        push(l, 1);
    }
    push(c1.center, 1);
    for s in &inst.stars[2..] {
        push(s.center, 1);
    }
    push(inst.stars[0].center, 2);
    for s in &inst.stars[2..] {
        for &l in s.leaves[1..].iter().rev() {
            push(l, 2);
        }
    }
    for i in 2..k {
        push(inst.stars[i].leaf(1), 2 * i - 1);
        push(inst.stars[0].leaf(2 * k - i), 2 * i);
    }
    PhaseSchedule { removals }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepFailure {
    /// The scripted facility was not in the argmin set.
    Illegal {
        step: usize,
        facility: usize,
        marginal: f64,
        min: f64,
    },
    /// The cost after the removal differs from the phase label.
    CostMismatch {
        step: usize,
        facility: usize,
        expected: f64,
        actual: f64,
    },
    /// The facility had already been removed.
    NotPresent { step: usize, facility: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleReport {
    pub k: usize,
    pub n: usize,
    /// Whether every step was replayed with the argmin check.
    pub legality_verified: bool,
    pub steps_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<StepFailure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_cost: Option<f64>,
    pub final_cost_ok: bool,
    pub survivors_ok: bool,
    /// `d(center(C_{k-1}), F_{n-k})`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_distance: Option<f64>,
    pub witness_ok: bool,
    /// Number of removals per phase, in schedule order.
    pub phase_sizes: Vec<(usize, usize)>,
}

impl ScheduleReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.final_cost_ok && self.survivors_ok && self.witness_ok
    }

    fn finish(&mut self, inst: &LowerBoundInstance, survivors: &FacilitySet, final_cost: f64) {
        let target = (2 * inst.k - 2) as f64;
        let witness = inst.stars[inst.k - 1].center;
        let wd = survivors
            .members()
            .iter()
            .map(|&f| inst.metric.d(witness, f))
            .fold(f64::INFINITY, f64::min);
        self.final_cost = Some(final_cost);
        self.final_cost_ok = final_cost == target;
        self.survivors_ok = *survivors == inst.designated_survivors();
        self.witness_distance = Some(wd);
        self.witness_ok = wd == target;
    }
}

/// Replays `sched` step by step, checking at each step that the scripted
/// facility attains the minimum marginal cost and that the new cost equals
/// its phase label; then checks the final cost, the survivors and the
/// serving distance of the center of `C_{k-1}`. Stops at the first failing
/// step.
pub fn verify_schedule(inst: &LowerBoundInstance, sched: &PhaseSchedule) -> ScheduleReport {
    let mut report = empty_report(inst, sched, true);
    if sched.len() != inst.n - inst.k {
        return report;
    }
    let mut state = GreedyState::new(&inst.metric);
    for (i, r) in sched.removals.iter().enumerate() {
        let step = i + 1;
        let Ok(pos) = state.members().binary_search(&r.point) else {
            report.failure = Some(StepFailure::NotPresent {
                step,
                facility: r.point,
            });
            return report;
        };
        let marg = state.marginals();
        let min = marg.iter().copied().fold(f64::INFINITY, f64::min);
        if marg[pos] != min {
            report.failure = Some(StepFailure::Illegal {
                step,
                facility: r.point,
                marginal: marg[pos],
                min,
            });
            return report;
        }
        state.remove(r.point).expect("checked present");
        report.steps_checked = step;
        debug_assert_eq!(state.cost(), marg[pos]);
        if state.cost() != r.phase as f64 {
            report.failure = Some(StepFailure::CostMismatch {
                step,
                facility: r.point,
                expected: r.phase as f64,
                actual: state.cost(),
            });
            return report;
        }
    }
    let survivors = FacilitySet::from_sorted(state.members().to_vec());
    let cost = state.cost();
    report.finish(inst, &survivors, cost);
    report
}

/// Final-state checks only; legality is trusted.
pub fn verify_schedule_fast(inst: &LowerBoundInstance, sched: &PhaseSchedule) -> Result<ScheduleReport> {
    let mut report = empty_report(inst, sched, false);
    let (survivors, cost) = apply_script(&inst.metric, inst.k, &sched.points())?;
    report.finish(inst, &survivors, cost);
    Ok(report)
}

fn empty_report(inst: &LowerBoundInstance, sched: &PhaseSchedule, legality: bool) -> ScheduleReport {
    ScheduleReport {
        k: inst.k,
        n: inst.n,
        legality_verified: legality,
        steps_checked: 0,
        failure: None,
        final_cost: None,
        final_cost_ok: false,
        survivors_ok: false,
        witness_distance: None,
        witness_ok: false,
        phase_sizes: sched.phase_sizes(),
    }
}

/// Phase of each removed point, read off a trace's recorded costs.
pub fn phases_from_trace(trace: &Trace) -> Vec<Option<usize>> {
    let mut out = vec![None; trace.n];
    for s in &trace.steps {
        out[s.removed] = Some(s.cost.round() as usize);
    }
    out
}

/// Graphviz rendering: one cluster per star, matching edges labelled with
/// their weight, and an optional phase-of-removal colouring.
pub fn to_dot(inst: &LowerBoundInstance, phases: Option<&[Option<usize>]>) -> String {
    const PALETTE: [&str; 8] = [
        "#4363D8", "#00E6E6", "#FBBC05", "#FF8000", "#34A853", "#B12DD2", "#EA4335", "#800000",
    ];
    let labels = inst.labels();
    let mut s = String::new();
    let _ = writeln!(s, "graph lowerbound_k{} {{", inst.k);
    let _ = writeln!(s, "  node [shape=circle, style=filled, fillcolor=white];");
    for (i, star) in inst.stars.iter().enumerate() {
        let _ = writeln!(s, "  subgraph cluster_C{i} {{");
        let _ = writeln!(s, "    label=\"C{i}\";");
        let mut members: Vec<usize> = star.vertices().collect();
        if i == 0 {
            members.extend(&inst.padding);
        }
        for p in members {
            let mut attrs = format!("label=\"{}\"", labels[p]);
            if let Some(Some(r)) = phases.map(|ph| ph[p]) {
                let _ = write!(attrs, ", phase={r}, fillcolor=\"{}\"", PALETTE[(r - 1) % PALETTE.len()]);
            }
            let _ = writeln!(s, "    v{p} [{attrs}];");
        }
        let _ = writeln!(s, "  }}");
    }
    for &(u, v, w) in inst.graph.edges() {
        match inst.edge_kind(u, v) {
            EdgeKind::Matching => {
                let _ = writeln!(s, "  v{u} -- v{v} [label=\"{w}\", weight={w}, style=dashed];");
            }
            _ => {
                let _ = writeln!(s, "  v{u} -- v{v};");
            }
        }
    }
    let _ = writeln!(s, "}}");
    s
}
