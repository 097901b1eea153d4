//! Batteries and sweeps shared by the CLI and the acceptance tests.
//!
//! Every run is a pure function of its configuration; trials are spread
//! over a rayon pool and collected in trial order.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::consolidation::{premise, verify_gamma_decrement, GammaConfig, GammaDecrementReport, GammaVerdict};
use crate::error::Result;
use crate::exact::{exact_opt, ExactConfig};
use crate::kcenter::{cost, greedy_farthest_first, reverse_greedy, TiePolicy};
use crate::lowerbound::{
    known_opt, scripted_schedule, verify_schedule, verify_schedule_fast, LowerBoundInstance, ScheduleReport,
    LEGALITY_CAP,
};
use crate::metric::{random_metric, Arithmetic, MetricSpace, RandomKind};

/// Lowest-index plus five seeded-random policies derived from `seed`.
pub fn standard_policies(seed: u64) -> Vec<TiePolicy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7135);
    std::iter::once(TiePolicy::LowestIndex)
        .chain((0..5).map(|_| TiePolicy::SeededRandom { seed: rng.random() }))
        .collect()
}

/// A reproducible random instance description.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialSpec {
    pub trial: usize,
    pub kind: RandomKind,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
}

impl TrialSpec {
    pub fn metric(&self) -> Result<MetricSpace> {
        random_metric(self.kind, self.n, self.seed)
    }
}

/// Draws `trials` instance specs: kinds alternate between Euclidean and
/// random-graph metrics, `n` is uniform in `n_range`, `k` uniform in `ks`.
pub fn trial_specs(trials: usize, n_range: (usize, usize), ks: &[usize], seed: u64) -> Vec<TrialSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|trial| {
            let kind = if trial % 2 == 0 {
                RandomKind::euclidean()
            } else {
                RandomKind::random_graph()
            };
            let k = ks[rng.random_range(0..ks.len())];
            let n = rng.random_range(n_range.0.max(k)..=n_range.1.max(k));
            TrialSpec {
                trial,
                kind,
                n,
                k,
                seed: rng.random(),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperTrial {
    pub spec: TrialSpec,
    pub opt: f64,
    /// Final reverse greedy cost per policy, in policy order.
    pub reverse_costs: Vec<f64>,
    pub worst_ratio: f64,
    pub greedy_cost: f64,
    pub greedy_ratio: f64,
    /// Every policy ended within `2k·OPT`.
    pub upper_ok: bool,
    /// Farthest-first ended within `2·OPT`.
    pub greedy_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperReport {
    pub trials: Vec<UpperTrial>,
    pub upper_violations: usize,
    pub greedy_violations: usize,
    pub policies: usize,
}

impl UpperReport {
    pub fn passed(&self) -> bool {
        self.upper_violations == 0 && self.greedy_violations == 0
    }
}

fn ratio(c: f64, opt: f64) -> f64 {
    if opt > 0.0 {
        c / opt
    } else {
        1.0
    }
}

/// Reverse greedy under every standard policy, and farthest-first from a
/// random start, against the exact optimum.
pub fn upper_battery(specs: &[TrialSpec], seed: u64, exact: &ExactConfig) -> Result<UpperReport> {
    let policies = standard_policies(seed);
    let trials = specs
        .par_iter()
        .map(|spec| -> Result<UpperTrial> {
            let m = spec.metric()?;
            let ar = m.arithmetic();
            let k = spec.k;
            let opt = exact_opt(&m, k, exact)?.opt_value;
            let reverse_costs = policies
                .iter()
                .map(|p| Ok(reverse_greedy(&m, k, p.clone())?.final_cost()))
                .collect::<Result<Vec<f64>>>()?;
            let worst = reverse_costs.iter().copied().fold(0.0, f64::max);
            let first = (spec.seed % spec.n as u64) as usize;
            let greedy_cost = cost(&m, &greedy_farthest_first(&m, k, first)?)?;
            Ok(UpperTrial {
                spec: *spec,
                opt,
                worst_ratio: ratio(worst, opt),
                upper_ok: ar.le(worst, 2.0 * k as f64 * opt),
                greedy_ratio: ratio(greedy_cost, opt),
                greedy_ok: ar.le(greedy_cost, 2.0 * opt),
                reverse_costs,
                greedy_cost,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UpperReport {
        upper_violations: trials.iter().filter(|t| !t.upper_ok).count(),
        greedy_violations: trials.iter().filter(|t| !t.greedy_ok).count(),
        policies: policies.len(),
        trials,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaTrial {
    pub spec: TrialSpec,
    pub policy: TiePolicy,
    pub report: GammaDecrementReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaBattery {
    /// Runs where the premise held, in trial order.
    pub trials: Vec<GammaTrial>,
    /// Runs examined, including those where the premise failed.
    pub examined: usize,
}

impl GammaBattery {
    pub fn failures(&self) -> usize {
        self.trials
            .iter()
            .filter(|t| t.report.verdict == GammaVerdict::Fail)
            .count()
    }

    pub fn incomplete(&self) -> usize {
        self.trials
            .iter()
            .filter(|t| t.report.verdict == GammaVerdict::Incomplete)
            .count()
    }
}

/// Collects `wanted` random runs whose final set satisfies the premise and
/// checks the Γ decrement on each. Gives up after `max_attempts` specs.
pub fn gamma_battery(
    wanted: usize,
    n_range: (usize, usize),
    ks: &[usize],
    seed: u64,
    max_attempts: usize,
    exact: &ExactConfig,
    gamma_cfg: &GammaConfig,
) -> Result<GammaBattery> {
    let specs = trial_specs(max_attempts, n_range, ks, seed);
    let policies = standard_policies(seed);
    let mut out = Vec::new();
    let mut examined = 0;
    for chunk in specs.chunks(64) {
        let found = chunk
            .par_iter()
            .map(|spec| -> Result<Option<GammaTrial>> {
                let m = spec.metric()?;
                let opt = exact_opt(&m, spec.k, exact)?;
                let policy = policies[spec.trial % policies.len()].clone();
                let trace = reverse_greedy(&m, spec.k, policy.clone())?;
                if !premise(&opt, &trace.final_set).holds {
                    return Ok(None);
                }
                let report = verify_gamma_decrement(&m, &trace, &opt, gamma_cfg);
                Ok(Some(GammaTrial {
                    spec: *spec,
                    policy,
                    report,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        for t in found {
            examined += 1;
            if let Some(t) = t {
                out.push(t);
                if out.len() == wanted {
                    return Ok(GammaBattery { trials: out, examined });
                }
            }
        }
    }
    Ok(GammaBattery { trials: out, examined })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationTrial {
    pub spec: TrialSpec,
    pub opt: f64,
    /// Smallest distance between points of different optimal balls.
    pub separation: f64,
    pub separated: bool,
    pub worst_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub trials: Vec<SeparationTrial>,
    pub separated: usize,
    /// Separated instances where some policy ended above `2·OPT`.
    pub above_two: usize,
}

/// `k` tight Euclidean clusters far apart, `n` points in total.
pub fn clustered_metric(n: usize, k: usize, seed: u64) -> Result<MetricSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<(f64, f64)> = (0..k)
        .map(|i| (20.0 * (i % 4) as f64, 20.0 * (i / 4) as f64))
        .collect();
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (cx, cy) = centers[i % k];
            let r = rng.random::<f64>().sqrt();
            let a = rng.random::<f64>() * std::f64::consts::TAU;
            (cx + r * a.cos(), cy + r * a.sin())
        })
        .collect();
    let rows = pts
        .iter()
        .map(|p| pts.iter().map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()).collect())
        .collect();
    MetricSpace::from_rows(rows, Arithmetic::float())
}

/// Reverse greedy on instances whose optimal balls are pairwise at least
/// `2·OPT` apart. Reports ratios; never fails.
pub fn separation_battery(
    trials: usize,
    n: usize,
    k: usize,
    seed: u64,
    exact: &ExactConfig,
) -> Result<SeparationReport> {
    let policies = standard_policies(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<TrialSpec> = (0..trials)
        .map(|trial| TrialSpec {
            trial,
            kind: RandomKind::euclidean(),
            n,
            k,
            seed: rng.random(),
        })
        .collect();
    let out = specs
        .par_iter()
        .map(|spec| -> Result<SeparationTrial> {
            let m = clustered_metric(spec.n, spec.k, spec.seed)?;
            let ar = m.arithmetic();
            let opt = exact_opt(&m, spec.k, exact)?;
            let mut sep = f64::INFINITY;
            for (s, a) in opt.balls.iter().enumerate() {
                for b in &opt.balls[s + 1..] {
                    for &x in a {
                        for &y in b {
                            sep = sep.min(m.d(x, y));
                        }
                    }
                }
            }
            let worst = policies
                .iter()
                .map(|p| Ok(reverse_greedy(&m, spec.k, p.clone())?.final_cost()))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(SeparationTrial {
                spec: *spec,
                opt: opt.opt_value,
                separation: sep,
                separated: ar.le(2.0 * opt.opt_value, sep),
                worst_ratio: ratio(worst, opt.opt_value),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let separated = out.iter().filter(|t| t.separated).count();
    let above_two = out
        .iter()
        .filter(|t| t.separated && t.worst_ratio > 2.0 + 1e-9)
        .count();
    Ok(SeparationReport {
        trials: out,
        separated,
        above_two,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerCase {
    pub report: ScheduleReport,
    pub opt: f64,
    /// Independent exact optimum, computed for small `k` only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_opt: Option<f64>,
    pub ratio: f64,
    pub greedy_ratio: f64,
}

impl LowerCase {
    pub fn passed(&self) -> bool {
        self.report.passed() && self.exact_opt.is_none_or(|o| o == self.opt)
    }
}

/// Builds and verifies the scripted run for one `k`. `fast` skips the
/// per-step legality replay.
pub fn lower_case(k: usize, n: Option<usize>, fast: bool, exact: &ExactConfig) -> Result<LowerCase> {
    let inst = LowerBoundInstance::build(k, n)?;
    let sched = scripted_schedule(&inst);
    let report = if fast {
        verify_schedule_fast(&inst, &sched)?
    } else {
        verify_schedule(&inst, &sched)
    };
    let opt = known_opt(&inst).opt_value;
    let exact_opt = if inst.n <= exact.enumeration_cap || k <= 3 {
        Some(crate::exact::exact_opt(&inst.metric, k, exact)?.opt_value)
    } else {
        None
    };
    let greedy = cost(&inst.metric, &greedy_farthest_first(&inst.metric, k, 0)?)?;
    Ok(LowerCase {
        ratio: report.final_cost.unwrap_or(f64::NAN) / opt,
        greedy_ratio: greedy / opt,
        report,
        opt,
        exact_opt,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub n: usize,
    pub final_cost: f64,
    pub opt: f64,
    pub ratio: f64,
    pub runtime_ms: f64,
    pub legality: &'static str,
    pub greedy_ratio: f64,
}

pub const SWEEP_HEADER: &str = "k,n,final_cost,opt,ratio,runtime_ms,legality,greedy_ratio";

impl SweepRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{},{}",
            self.k, self.n, self.final_cost, self.opt, self.ratio, self.runtime_ms, self.legality, self.greedy_ratio
        )
    }
}

/// One row per `k`. Above [`LEGALITY_CAP`] rows are computed in fast mode
/// and flagged, which the caller must request explicitly.
pub fn sweep(ks: &[usize], fast: bool) -> Result<Vec<SweepRow>> {
    ks.par_iter()
        .map(|&k| {
            let start = Instant::now();
            let fast = fast || k > LEGALITY_CAP;
            let inst = LowerBoundInstance::build(k, None)?;
            let sched = scripted_schedule(&inst);
            let report = if fast {
                verify_schedule_fast(&inst, &sched)?
            } else {
                verify_schedule(&inst, &sched)
            };
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            let opt = known_opt(&inst).opt_value;
            let final_cost = report.final_cost.unwrap_or(f64::NAN);
            let greedy = cost(&inst.metric, &greedy_farthest_first(&inst.metric, k, 0)?)?;
            Ok(SweepRow {
                k,
                n: inst.n,
                final_cost,
                opt,
                ratio: final_cost / opt,
                runtime_ms,
                legality: match (fast, report.passed()) {
                    (true, _) => "unverified",
                    (false, true) => "verified",
                    (false, false) => "failed",
                },
                greedy_ratio: greedy / opt,
            })
        })
        .collect()
}
