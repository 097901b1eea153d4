//! Exact k-center oracles for small instances.
//!
//! Two independent routes are provided: plain enumeration of all
//! `k`-subsets, and a search over candidate radii (OPT is always one of the
//! pairwise distances) with a branching coverage test. [`exact_opt`] picks
//! between them by instance size.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kcenter::{cost_of, FacilitySet};
use crate::metric::MetricSpace;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalSolution {
    pub opt_value: f64,
    pub facilities: FacilitySet,
    /// `O_t = { c : d(o_t, c) ≤ OPT }`, one per facility in member order.
    pub balls: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug)]
pub struct ExactConfig {
    /// Largest `n` solved by full subset enumeration.
    pub enumeration_cap: usize,
    /// Search-node budget for the candidate-radius route.
    pub node_budget: u64,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            enumeration_cap: 20,
            node_budget: 20_000_000,
        }
    }
}

/// Certified optimum. Among several optimal sets the lexicographically
/// smallest is returned.
pub fn exact_opt(m: &MetricSpace, k: usize, cfg: &ExactConfig) -> Result<OptimalSolution> {
    if m.len() <= cfg.enumeration_cap {
        opt_by_enumeration(m, k)
    } else {
        opt_by_radius_search(m, k, cfg.node_budget)
    }
}

fn trivial(m: &MetricSpace, k: usize) -> Result<Option<OptimalSolution>> {
    let n = m.len();
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if k == n {
        return Ok(Some(solution(m, 0.0, FacilitySet::all(n))));
    }
    Ok(None)
}

fn solution(m: &MetricSpace, opt_value: f64, facilities: FacilitySet) -> OptimalSolution {
    let balls = facilities
        .members()
        .iter()
        .map(|&o| ball_radius(m, o, opt_value))
        .collect();
    OptimalSolution {
        opt_value,
        facilities,
        balls,
    }
}

/// Enumerates every `k`-subset in lexicographic order.
///
/// A set of fewer than `k` facilities can always be padded without raising
/// its cost, so `k`-subsets suffice.
pub fn opt_by_enumeration(m: &MetricSpace, k: usize) -> Result<OptimalSolution> {
    if let Some(s) = trivial(m, k)? {
        return Ok(s);
    }
    let n = m.len();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    let mut best_set = idx.clone();
    loop {
        // early exit once this subset can no longer beat `best`
        let mut worst = 0.0f64;
        for c in 0..n {
            let d = idx.iter().map(|&f| m.d(c, f)).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
            if worst >= best {
                break;
            }
        }
        if worst < best {
            best = worst;
            best_set.clone_from(&idx);
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(solution(m, best, FacilitySet::from_sorted(best_set)));
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

struct Coverage<'a> {
    m: &'a MetricSpace,
    r: f64,
    /// `coverers[p]`: points within `r` of `p`, ascending.
    coverers: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
}

impl<'a> Coverage<'a> {
    fn new(m: &'a MetricSpace, r: f64, budget: u64) -> Self {
        let n = m.len();
        let coverers = (0..n)
            .map(|p| (0..n).filter(|&q| m.d(p, q) <= r).collect())
            .collect();
        Coverage {
            m,
            r,
            coverers,
            nodes: 0,
            budget,
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(Error::ExactCapExceeded)
        } else {
            Ok(())
        }
    }

    fn cover(&self, covered: &mut [u32], center: usize, delta: i32) {
        for (p, c) in covered.iter_mut().enumerate() {
            if self.m.d(p, center) <= self.r {
                *c = c.wrapping_add_signed(delta);
            }
        }
    }

    /// Decides whether `slots` more centers cover everything, branching on
    /// the centers able to cover the lowest uncovered point.
    fn feasible(&mut self, covered: &mut [u32], slots: usize) -> Result<bool> {
        self.tick()?;
        let Some(p) = covered.iter().position(|&c| c == 0) else {
            return Ok(true);
        };
        if slots == 0 {
            return Ok(false);
        }
        for i in 0..self.coverers[p].len() {
            let c = self.coverers[p][i];
            self.cover(covered, c, 1);
            let ok = self.feasible(covered, slots - 1)?;
            self.cover(covered, c, -1);
            if ok {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Lexicographically smallest `k`-subset covering everything within `r`.
    fn lex_first(
        &mut self,
        covered: &mut [u32],
        chosen: &mut Vec<usize>,
        k: usize,
    ) -> Result<bool> {
        self.tick()?;
        let n = self.m.len();
        let uncovered = covered.iter().position(|&c| c == 0);
        if chosen.len() == k {
            return Ok(uncovered.is_none());
        }
        let start = chosen.last().map_or(0, |&l| l + 1);
        // every uncovered point still needs a coverer at or after `start`
        let mut limit = n - (k - chosen.len());
        for (p, &c) in covered.iter().enumerate() {
            if c == 0 {
                let last = *self.coverers[p].last().expect("p covers itself");
                if last < start {
                    return Ok(false);
                }
                if Some(p) == uncovered {
                    limit = limit.min(last);
                }
            }
        }
        if uncovered.is_none() {
            // any padding works; the smallest is the next indices in order
            chosen.extend(start..start + (k - chosen.len()));
            return Ok(true);
        }
        for c in start..=limit {
            chosen.push(c);
            self.cover(covered, c, 1);
            let ok = self.lex_first(covered, chosen, k)?;
            if ok {
                return Ok(true);
            }
            self.cover(covered, c, -1);
            chosen.pop();
        }
        Ok(false)
    }
}

/// Binary search over the sorted pairwise distances with an exhaustive
/// coverage test at each probe. Fails with [`Error::ExactCapExceeded`] once
/// `node_budget` search nodes have been spent.
pub fn opt_by_radius_search(m: &MetricSpace, k: usize, node_budget: u64) -> Result<OptimalSolution> {
    if let Some(s) = trivial(m, k)? {
        return Ok(s);
    }
    let n = m.len();
    let radii = m.distinct_distances();
    let mut spent = 0u64;
    let (mut lo, mut hi) = (0usize, radii.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let mut cov = Coverage::new(m, radii[mid], node_budget - spent);
        let ok = cov.feasible(&mut vec![0; n], k)?;
        spent += cov.nodes;
        if ok {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let r = radii[lo];
    let mut cov = Coverage::new(m, r, node_budget - spent);
    let mut chosen = Vec::with_capacity(k);
    if !cov.lex_first(&mut vec![0; n], &mut chosen, k)? {
        unreachable!("radius {r} was proven feasible");
    }
    let set = FacilitySet::from_sorted(chosen);
    debug_assert_eq!(cost_of(m, set.members()), r);
    Ok(solution(m, r, set))
}

fn ball_radius(m: &MetricSpace, center: usize, radius: f64) -> Vec<usize> {
    let ar = m.arithmetic();
    (0..m.len()).filter(|&c| ar.le(m.d(center, c), radius)).collect()
}

/// The optimal balls `O_t` of `sol`, recomputed from the metric.
pub fn opt_balls(m: &MetricSpace, sol: &OptimalSolution) -> Vec<Vec<usize>> {
    sol.facilities
        .members()
        .iter()
        .map(|&o| ball_radius(m, o, sol.opt_value))
        .collect()
}

/// `B_r(center)`: points within `r · opt_value` of `center`.
pub fn ball(m: &MetricSpace, center: usize, r: f64, opt_value: f64) -> Vec<usize> {
    ball_radius(m, center, r * opt_value)
}
