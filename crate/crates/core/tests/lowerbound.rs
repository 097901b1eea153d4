mod common;

use common::brute_cost;
use revgreedy::exact::{exact_opt, opt_by_radius_search, ExactConfig};
use revgreedy::kcenter::{cost, reverse_greedy, TiePolicy};
use revgreedy::lowerbound::{
    base_size, known_opt, scripted_schedule, verify_schedule, verify_schedule_fast, LowerBoundInstance,
    StepFailure,
};
use revgreedy::validate_metric;

#[test]
fn scripted_runs_end_at_2k_minus_2() {
    for k in 2..=10 {
        let inst = LowerBoundInstance::build(k, None).unwrap();
        assert_eq!(inst.n, (3 * k - 2) * (k + 1) / 2);
        let sched = scripted_schedule(&inst);
        let r = verify_schedule(&inst, &sched);
        assert!(r.passed(), "k={k}: {r:?}");
        assert_eq!(r.steps_checked, inst.n - k);
        assert_eq!(r.final_cost, Some((2 * k - 2) as f64));
    }
}

#[test]
fn construction_is_a_metric_with_the_stated_size() {
    for k in 2..=8 {
        let inst = LowerBoundInstance::build(k, None).unwrap();
        assert_eq!(inst.n, base_size(k));
        assert!(validate_metric(&inst.metric).is_valid(), "k={k}");
        assert_eq!(inst.stars.len(), k);
        assert_eq!(inst.stars[0].leaves.len(), 2 * k - 2);
    }
    assert!(LowerBoundInstance::build(1, None).is_err());
    assert!(LowerBoundInstance::build(4, Some(base_size(4) - 1)).is_err());
}

#[test]
fn opt_is_one_by_both_exact_routes() {
    for k in 2..=3 {
        let inst = LowerBoundInstance::build(k, None).unwrap();
        let known = known_opt(&inst);
        assert_eq!(known.opt_value, 1.0);
        assert_eq!(cost(&inst.metric, &known.facilities).unwrap(), 1.0);
        let e = exact_opt(&inst.metric, k, &ExactConfig::default()).unwrap();
        assert_eq!(e.opt_value, 1.0);
        assert_eq!(opt_by_radius_search(&inst.metric, k, 50_000_000).unwrap().opt_value, 1.0);
    }
    // k = 4 needs the radius route (n = 25)
    let inst = LowerBoundInstance::build(4, None).unwrap();
    assert_eq!(opt_by_radius_search(&inst.metric, 4, 50_000_000).unwrap().opt_value, 1.0);
}

#[test]
fn golden_phase_sizes_for_k5() {
    let inst = LowerBoundInstance::build(5, None).unwrap();
    let sizes = scripted_schedule(&inst).phase_sizes();
    assert_eq!(sizes, vec![(1, 12), (2, 16), (3, 1), (4, 1), (5, 1), (6, 1), (7, 1), (8, 1)]);
    let survivors = inst.designated_survivors();
    assert_eq!(survivors.members(), &inst.stars[0].leaves[..5]);
}

#[test]
fn tampered_schedules_are_caught() {
    let inst = LowerBoundInstance::build(4, None).unwrap();
    let good = scripted_schedule(&inst);

    // Find, by brute force, the first step where some live point is not an
    // argmin, and pull that point forward to it.
    let mut live: Vec<usize> = (0..inst.n).collect();
    let mut tamper = None;
    for (i, r) in good.removals.iter().enumerate() {
        let marg: Vec<(usize, f64)> = live
            .iter()
            .map(|&p| {
                let rest: Vec<usize> = live.iter().copied().filter(|&x| x != p).collect();
                (p, brute_cost(&inst.metric, &rest))
            })
            .collect();
        let min = marg.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        if let Some(&(p, _)) = marg.iter().find(|m| m.1 > min) {
            tamper = Some((i, p));
            break;
        }
        live.retain(|&x| x != r.point);
    }
    let (at, p) = tamper.expect("some step has a non-argmin point");
    let mut early = good.clone();
    let from = early.removals.iter().position(|r| r.point == p).unwrap();
    let moved = early.removals.remove(from);
    early.removals.insert(at, moved);
    let rep = verify_schedule(&inst, &early);
    assert!(!rep.passed());
    assert!(
        matches!(rep.failure, Some(StepFailure::Illegal { step, facility, .. }) if step == at + 1 && facility == p),
        "{:?}",
        rep.failure
    );

    // A wrong phase label is a cost mismatch.
    let mut relabelled = good.clone();
    relabelled.removals[0].phase = 2;
    let rep = verify_schedule(&inst, &relabelled);
    assert!(matches!(rep.failure, Some(StepFailure::CostMismatch { step: 1, .. })));

    // Repeating a point.
    let mut dup = good.clone();
    dup.removals[1].point = dup.removals[0].point;
    let rep = verify_schedule(&inst, &dup);
    assert!(matches!(rep.failure, Some(StepFailure::NotPresent { step: 2, .. })));

    // Fast mode trusts legality but still checks the final state.
    let mut swapped = good.clone();
    let last = swapped.removals.len() - 1;
    let keep = inst.stars[0].leaves[0];
    swapped.removals[last].point = keep;
    let rep = verify_schedule_fast(&inst, &swapped).unwrap();
    assert!(!rep.legality_verified);
    assert!(!rep.survivors_ok);
}

#[test]
fn padding_does_not_change_the_outcome() {
    for (k, extra) in [(3, 1), (3, 5), (4, 3), (5, 10)] {
        let n = base_size(k) + extra;
        let inst = LowerBoundInstance::build(k, Some(n)).unwrap();
        assert_eq!(inst.n, n);
        assert!(validate_metric(&inst.metric).is_valid());
        let sched = scripted_schedule(&inst);
        assert_eq!(sched.phase_sizes()[0].1, phase1_size(k) + extra);
        let r = verify_schedule(&inst, &sched);
        assert!(r.passed(), "k={k} n={n}: {r:?}");
        assert_eq!(r.final_cost, Some((2 * k - 2) as f64));
        assert_eq!(known_opt(&inst).opt_value, 1.0);
    }
}

fn phase1_size(k: usize) -> usize {
    let unpadded = LowerBoundInstance::build(k, None).unwrap();
    scripted_schedule(&unpadded).phase_sizes()[0].1
}

#[test]
fn lowest_index_greedy_is_not_adversarial() {
    // Without the script, plain greedy on the same instance stays well
    // below the forced ratio.
    for k in 3..=5 {
        let inst = LowerBoundInstance::build(k, None).unwrap();
        let t = reverse_greedy(&inst.metric, k, TiePolicy::LowestIndex).unwrap();
        assert!(t.final_cost() <= (2 * k) as f64);
    }
}
