mod common;

use common::{brute_gamma, instance_strategy};
use proptest::prelude::*;
use revgreedy::consolidation::{
    critical_indices, gamma, is_consolidation, premise, verify_gamma_decrement, ConsolidationContext, GammaConfig,
    GammaVerdict,
};
use revgreedy::exact::{exact_opt, ExactConfig};
use revgreedy::kcenter::{reverse_greedy, FacilitySet, TiePolicy};
use revgreedy::lowerbound::{known_opt, scripted_schedule, LowerBoundInstance};
use revgreedy::metric::MetricSpace;

fn subset_of(m: &MetricSpace, mask: u64, cap: usize) -> FacilitySet {
    let mut pts: Vec<usize> = (0..m.len()).filter(|&i| mask >> i & 1 == 1).take(cap).collect();
    if pts.is_empty() {
        pts.push(0);
    }
    FacilitySet::new(pts, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn gamma_matches_unrestricted_oracle((m, k) in instance_strategy(2..=10, 4), mask in any::<u64>()) {
        let opt = exact_opt(&m, k, &ExactConfig::default()).unwrap();
        let f = subset_of(&m, mask, 7);
        let g = gamma(&m, &opt, &f, &GammaConfig::default()).unwrap();
        prop_assert_eq!(g.value, brute_gamma(&m, opt.opt_value, &opt.balls, f.members()));
        prop_assert!(g.value >= 1 && g.value <= k);
        let ctx = ConsolidationContext { metric: &m, opt_value: opt.opt_value, balls: &opt.balls, facilities: &f };
        prop_assert!(is_consolidation(&ctx, &g.witness).is_valid());
        prop_assert!(is_consolidation(&ctx, &opt.balls).is_valid());
    }

    #[test]
    fn gamma_is_monotone_under_subsets((m, k) in instance_strategy(2..=12, 4), a in any::<u64>(), b in any::<u64>()) {
        let opt = exact_opt(&m, k, &ExactConfig::default()).unwrap();
        let big = subset_of(&m, a | b, 64);
        let small = subset_of(&m, a, 64);
        prop_assume!(small.members().iter().all(|&p| big.contains(p)));
        let cfg = GammaConfig::default();
        prop_assert!(gamma(&m, &opt, &small, &cfg).unwrap().value <= gamma(&m, &opt, &big, &cfg).unwrap().value);
    }

    #[test]
    fn decrement_holds_on_random_runs((m, k) in instance_strategy(3..=10, 4), seed in any::<u64>()) {
        let opt = exact_opt(&m, k, &ExactConfig::default()).unwrap();
        let t = reverse_greedy(&m, k, TiePolicy::SeededRandom { seed }).unwrap();
        let r = verify_gamma_decrement(&m, &t, &opt, &GammaConfig::default());
        prop_assert_ne!(r.verdict, GammaVerdict::Fail, "{:?}", r);
        prop_assert_ne!(r.verdict, GammaVerdict::Incomplete);
        prop_assert_eq!(r.verdict == GammaVerdict::PremiseNotApplicable, !premise(&opt, &t.final_set).holds);
    }
}

#[test]
fn critical_indices_bracket_thresholds() {
    let inst = LowerBoundInstance::build(5, None).unwrap();
    let t = reverse_greedy(&inst.metric, 5, TiePolicy::Scripted { sequence: scripted_schedule(&inst).points() })
        .unwrap();
    let costs = t.costs();
    let crit = critical_indices(&t, 1.0);
    assert_eq!(crit.0.keys().copied().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    for (&l, &i) in &crit.0 {
        let bound = 2.0 * l as f64;
        assert!(costs[i] <= bound && bound < costs[i + 1], "l={l} i={i}");
    }
}

#[test]
fn scripted_traces_pass_the_decrement_check() {
    for k in [2, 3] {
        let inst = LowerBoundInstance::build(k, None).unwrap();
        let opt = known_opt(&inst);
        let t = reverse_greedy(&inst.metric, k, TiePolicy::Scripted { sequence: scripted_schedule(&inst).points() })
            .unwrap();
        let r = verify_gamma_decrement(&inst.metric, &t, &opt, &GammaConfig::default());
        assert!(r.premise.holds, "k={k}");
        assert_eq!(r.verdict, GammaVerdict::Pass, "k={k}: {r:?}");
        let acc = r.accounting.unwrap();
        assert!(acc.l_bar <= acc.gamma_first - acc.gamma_last && acc.gamma_first - acc.gamma_last < k);
    }
}

#[test]
fn gamma_of_the_full_k3_instance() {
    let inst = LowerBoundInstance::build(3, None).unwrap();
    let opt = known_opt(&inst);
    let g = gamma(&inst.metric, &opt, &FacilitySet::all(inst.n), &GammaConfig::default()).unwrap();
    assert_eq!(g.value, 3);
}
