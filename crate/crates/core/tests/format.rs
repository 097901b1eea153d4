mod common;

use common::instance_strategy;
use proptest::prelude::*;
use revgreedy::format::{schedule_from_json, schedule_to_json, trace_from_json, trace_to_json, Instance};
use revgreedy::kcenter::{reverse_greedy, TiePolicy};
use revgreedy::lowerbound::{scripted_schedule, LowerBoundInstance};
use revgreedy::Error;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn instances_and_traces_roundtrip((m, k) in instance_strategy(1..=12, 4), seed in any::<u64>()) {
        let inst = Instance::from_metric(m.clone(), Some(k));
        let back = Instance::from_json(&inst.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back.metric, &m);
        prop_assert_eq!(back.k, Some(k));

        let t = reverse_greedy(&m, k, TiePolicy::SeededRandom { seed }).unwrap();
        let t2 = trace_from_json(&trace_to_json(&t).unwrap()).unwrap();
        prop_assert_eq!(t2, t);
    }
}

#[test]
fn lower_bound_instances_keep_their_structure() {
    let lb = LowerBoundInstance::build(4, Some(30)).unwrap();
    let inst = Instance::from_lower_bound(&lb);
    let text = inst.to_json().unwrap();
    assert!(text.contains("\"graph\""));
    assert!(!text.contains("\"matrix\""));
    let back = Instance::from_json(&text).unwrap();
    let rebuilt = back.lower_bound().unwrap().unwrap();
    assert_eq!(rebuilt.metric, lb.metric);
    assert_eq!(back.labels.unwrap()[0], "C0.center");

    let sched = scripted_schedule(&lb);
    let (k, n, s2) = schedule_from_json(&schedule_to_json(&lb, &sched).unwrap()).unwrap();
    assert_eq!((k, n), (4, 30));
    assert_eq!(s2, sched);
}

#[test]
fn malformed_instances_are_rejected() {
    let cases = [
        r#"{"version":2,"mode":"int","n":1,"matrix":[[0]]}"#,
        r#"{"version":1,"mode":"int","n":2,"matrix":[[0,1],[1,0]],"graph":{"edges":[[0,1,1]]}}"#,
        r#"{"version":1,"mode":"int","n":2}"#,
        r#"{"version":1,"mode":"float","n":2,"graph":{"edges":[[0,1,1]]}}"#,
        r#"{"version":1,"mode":"int","n":2,"eps":0.1,"matrix":[[0,1],[1,0]]}"#,
        r#"{"version":1,"mode":"int","n":3,"matrix":[[0,1],[1,0]]}"#,
        r#"{"version":1,"mode":"int","n":3,"matrix":[[0,1,5],[1,0,1],[5,1,0]]}"#,
        r#"{"version":1,"mode":"int","n":2,"matrix":[[0,1.5],[1.5,0]]}"#,
        r#"{"version":1,"mode":"int","n":2,"matrix":[[0,1],[1,0]],"k":3}"#,
        r#"{"version":1,"mode":"int","n":2,"matrix":[[0,1],[1,0]],"labels":["a"]}"#,
        r#"{"version":1,"mode":"int","n":3,"graph":{"edges":[[0,1,1]]}}"#,
        "not json",
    ];
    for c in cases {
        assert!(Instance::from_json(c).is_err(), "accepted {c}");
    }
    assert!(matches!(Instance::from_json("{"), Err(Error::Json(_))));
}

#[test]
fn float_instances_keep_eps() {
    let text = r#"{"version":1,"mode":"float","n":2,"eps":0.001,"matrix":[[0,0.25],[0.25,0]]}"#;
    let inst = Instance::from_json(text).unwrap();
    assert_eq!(inst.metric.d(0, 1), 0.25);
    assert_eq!(inst.metric.arithmetic().eps(), 0.001);
}
