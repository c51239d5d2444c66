use cfi_core::benchmark::{build_benchmark_plan, webster_cycle, Alignment, BenchmarkConfig, BenchmarkError};
use cfi_core::model::{
    build_topology, default_params, validate_plan, DemandScenario, Phase, ViolationClass, MAIN, MOVEMENTS,
};
use proptest::prelude::*;

fn config() -> BenchmarkConfig {
    BenchmarkConfig::from_params(&default_params())
}

#[test]
fn cycle_rule_hand_values() {
    let cfg = config();
    // (1.5 * 6 + 5) / 0.4 = 35, clamped up to 40.
    assert_eq!(webster_cycle(&[0.3, 0.3], 6.0, &cfg), Ok(40));
    // (1.5 * 6 + 5) / 0.1 = 140.
    assert_eq!(webster_cycle(&[0.45, 0.45], 6.0, &cfg), Ok(140));
    assert!(matches!(webster_cycle(&[0.5, 0.5], 6.0, &cfg), Err(BenchmarkError::Oversaturated(_))));
}

#[test]
fn oversaturated_demand_falls_back_to_longest_cycle() {
    let t = build_topology();
    let p = default_params();
    let b = build_benchmark_plan(&DemandScenario::uniform(1, 12_000.0), &t, &p, &config()).unwrap();
    assert!(b.fallback);
    assert_eq!(b.plan.cycle, 150);
}

#[test]
fn uniform_main_greens_are_even() {
    let t = build_topology();
    let p = default_params();
    let b = build_benchmark_plan(&DemandScenario::uniform(1, 4000.0), &t, &p, &config()).unwrap();
    let a = b.plan.phase_green(&t, MAIN, Phase::A).unwrap();
    let bb = b.plan.phase_green(&t, MAIN, Phase::B).unwrap();
    assert!((a - bb).abs() <= 1);
    assert_eq!(a + bb, b.plan.cycle);
}

#[test]
fn crossover_subs_lead_main_green_by_travel_time() {
    let t = build_topology();
    let p = default_params();
    let s = DemandScenario::uniform(1, 4000.0);
    let b = build_benchmark_plan(&s, &t, &p, &config()).unwrap();
    let plan = &b.plan;
    for i in MOVEMENTS.into_iter().filter(|&i| t.crossover_of(i).is_some()) {
        let l = t.crossover_of(i).unwrap();
        let expected = (plan.offset(MAIN).unwrap() + plan.start(MAIN, i).unwrap() - 15).rem_euclid(plan.cycle);
        assert_eq!(plan.offset(l), Some(expected), "movement {i}");
    }
}

#[test]
fn mid_green_alignment_keeps_splits() {
    let t = build_topology();
    let p = default_params();
    let s = DemandScenario::uniform(1, 4000.0);
    let mut cfg = config();
    let a = build_benchmark_plan(&s, &t, &p, &cfg).unwrap();
    cfg.alignment = Alignment::MidGreen;
    let b = build_benchmark_plan(&s, &t, &p, &cfg).unwrap();
    assert_eq!(a.plan.greens, b.plan.greens);
    assert!(validate_plan(&b.plan, &s, &t, &p).iter().all(|v| v.class != ViolationClass::Structural));
}

#[test]
fn bad_config_is_rejected() {
    let mut cfg = config();
    cfg.cycle_min = 200.0;
    let t = build_topology();
    let p = default_params();
    let err = build_benchmark_plan(&DemandScenario::uniform(1, 4000.0), &t, &p, &cfg).unwrap_err();
    assert_eq!(err, BenchmarkError::Config);
}

fn scenario_strategy() -> impl Strategy<Value = DemandScenario> {
    (prop::array::uniform8(0.5f64..2.0), 500.0f64..4500.0).prop_map(|(w, total)| {
        let sum: f64 = w.iter().sum();
        let mut s = w.map(|x| x / sum);
        let rest: f64 = s[..7].iter().sum();
        s[7] = 1.0 - rest;
        DemandScenario::new(7, total, s).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn opposite_subs_match(s in scenario_strategy()) {
        let t = build_topology();
        let p = default_params();
        let plan = build_benchmark_plan(&s, &t, &p, &config()).unwrap().plan;
        for (l, o) in [(1, 3), (2, 4)] {
            for ph in [Phase::A, Phase::B] {
                prop_assert_eq!(plan.phase_green(&t, l, ph), plan.phase_green(&t, o, ph));
                prop_assert_eq!(plan.phase_start(&t, l, ph), plan.phase_start(&t, o, ph));
            }
        }
    }

    #[test]
    fn plans_are_structurally_valid_and_deterministic(s in scenario_strategy()) {
        let t = build_topology();
        let p = default_params();
        let a = build_benchmark_plan(&s, &t, &p, &config()).unwrap();
        let b = build_benchmark_plan(&s, &t, &p, &config()).unwrap();
        prop_assert_eq!(&a, &b);
        let v = validate_plan(&a.plan, &s, &t, &p);
        prop_assert!(v.iter().all(|x| x.class != ViolationClass::Structural), "{:?}", v);
        prop_assert!(v.iter().all(|x| x.rule != "phase greens must sum to cycle"), "{:?}", v);
    }
}
