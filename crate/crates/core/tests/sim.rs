use cfi_core::benchmark::{build_benchmark_plan, BenchmarkConfig};
use cfi_core::model::{build_topology, default_params, DemandScenario, SignalPlan};
use cfi_core::sim::{
    aggregate, run_simulation, run_with, simulate, ArrivalMode, Counters, Signal, SimError, SimMetrics, SimNetwork,
    SimOptions, SimRoute, SimStage, Stat,
};
use proptest::prelude::*;

const LOST: f64 = 3.0;

fn single(demand: f64, rate: f64, signal: Signal, storage: f64) -> SimNetwork {
    SimNetwork {
        routes: vec![SimRoute {
            movement: 1,
            entry: 0,
            demand,
            stages: vec![SimStage {
                intersection: 5,
                storage,
                travel_time: 0.0,
                rate,
                signal,
            }],
        }],
        entries: 1,
        lost_time: LOST,
    }
}

fn uniform_opts(step: f64) -> SimOptions {
    SimOptions {
        step,
        arrivals: ArrivalMode::Uniform,
        ..SimOptions::default()
    }
}

/// Per-vehicle replay of one fixed-time stop line with evenly spaced arrivals.
///
/// A vehicle leaves at the earliest time that is no earlier than its arrival, one
/// headway after the previous departure, and inside `[green start + lost + headway, green end]`.
/// Vehicles still waiting at the horizon are charged up to the horizon.
fn replay_delay(q: f64, s: f64, cycle: f64, green: f64, horizon: f64) -> f64 {
    let h = 1.0 / s;
    let mut prev = f64::NEG_INFINITY;
    let mut total = 0.0;
    let mut n = 0usize;
    let mut k = 0usize;
    loop {
        let a = (k as f64 + 0.5) / q;
        if a >= horizon {
            break;
        }
        let mut t = a.max(prev + h);
        loop {
            let c0 = (t / cycle).floor() * cycle;
            let open = c0 + LOST + h;
            let close = c0 + green;
            if t < open {
                t = open;
                break;
            }
            if t <= close + 1e-9 {
                break;
            }
            t = c0 + cycle;
        }
        prev = t;
        total += t.min(horizon) - a;
        n += 1;
        k += 1;
    }
    total / n as f64
}

/// Deterministic fluid delay for one fixed-time approach.
fn uniform_delay_formula(q: f64, s: f64, cycle: f64, green: f64) -> f64 {
    let lambda = (green - LOST) / cycle;
    0.5 * cycle * (1.0 - lambda).powi(2) / (1.0 - q / s)
}

#[test]
fn fixed_time_delay_matches_replay() {
    let (q, s, c, g) = (0.2, 0.75, 100.0, 50.0);
    let oracle = replay_delay(q, s, c, g, 3600.0);
    let formula = uniform_delay_formula(q, s, c, g);
    assert!((oracle - formula).abs() / formula < 0.05, "replay {oracle} vs formula {formula}");

    let net = single(q, s, Signal::Fixed { cycle: c, start: 0.0, green: g }, f64::INFINITY);
    for step in [0.1, 0.5, 1.0] {
        let m = simulate(&net, 1, &uniform_opts(step)).unwrap();
        let rel = (m.avg_delay - oracle).abs() / oracle;
        assert!(rel < 0.05, "step {step}: sim {} vs replay {oracle}", m.avg_delay);
        assert!(m.counters.conserved());
    }
}

#[test]
fn always_green_has_no_control_delay() {
    let net = single(0.3, 0.75, Signal::AlwaysGreen, f64::INFINITY);
    for arrivals in [ArrivalMode::Uniform, ArrivalMode::Poisson] {
        let opts = SimOptions { arrivals, ..SimOptions::default() };
        let m = simulate(&net, 5, &opts).unwrap();
        assert!(m.counters.generated > 900);
        if arrivals == ArrivalMode::Uniform {
            assert!(m.avg_delay < 1.0, "{}", m.avg_delay);
        }
    }
}

#[test]
fn longer_green_lowers_delay() {
    let mut last = f64::INFINITY;
    for g in [30.0, 40.0, 50.0, 60.0, 70.0] {
        let net = single(0.15, 0.75, Signal::Fixed { cycle: 100.0, start: 0.0, green: g }, f64::INFINITY);
        let d = simulate(&net, 3, &uniform_opts(1.0)).unwrap().avg_delay;
        assert!(d < last, "green {g}: {d} >= {last}");
        last = d;
    }
}

#[test]
fn zero_demand_is_all_zero() {
    let t = build_topology();
    let p = default_params();
    let s = DemandScenario::uniform(1, 0.0);
    let plan = build_benchmark_plan(&s, &t, &p, &BenchmarkConfig::from_params(&p)).unwrap().plan;
    let m = run_simulation(&plan, &s, &t, &p, 9, 3600.0, 1.0).unwrap();
    assert_eq!(m.avg_delay, 0.0);
    assert_eq!(m.avg_queue, 0.0);
    assert!(m.movement_delay.iter().all(|&(_, d)| d == 0.0));
    assert!(m.profile.iter().all(|&(_, d)| d == 0.0));
    assert_eq!(m.counters, Counters::default());
}

#[test]
fn bad_options_are_errors() {
    let net = single(0.1, 0.75, Signal::AlwaysGreen, 10.0);
    let bad_step = SimOptions { step: 0.3, ..SimOptions::default() };
    assert_eq!(simulate(&net, 1, &bad_step).unwrap_err(), SimError::Step(0.3));
    let bad_horizon = SimOptions { horizon: 0.0, ..SimOptions::default() };
    assert_eq!(simulate(&net, 1, &bad_horizon).unwrap_err(), SimError::Horizon);
    let t = build_topology();
    let p = default_params();
    assert_eq!(
        run_simulation(&SignalPlan::default(), &DemandScenario::uniform(1, 100.0), &t, &p, 1, 60.0, 1.0).unwrap_err(),
        SimError::Cycle
    );
}

fn metrics(scenario: Option<u32>, delay: f64) -> SimMetrics {
    SimMetrics {
        scenario,
        avg_delay: delay,
        avg_queue: 2.0 * delay,
        movement_delay: vec![(1, delay), (2, 0.0)],
        profile: Vec::new(),
        counters: Counters::default(),
    }
}

#[test]
fn aggregate_statistics() {
    let s = aggregate(&[metrics(Some(1), 10.0), metrics(Some(1), 20.0)]).unwrap();
    assert_eq!(s.replications, 2);
    assert_eq!(s.delay.mean, 15.0);
    assert!((s.delay.std - 7.0711).abs() < 1e-4);
    assert_eq!(s.queue.mean, 30.0);
    assert_eq!(s.movement_delay[0].1.mean, 15.0);

    let same = vec![metrics(Some(1), 12.5); 5];
    let s = aggregate(&same).unwrap();
    assert_eq!(s.delay.std, 0.0);
    assert_eq!(s.delay.cv(), 0.0);

    assert!(aggregate(&[]).is_err());
    assert!(aggregate(&[metrics(Some(1), 1.0), metrics(Some(2), 1.0)]).is_err());
    let mut other = metrics(Some(1), 1.0);
    other.movement_delay.pop();
    assert!(aggregate(&[metrics(Some(1), 1.0), other]).is_err());
    assert_eq!(Stat::of(&[4.0]).std, 0.0);
}

fn benchmark_case(total: f64, shares: [f64; 8]) -> (SignalPlan, DemandScenario) {
    let t = build_topology();
    let p = default_params();
    let s = DemandScenario::new(3, total, shares).unwrap();
    let plan = build_benchmark_plan(&s, &t, &p, &BenchmarkConfig::from_params(&p)).unwrap().plan;
    (plan, s)
}

#[test]
fn tiny_bay_increases_delay() {
    let t = build_topology();
    let p = default_params();
    let (plan, s) = benchmark_case(4000.0, [0.125; 8]);
    let net = SimNetwork::from_plan(&plan, &s, &t, &p).unwrap();
    let opts = SimOptions::default();
    let base = simulate(&net, 11, &opts).unwrap();
    for (r, route) in net.routes.iter().enumerate() {
        for k in 0..route.stages.len() {
            // Arrivals per cycle on this bay.
            if route.demand * plan.cycle as f64 <= 1.0 {
                continue;
            }
            let mut tight = net.clone();
            tight.routes[r].stages[k].storage = 1.0;
            let m = simulate(&tight, 11, &opts).unwrap();
            assert!(
                m.avg_delay > base.avg_delay,
                "movement {} stage {k}: {} <= {}",
                route.movement,
                m.avg_delay,
                base.avg_delay
            );
            assert!(m.counters.conserved());
        }
    }
}

#[test]
fn replications_vary_little() {
    let t = build_topology();
    let p = default_params();
    let (plan, s) = benchmark_case(4000.0, [0.125; 8]);
    let delays: Vec<f64> = (0..5)
        .map(|rep| run_simulation(&plan, &s, &t, &p, 100 + rep, 3600.0, 1.0).unwrap().avg_delay)
        .collect();
    let st = Stat::of(&delays);
    assert!(st.mean.is_finite() && st.mean > 0.0);
    assert!(st.cv() < 0.2, "{st:?}");
}

fn shares_strategy() -> impl Strategy<Value = [f64; 8]> {
    prop::array::uniform8(0.5f64..2.0).prop_map(|w| {
        let sum: f64 = w.iter().sum();
        let mut s = w.map(|x| x / sum);
        let rest: f64 = s[..7].iter().sum();
        s[7] = 1.0 - rest;
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vehicles_are_conserved_and_runs_repeat(
        shares in shares_strategy(),
        total in 0.0f64..6000.0,
        seed in any::<u64>(),
        step in prop::sample::select(vec![1.0, 0.5, 0.25]),
    ) {
        let t = build_topology();
        let p = default_params();
        let (plan, s) = benchmark_case(total, shares);
        let opts = SimOptions { horizon: 900.0, step, ..SimOptions::default() };
        let a = run_with(&plan, &s, &t, &p, seed, &opts).unwrap();
        let b = run_with(&plan, &s, &t, &p, seed, &opts).unwrap();
        prop_assert!(a.counters.conserved());
        let c = a.counters;
        prop_assert_eq!(c.generated, c.discharged + c.in_network + c.denied);
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        prop_assert!(a.avg_delay >= 0.0 && a.avg_queue >= 0.0);
    }
}
