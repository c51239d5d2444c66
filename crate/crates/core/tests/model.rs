use cfi_core::model::{
    build_topology, default_params, plan_from_text, plan_to_text, rotate_intersection, rotate_movement,
    validate_plan, DemandScenario, Phase, SignalPlan, ViolationClass, INTERSECTIONS, MAIN, MOVEMENTS,
};
use cfi_core::pipeline::{optimize, Model};
use cfi_core::step2::Step2Options;

fn pair_times(i: usize) -> Vec<(usize, usize, f64)> {
    build_topology().pairs(i).iter().map(|p| (p.from, p.to, p.travel_time)).collect()
}

#[test]
fn right_turn_from_sub_one_passes_three_pairs() {
    let mut got = pair_times(2);
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(got, vec![(1, 2, 26.0), (1, 5, 15.0), (5, 2, 11.0)]);
}

#[test]
fn through_movements_queue_at_main() {
    let t = build_topology();
    for i in [1, 3, 5, 7] {
        assert_eq!(t.first(i), MAIN);
    }
    assert_eq!(t.first(2), 1);
}

#[test]
fn main_phase_groups() {
    let t = build_topology();
    let (a, b) = t.phase_groups(MAIN);
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort();
    b.sort();
    assert_eq!(a, vec![1, 2, 5, 6]);
    assert_eq!(b, vec![3, 4, 7, 8]);
}

#[test]
fn parameter_values() {
    let t = build_topology();
    let p = default_params();
    assert_eq!(p.alpha(&t, MAIN, 1), 0.65);
    for (l, i) in t.stop_lines() {
        assert_eq!(p.s(l, i), 0.75);
    }
    assert_eq!(t.stopline_capacity(2), 9.0);
    assert_eq!(p.lost_time, 3.0);
    assert_eq!((p.cycle_min, p.cycle_max), (40.0, 150.0));
    assert_eq!((p.green_min, p.green_max), (10.0, 140.0));
    assert_eq!(p.min_band, 5.0);
    assert!(p.validate().is_ok());
}

#[test]
fn rotation_is_closed() {
    let t = build_topology();
    for i in MOVEMENTS {
        let r = rotate_movement(i);
        assert_eq!(t.movement(r).kind, t.movement(i).kind);
        let rotated: Vec<usize> = t.path(i).iter().map(|&l| rotate_intersection(l)).collect();
        assert_eq!(t.path(r), rotated.as_slice());
    }
    for l in INTERSECTIONS {
        for ph in [Phase::A, Phase::B] {
            let mut g: Vec<usize> = t.group(l, ph).iter().map(|&i| rotate_movement(i)).collect();
            g.sort();
            let rl = rotate_intersection(l);
            let hit = [Phase::A, Phase::B].iter().any(|&q| {
                let mut h = t.group(rl, q).to_vec();
                h.sort();
                h == g
            });
            assert!(hit, "group {ph} at {l} does not map onto a group at {rl}");
        }
    }
    let mut i = 1;
    for _ in 0..4 {
        i = rotate_movement(i);
    }
    assert_eq!(i, 1);
}

#[test]
fn each_movement_in_exactly_one_group_on_its_path() {
    let t = build_topology();
    for i in MOVEMENTS {
        for l in INTERSECTIONS {
            let n = [Phase::A, Phase::B].iter().filter(|&&p| t.group(l, p).contains(&i)).count();
            let expected = usize::from(t.path(i).contains(&l));
            assert_eq!(n, expected, "movement {i} at {l}");
        }
    }
}

fn uniform_plan() -> SignalPlan {
    let t = build_topology();
    SignalPlan::from_phases(&t, 60, &[[30, 30]; 5], &[0; 5])
}

#[test]
fn offset_equal_to_cycle_is_structural() {
    let t = build_topology();
    let p = default_params();
    let s = DemandScenario::uniform(1, 4000.0);
    let mut plan = uniform_plan();
    plan.offsets.insert(1, plan.cycle);
    let v = validate_plan(&plan, &s, &t, &p);
    assert!(v.iter().any(|x| x.class == ViolationClass::Structural && x.rule == "offset out of range"));
}

#[test]
fn phase_sum_short_of_cycle_is_reported() {
    let t = build_topology();
    let p = default_params();
    let s = DemandScenario::uniform(1, 4000.0);
    let mut plan = uniform_plan();
    for &i in t.group(MAIN, Phase::B) {
        plan.greens.insert((MAIN, i), 29);
    }
    assert_eq!(plan.green(MAIN, 1).unwrap() + plan.green(MAIN, 3).unwrap(), plan.cycle - 1);
    let v = validate_plan(&plan, &s, &t, &p);
    assert!(!v.is_empty());
    assert!(v.iter().any(|x| x.at.contains(&format!("intersection {MAIN}"))), "{v:?}");
}

#[test]
fn missing_green_is_structural() {
    let t = build_topology();
    let p = default_params();
    let s = DemandScenario::uniform(1, 4000.0);
    let mut plan = uniform_plan();
    plan.greens.remove(&(MAIN, 3));
    let v = validate_plan(&plan, &s, &t, &p);
    assert!(v.iter().any(|x| x.class == ViolationClass::Structural && x.rule == "missing green"));
}

#[test]
fn pipeline_plan_replays_clean_and_is_pure() {
    let t = build_topology();
    let p = default_params();
    let s = DemandScenario::uniform(1, 4000.0);
    let out = optimize(Model::Proposed, &s, &t, &p, &Step2Options::default());
    let plan = out.plan.expect("uniform scenario solves");
    let v = validate_plan(&plan, &s, &t, &p);
    assert!(v.is_empty(), "{v:?}");
    assert_eq!(validate_plan(&plan, &s, &t, &p), v);

    let text = plan_to_text(&plan);
    let back = plan_from_text(&text).unwrap();
    assert_eq!(back, plan);
    assert_eq!(plan_to_text(&back), text);
}
