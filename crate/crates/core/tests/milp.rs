use std::time::Duration;

use cfi_core::milp::{
    check_point, solve_lp, solve_milp, solve_milp_with, write_lp, LinExpr, LinearProblem, MilpOptions, Relation,
    Sense, SolveStatus, ViolationKind,
};
use proptest::prelude::*;

#[test]
fn one_variable_lp() {
    let mut p = LinearProblem::new("one");
    let x = p.add_var("x", 0.0, f64::INFINITY);
    p.set_objective(Sense::Maximize, LinExpr::var(x));
    p.add_constraint("cap", vec![(x, 1.0)], Relation::Le, 3.0);
    let s = solve_lp(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.value(x) - 3.0).abs() < 1e-9);
    assert!((s.objective - 3.0).abs() < 1e-9);
}

#[test]
fn degenerate_face_reports_objective() {
    let mut p = LinearProblem::new("face");
    let x = p.add_var("x", 0.0, f64::INFINITY);
    let y = p.add_var("y", 0.0, f64::INFINITY);
    p.set_objective(Sense::Maximize, LinExpr::var(x) + LinExpr::var(y));
    p.add_constraint("cap", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
    let s = solve_lp(&p);
    assert_eq!(s.status, SolveStatus::Optimal);
    assert!((s.objective - 1.0).abs() < 1e-9);
    assert!(check_point(&p, &s.values, 1e-7).is_empty());
}

#[test]
fn rounding_infeasible_relaxation() {
    let mut p = LinearProblem::new("half");
    let y = p.add_binary("y");
    p.set_objective(Sense::Maximize, LinExpr::var(y));
    p.add_constraint("half", vec![(y, 1.0)], Relation::Le, 0.5);
    let s = solve_milp(&p, Duration::from_secs(5));
    assert_eq!(s.status, SolveStatus::Optimal);
    assert_eq!(s.value(y), 0.0);
    assert_eq!(s.objective, 0.0);
}

#[test]
fn two_item_knapsack() {
    let mut p = LinearProblem::new("knap");
    let a = p.add_binary("a");
    let b = p.add_binary("b");
    p.set_objective(Sense::Maximize, LinExpr::term(a, 3.0) + LinExpr::term(b, 2.0));
    p.add_constraint("cap", vec![(a, 1.0), (b, 1.0)], Relation::Le, 1.0);
    let s = solve_milp(&p, Duration::from_secs(5));
    assert_eq!(s.status, SolveStatus::Optimal);
    assert_eq!((s.value(a), s.value(b)), (1.0, 0.0));
    assert!((s.objective - 3.0).abs() < 1e-9);
}

#[test]
fn fractional_relaxation_shows_integrality_violation() {
    let mut p = LinearProblem::new("frac");
    let a = p.add_binary("a");
    let b = p.add_binary("b");
    p.set_objective(Sense::Maximize, LinExpr::term(a, 2.0) + LinExpr::term(b, 2.0));
    p.add_constraint("cap", vec![(a, 2.0), (b, 2.0)], Relation::Le, 3.0);
    let relax = solve_lp(&p);
    assert_eq!(relax.status, SolveStatus::Optimal);
    let v = check_point(&p, &relax.values, 1e-7);
    assert!(v.iter().any(|v| v.kind == ViolationKind::Integrality));
}

#[test]
fn infeasible_milp_and_no_incumbent_statuses() {
    let mut p = LinearProblem::new("inf");
    let a = p.add_binary("a");
    let b = p.add_binary("b");
    p.add_constraint("odd", vec![(a, 2.0), (b, 2.0)], Relation::Eq, 1.0);
    assert_eq!(solve_milp(&p, Duration::from_secs(5)).status, SolveStatus::Infeasible);

    let opts = MilpOptions {
        node_limit: Some(1),
        ..MilpOptions::default()
    };
    let s = solve_milp_with(&p, &opts);
    assert_eq!(s.status, SolveStatus::TimeoutNoIncumbent);
    assert!(s.values.is_empty());
}

#[test]
fn malformed_problem_is_solver_failure() {
    let mut p = LinearProblem::new("bad");
    p.add_var("x", 2.0, 1.0);
    let s = solve_lp(&p);
    assert_eq!(s.status, SolveStatus::SolverFailure);
    assert!(s.message.is_some());
}

#[test]
fn initial_solution_is_used_as_incumbent() {
    let mut p = LinearProblem::new("start");
    let ys: Vec<_> = (0..12).map(|i| p.add_binary(format!("y{i}"))).collect();
    let w: Vec<f64> = (0..12).map(|i| 3.0 + (i * 7 % 5) as f64).collect();
    p.set_objective(Sense::Maximize, LinExpr::from_terms(ys.iter().zip(&w).map(|(&y, &c)| (y, c))));
    p.add_constraint("cap", ys.iter().zip(&w).map(|(&y, &c)| (y, c + 1.0)).collect(), Relation::Le, 20.0);
    let mut start = vec![0.0; 12];
    start[0] = 1.0;
    let opts = MilpOptions {
        node_limit: Some(2),
        initial_solution: Some(start),
        ..MilpOptions::default()
    };
    let s = solve_milp_with(&p, &opts);
    assert!(s.status.has_solution());
    assert!(s.objective >= 3.0);
    assert!(check_point(&p, &s.values, 1e-7).is_empty());
}

#[test]
fn lp_dump_is_stable() {
    let mut p = LinearProblem::new("dump");
    let x = p.add_var("x", 0.0, 1.0);
    p.set_objective(Sense::Minimize, LinExpr::var(x));
    assert_eq!(write_lp(&p), write_lp(&p.clone()));
    assert!(write_lp(&p).starts_with("\\ dump\nMinimize\n"));
}

/// Brute-force LP optimum over a bounded box: enumerate every vertex defined by
/// `n` tight constraints among rows and bounds.
fn vertex_oracle(a: &[Vec<f64>], b: &[f64], c: &[f64], hi: f64) -> Option<f64> {
    let n = c.len();
    let mut planes: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), hi));
        planes.push((e.iter().map(|v| -v).collect(), 0.0));
    }
    let m = planes.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        // Solve the n x n system by Gaussian elimination.
        let mut mat: Vec<Vec<f64>> = idx.iter().map(|&k| {
            let mut r = planes[k].0.clone();
            r.push(planes[k].1);
            r
        }).collect();
        let mut ok = true;
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| mat[x][col].abs().total_cmp(&mat[y][col].abs())).unwrap();
            if mat[piv][col].abs() < 1e-9 {
                ok = false;
                break;
            }
            mat.swap(col, piv);
            for r in 0..n {
                if r != col {
                    let f = mat[r][col] / mat[col][col];
                    for k in col..=n {
                        mat[r][k] -= f * mat[col][k];
                    }
                }
            }
        }
        if ok {
            let x: Vec<f64> = (0..n).map(|i| mat[i][n] / mat[i][i]).collect();
            let feasible = planes.iter().all(|(row, rhs)| {
                row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= rhs + 1e-7
            });
            if feasible {
                let z: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(z, |bz: f64| bz.max(z)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < m - n + i {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn small_lp() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (2usize..4, 1usize..5).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(-5i32..6, n), m),
            prop::collection::vec(-4i32..12, m),
            prop::collection::vec(-5i32..6, n),
        )
            .prop_map(|(a, b, c)| {
                (
                    a.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect(),
                    b.into_iter().map(f64::from).collect(),
                    c.into_iter().map(f64::from).collect(),
                )
            })
    })
}

fn build(a: &[Vec<f64>], b: &[f64], c: &[f64], hi: f64, binary: bool) -> LinearProblem {
    let mut p = LinearProblem::new("rand");
    let vars: Vec<_> = (0..c.len())
        .map(|j| if binary { p.add_binary(format!("y{j}")) } else { p.add_var(format!("x{j}"), 0.0, hi) })
        .collect();
    p.set_objective(Sense::Maximize, LinExpr::from_terms(vars.iter().zip(c).map(|(&v, &k)| (v, k))));
    for (i, (row, &rhs)) in a.iter().zip(b).enumerate() {
        p.add_constraint(format!("r{i}"), vars.iter().zip(row).map(|(&v, &k)| (v, k)).collect(), Relation::Le, rhs);
    }
    p
}

proptest! {
    #[test]
    fn lp_matches_vertex_enumeration((a, b, c) in small_lp()) {
        let p = build(&a, &b, &c, 10.0, false);
        let s = solve_lp(&p);
        match vertex_oracle(&a, &b, &c, 10.0) {
            Some(z) => {
                prop_assert_eq!(s.status, SolveStatus::Optimal);
                prop_assert!((s.objective - z).abs() < 1e-6, "{} vs {}", s.objective, z);
                prop_assert!(check_point(&p, &s.values, 1e-7).is_empty());
                prop_assert!((p.objective_value(&s.values) - s.objective).abs() < 1e-6);
            }
            None => prop_assert_eq!(s.status, SolveStatus::Infeasible),
        }
    }

    #[test]
    fn milp_matches_exhaustive_enumeration((a, b, c) in small_lp()) {
        let p = build(&a, &b, &c, 1.0, true);
        let n = c.len();
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << n) {
            let x: Vec<f64> = (0..n).map(|j| f64::from((mask >> j) & 1)).collect();
            if check_point(&p, &x, 1e-9).is_empty() {
                let z = p.objective_value(&x);
                best = Some(best.map_or(z, |bz: f64| bz.max(z)));
            }
        }
        let s = solve_milp(&p, Duration::from_secs(5));
        let root = solve_lp(&p);
        match best {
            Some(z) => {
                prop_assert_eq!(s.status, SolveStatus::Optimal);
                prop_assert!((s.objective - z).abs() < 1e-6);
                prop_assert!(check_point(&p, &s.values, 1e-7).is_empty());
                prop_assert!(s.objective <= root.objective + 1e-6);
            }
            None => prop_assert_eq!(s.status, SolveStatus::Infeasible),
        }
    }

    #[test]
    fn solves_are_deterministic((a, b, c) in small_lp()) {
        let p = build(&a, &b, &c, 1.0, true);
        let s1 = solve_milp_with(&p, &MilpOptions::default());
        let s2 = solve_milp_with(&p, &MilpOptions::default());
        prop_assert_eq!(s1.status, s2.status);
        prop_assert_eq!(format!("{:?}", s1.values), format!("{:?}", s2.values));
        prop_assert_eq!(s1.stats.nodes, s2.stats.nodes);
    }
}
