//! Exact offset optimum on an integer grid.
//!
//! With the main offset fixed, each through movement depends on one sub offset
//! and each right turn on two adjacent ones, so the objective is a sum of unary
//! and pairwise terms around the ring 1-2-3-4-1 and can be maximized by dynamic
//! programming after fixing the first offset.

use crate::model::MAIN;

use super::evaluate::{evaluate_movement, evaluate_offsets, MovementOutcome};
use super::instance::Step2Instance;

/// Score charged per movement that has no admissible band choice.
pub const INFEASIBLE_PENALTY: f64 = 1e4;

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub thetas: [f64; 5],
    pub objective: f64,
    pub infeasible: usize,
    pub outcomes: Vec<MovementOutcome>,
}

fn score(inst: &Step2Instance, i: usize, o: &MovementOutcome) -> f64 {
    if o.is_feasible() {
        inst.movement(i).eta * o.width()
    } else {
        -INFEASIBLE_PENALTY
    }
}

/// Per-movement score tables over the grid.
pub(crate) struct Tables {
    pub grid: Vec<f64>,
    /// Unary terms per sub (index l-1 for l in 1..=4), indexed by grid position.
    pub unary: [Vec<f64>; 4],
    /// Pairwise term between subs (l, l % 4 + 1): `pair[l-1][a * n + b]`.
    pub pair: [Vec<f64>; 4],
}

pub(crate) fn tables(inst: &Step2Instance, step: f64) -> Tables {
    let count = (inst.cycle / step).round() as usize;
    let grid: Vec<f64> = (0..count).map(|k| k as f64 * step).collect();
    let n = grid.len();
    let mut unary: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n]);
    let mut pair: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; n * n]);
    for m in &inst.movements {
        let subs: Vec<usize> = m.path.iter().copied().filter(|&l| l != MAIN).collect();
        match subs.as_slice() {
            [l] => {
                for (a, &th) in grid.iter().enumerate() {
                    let mut t = [0.0; 5];
                    t[l - 1] = th;
                    unary[l - 1][a] += score(inst, m.id, &evaluate_movement(inst, m, &t));
                }
            }
            [x, e] => {
                assert_eq!(*e, x % 4 + 1, "right turns exit at the next sub around the ring");
                for (a, &ta) in grid.iter().enumerate() {
                    for (b, &tb) in grid.iter().enumerate() {
                        let mut t = [0.0; 5];
                        t[x - 1] = ta;
                        t[e - 1] = tb;
                        pair[x - 1][a * n + b] += score(inst, m.id, &evaluate_movement(inst, m, &t));
                    }
                }
            }
            _ => unreachable!("movement paths pass one or two subs"),
        }
    }
    Tables { grid, unary, pair }
}

/// Maximizes the ring objective exactly over the grid with spacing `step`.
pub fn best_grid_offsets(inst: &Step2Instance, step: f64) -> GridOptimum {
    let t = tables(inst, step);
    let n = t.grid.len();
    let mut best: Option<(f64, [usize; 4])> = None;
    let mut v2 = vec![0.0; n];
    let mut v3 = vec![0.0; n];
    let mut v4 = vec![0.0; n];
    let mut arg3 = vec![0usize; n];
    let mut arg4 = vec![0usize; n];
    for a1 in 0..n {
        for a2 in 0..n {
            v2[a2] = t.unary[0][a1] + t.pair[0][a1 * n + a2] + t.unary[1][a2];
        }
        for a3 in 0..n {
            let mut bv = f64::NEG_INFINITY;
            let mut ba = 0;
            for a2 in 0..n {
                let v = v2[a2] + t.pair[1][a2 * n + a3];
                if v > bv {
                    bv = v;
                    ba = a2;
                }
            }
            v3[a3] = bv + t.unary[2][a3];
            arg3[a3] = ba;
        }
        for a4 in 0..n {
            let mut bv = f64::NEG_INFINITY;
            let mut ba = 0;
            for a3 in 0..n {
                let v = v3[a3] + t.pair[2][a3 * n + a4];
                if v > bv {
                    bv = v;
                    ba = a3;
                }
            }
            v4[a4] = bv + t.unary[3][a4];
            arg4[a4] = ba;
        }
        for a4 in 0..n {
            let v = v4[a4] + t.pair[3][a4 * n + a1];
            if best.is_none_or(|(bv, _)| v > bv + 1e-9) {
                let a3 = arg4[a4];
                let a2 = arg3[a3];
                best = Some((v, [a1, a2, a3, a4]));
            }
        }
    }
    let (_, idx) = best.expect("grid is non-empty");
    let thetas = [t.grid[idx[0]], t.grid[idx[1]], t.grid[idx[2]], t.grid[idx[3]], 0.0];
    let (outcomes, objective, infeasible) = evaluate_offsets(inst, &thetas);
    GridOptimum {
        thetas,
        objective,
        infeasible,
        outcomes,
    }
}
