use thiserror::Error;

use crate::model::{DemandScenario, ModelParams, MovementTable, SignalPlan};
use crate::step1::Step1Solution;

use super::evaluate::evaluate_offsets;
use super::extract::plan_from_outcomes;
use super::instance::Step2Instance;
use super::search::tables;
use super::Step2Error;

/// Largest number of offset assignments the exhaustive oracle will visit.
pub const ORACLE_BUDGET: u64 = 5_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("grid step {step} s does not divide cycle {cycle} s")]
    Step { step: i64, cycle: i64 },
    #[error("grid of {assignments} assignments exceeds budget of {ORACLE_BUDGET}")]
    Budget { assignments: u64 },
    #[error("no grid assignment gives every movement an admissible band choice")]
    NoFeasibleOffsets,
    #[error(transparent)]
    Instance(#[from] Step2Error),
}

/// Exhaustive search over offsets on a grid; returns the best plan and its weighted band objective.
pub fn brute_force_offsets(
    timings: &Step1Solution,
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
    grid_step: i64,
) -> Result<(SignalPlan, f64), OracleError> {
    let cycle = timings.cycle;
    if grid_step <= 0 || cycle % grid_step != 0 {
        return Err(OracleError::Step { step: grid_step, cycle });
    }
    let per_axis = (cycle / grid_step) as u64;
    let assignments = per_axis.saturating_pow(4);
    if assignments > ORACLE_BUDGET {
        return Err(OracleError::Budget { assignments });
    }
    let inst = Step2Instance::new(timings, scenario, table, params)?;
    let t = tables(&inst, grid_step as f64);
    let n = t.grid.len();
    let mut best: Option<(f64, [usize; 4])> = None;
    for a in 0..n {
        for b in 0..n {
            let ab = t.unary[0][a] + t.unary[1][b] + t.pair[0][a * n + b];
            for c in 0..n {
                let abc = ab + t.unary[2][c] + t.pair[1][b * n + c];
                for d in 0..n {
                    let v = abc + t.unary[3][d] + t.pair[2][c * n + d] + t.pair[3][d * n + a];
                    if best.is_none_or(|(bv, _)| v > bv + 1e-9) {
                        best = Some((v, [a, b, c, d]));
                    }
                }
            }
        }
    }
    let (_, idx) = best.expect("grid is non-empty");
    let thetas = [t.grid[idx[0]], t.grid[idx[1]], t.grid[idx[2]], t.grid[idx[3]], 0.0];
    let (outcomes, objective, infeasible) = evaluate_offsets(&inst, &thetas);
    if infeasible > 0 {
        return Err(OracleError::NoFeasibleOffsets);
    }
    Ok((plan_from_outcomes(&inst, &timings.plan(table), &thetas, &outcomes), objective))
}
