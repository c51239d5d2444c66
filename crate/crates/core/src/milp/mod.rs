//! Self-contained LP/MILP engine: bounded dual simplex plus best-bound branch and bound on binaries.

mod bnb;
mod check;
mod lpformat;
mod presolve;
mod problem;
mod simplex;
mod solution;

use std::time::Duration;

pub use check::{check_point, check_point_with, Violation, ViolationKind};
pub use lpformat::write_lp;
pub use problem::{Constraint, LinExpr, LinearProblem, ProblemError, Relation, Sense, VarId, Variable};
pub use solution::{Solution, SolveStatus, SolverStats};

pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MilpOptions {
    pub time_limit: Option<Duration>,
    /// Deterministic work budget; reaching it returns the incumbent as `FeasibleIncumbent`.
    pub node_limit: Option<u64>,
    pub gap_rel: f64,
    pub integrality: f64,
    pub feasibility: f64,
    /// Full variable vector used as a MIP start (binaries are rounded and the LP re-solved).
    pub initial_solution: Option<Vec<f64>>,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            time_limit: None,
            node_limit: None,
            gap_rel: 1e-6,
            integrality: INTEGRALITY_TOL,
            feasibility: FEASIBILITY_TOL,
            initial_solution: None,
        }
    }
}

/// Solves the continuous relaxation (binary flags are ignored).
pub fn solve_lp(problem: &LinearProblem) -> Solution {
    bnb::solve(problem, &MilpOptions::default(), true)
}

pub fn solve_milp(problem: &LinearProblem, time_limit: Duration) -> Solution {
    solve_milp_with(
        problem,
        &MilpOptions {
            time_limit: Some(time_limit),
            ..MilpOptions::default()
        },
    )
}

pub fn solve_milp_with(problem: &LinearProblem, options: &MilpOptions) -> Solution {
    bnb::solve(problem, options, false)
}
