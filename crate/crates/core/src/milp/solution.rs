use std::fmt;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    /// Best incumbent when a deterministic work budget (node limit) ran out.
    FeasibleIncumbent,
    Infeasible,
    Unbounded,
    TimeoutWithIncumbent,
    TimeoutNoIncumbent,
    /// Singular basis, iteration cap, or a malformed problem.
    SolverFailure,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(
            self,
            SolveStatus::Optimal | SolveStatus::FeasibleIncumbent | SolveStatus::TimeoutWithIncumbent
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleIncumbent => "feasible-incumbent",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::TimeoutWithIncumbent => "timeout-with-incumbent",
            SolveStatus::TimeoutNoIncumbent => "timeout-no-incumbent",
            SolveStatus::SolverFailure => "solver-failure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "optimal" => SolveStatus::Optimal,
            "feasible-incumbent" => SolveStatus::FeasibleIncumbent,
            "infeasible" => SolveStatus::Infeasible,
            "unbounded" => SolveStatus::Unbounded,
            "timeout-with-incumbent" => SolveStatus::TimeoutWithIncumbent,
            "timeout-no-incumbent" => SolveStatus::TimeoutNoIncumbent,
            "solver-failure" => SolveStatus::SolverFailure,
            _ => return None,
        })
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    pub iterations: u64,
    pub nodes: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Best proven bound on the objective (the LP optimum for pure LPs).
    pub best_bound: f64,
    pub stats: SolverStats,
    pub message: Option<String>,
}

impl Solution {
    pub(crate) fn without_point(status: SolveStatus, stats: SolverStats) -> Self {
        Solution {
            status,
            values: Vec::new(),
            objective: f64::NAN,
            best_bound: f64::NAN,
            stats,
            message: None,
        }
    }

    pub fn value(&self, v: super::VarId) -> f64 {
        self.values[v.0]
    }
}
