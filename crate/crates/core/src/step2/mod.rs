//! Offsets and green bands given fixed cycle and greens.

mod build;
mod diagram;
mod evaluate;
mod extract;
mod instance;
mod oracle;
mod search;

use std::time::Duration;

use thiserror::Error;

use crate::milp::{solve_milp_with, MilpOptions, SolveStatus, SolverStats};
use crate::model::{DemandScenario, ModelParams, MovementTable, SignalPlan};
use crate::step1::Step1Solution;

pub use build::{build_step2, Step2Model};
pub use diagram::time_space_csv;
pub use evaluate::{band_with_cases, evaluate_movement, evaluate_offsets, no_band_allowed, MovementOutcome};
pub use extract::{extract_plan, plan_from_outcomes, start_vector, ExtractionPath, Extracted};
pub use instance::{MovementData, PairData, Step2Instance};
pub use oracle::{brute_force_offsets, OracleError, ORACLE_BUDGET};
pub use search::{best_grid_offsets, GridOptimum, INFEASIBLE_PENALTY};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Step2Error {
    #[error("no green for movement {movement} at intersection {intersection}")]
    MissingGreen { intersection: usize, movement: usize },
    #[error("offset problem has no incumbent ({0})")]
    NoIncumbent(SolveStatus),
    #[error("rounded offsets admit no valid band choice")]
    Extraction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step2Options {
    pub time_limit: Duration,
    /// Branch-and-bound node budget; keeps results independent of machine speed.
    pub node_limit: Option<u64>,
    /// Seed the MILP with the exact one-second grid optimum.
    pub warm_start: bool,
}

impl Default for Step2Options {
    fn default() -> Self {
        Step2Options {
            time_limit: Duration::from_secs(20),
            node_limit: Some(300),
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step2Outcome {
    pub plan: SignalPlan,
    pub status: SolveStatus,
    /// Weighted bandwidth of the integer plan.
    pub objective: f64,
    pub milp_objective: f64,
    pub best_bound: f64,
    pub grid_objective: Option<f64>,
    pub extraction: ExtractionPath,
    pub stats: SolverStats,
}

pub fn solve_step2(
    timings: &Step1Solution,
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
    options: &Step2Options,
) -> Result<Step2Outcome, Step2Error> {
    let base = timings.plan(table);
    let inst = Step2Instance::new(timings, scenario, table, params)?;
    let model = build_step2(&inst);
    let grid = options.warm_start.then(|| best_grid_offsets(&inst, 1.0));
    let initial_solution = grid
        .as_ref()
        .filter(|g| g.infeasible == 0)
        .map(|g| start_vector(&inst, &model, &g.thetas, &g.outcomes));
    let milp = MilpOptions {
        time_limit: Some(options.time_limit),
        node_limit: options.node_limit,
        initial_solution,
        ..MilpOptions::default()
    };
    let solution = solve_milp_with(&model.problem, &milp);
    let extracted = extract_plan(&solution, &model, &inst, &base)?;
    Ok(Step2Outcome {
        plan: extracted.plan,
        status: solution.status,
        objective: extracted.objective,
        milp_objective: solution.objective,
        best_bound: solution.best_bound,
        grid_objective: grid.filter(|g| g.infeasible == 0).map(|g| g.objective),
        extraction: extracted.path,
        stats: solution.stats,
    })
}
