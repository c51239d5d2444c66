//! Point-queue simulation of fixed-time plans with finite bay storage.

mod engine;
mod metrics;
mod network;

pub use engine::{simulate, ArrivalMode, SimOptions};
pub use metrics::{aggregate, Counters, SimMetrics, Stat, SummaryStats};
pub use network::{approach_of, Signal, SimError, SimNetwork, SimRoute, SimStage};

use crate::model::{DemandScenario, ModelParams, MovementTable, SignalPlan};

/// Simulates `plan` under Poisson arrivals for `horizon` seconds.
pub fn run_simulation(
    plan: &SignalPlan,
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
    seed: u64,
    horizon: f64,
    step: f64,
) -> Result<SimMetrics, SimError> {
    let opts = SimOptions {
        horizon,
        step,
        ..SimOptions::default()
    };
    run_with(plan, scenario, table, params, seed, &opts)
}

pub fn run_with(
    plan: &SignalPlan,
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
    seed: u64,
    opts: &SimOptions,
) -> Result<SimMetrics, SimError> {
    let net = SimNetwork::from_plan(plan, scenario, table, params)?;
    let mut m = simulate(&net, seed, opts)?;
    m.scenario = Some(scenario.id);
    Ok(m)
}
