//! End-to-end plan construction for both models.

use std::fmt;
use std::time::{Duration, Instant};

use crate::benchmark::{build_benchmark_plan, BenchmarkConfig};
use crate::model::{validate_plan, DemandScenario, ModelParams, MovementTable, PlanViolation, SignalPlan};
use crate::step1::solve_step1;
use crate::step2::{solve_step2, Step2Options};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Proposed,
    Benchmark,
}

impl Model {
    pub const ALL: [Model; 2] = [Model::Proposed, Model::Benchmark];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Proposed => "proposed",
            Model::Benchmark => "benchmark",
        }
    }

    pub fn parse(s: &str) -> Option<Model> {
        match s {
            "proposed" => Some(Model::Proposed),
            "benchmark" => Some(Model::Benchmark),
            _ => None,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub model: Model,
    pub plan: Option<SignalPlan>,
    /// Solver status for the proposed model, `ok` or `fallback` for the benchmark, or the failure reason.
    pub status: String,
    /// Weighted bandwidth of the proposed plan.
    pub objective: Option<f64>,
    pub solve_time: Duration,
    pub violations: Vec<PlanViolation>,
    pub message: Option<String>,
}

pub fn optimize(
    model: Model,
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
    step2: &Step2Options,
) -> PlanOutcome {
    let started = Instant::now();
    let mut out = PlanOutcome {
        model,
        plan: None,
        status: String::new(),
        objective: None,
        solve_time: Duration::ZERO,
        violations: Vec::new(),
        message: None,
    };
    match model {
        Model::Proposed => match solve_step1(scenario, table, params) {
            Err(e) => {
                out.status = "step1-infeasible".into();
                out.message = Some(e.to_string());
            }
            Ok(s1) => {
                let t2 = Instant::now();
                let res = solve_step2(&s1, scenario, table, params, step2);
                out.solve_time = t2.elapsed();
                match res {
                    Err(e) => {
                        out.status = match e {
                            crate::step2::Step2Error::NoIncumbent(s) => s.as_str().to_string(),
                            _ => "step2-error".into(),
                        };
                        out.message = Some(e.to_string());
                    }
                    Ok(o) => {
                        out.status = o.status.as_str().to_string();
                        out.objective = Some(o.objective);
                        out.plan = Some(o.plan);
                    }
                }
            }
        },
        Model::Benchmark => match build_benchmark_plan(scenario, table, params, &BenchmarkConfig::from_params(params)) {
            Err(e) => {
                out.status = "benchmark-error".into();
                out.message = Some(e.to_string());
            }
            Ok(b) => {
                out.status = if b.fallback { "fallback" } else { "ok" }.into();
                out.plan = Some(b.plan);
                out.solve_time = started.elapsed();
            }
        },
    }
    if let Some(plan) = &out.plan {
        out.violations = match model {
            Model::Proposed => validate_plan(plan, scenario, table, params),
            // Benchmark plans only need to be structurally sound.
            Model::Benchmark => validate_plan(plan, scenario, table, params)
                .into_iter()
                .filter(|v| v.class == crate::model::ViolationClass::Structural)
                .collect(),
        };
    }
    out
}
