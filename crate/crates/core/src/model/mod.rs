//! Continuous-flow intersection geometry, parameters, demand scenarios and signal plans.

mod band;
mod capacity;
mod params;
mod plan;
mod plan_io;
mod scenario;
mod topology;
mod validate;

pub use band::{case_residual, rows_for_case, uncoordinated_period, CaseRow, PairTiming, CASE_ROWS};
pub use capacity::{capacity_row, clearance_row, queue_extent, queue_row, Oversaturated, StopLineRow};
pub use params::{default_params, ModelParams, ParamsError};
pub use plan::{BandDiagnostics, MovementBand, SignalPlan};
pub use plan_io::{plan_from_text, plan_to_text, PlanParseError, PLAN_HEADER};
pub use scenario::{classify_shares, BalanceClass, DemandScenario, Labels, ScenarioError, Thresholds, TurnClass};
pub use topology::{
    build_topology, rotate_intersection, rotate_movement, Movement, MovementKind, MovementTable, Pair, PairKind,
    Phase, INTERSECTIONS, MAIN, MOVEMENTS,
};
pub use validate::{coordinated_pairs, validate_plan, PlanViolation, ViolationClass, REPLAY_TOL};
