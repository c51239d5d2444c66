use thiserror::Error;

use crate::model::{DemandScenario, ModelParams, MovementTable, SignalPlan};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("plan has no timing for movement {movement} at intersection {intersection}")]
    MissingTiming { intersection: usize, movement: usize },
    #[error("plan cycle must be positive")]
    Cycle,
    #[error("step must be 1/n seconds for an integer n, got {0}")]
    Step(f64),
    #[error("horizon must be positive")]
    Horizon,
    #[error("cannot aggregate: {0}")]
    Aggregate(String),
}

/// Fixed-time signal seen by one stop line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Signal {
    AlwaysGreen,
    Fixed {
        cycle: f64,
        /// Offset plus phase start: green begins at this time (mod cycle).
        start: f64,
        green: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStage {
    pub intersection: usize,
    /// Queued vehicles that fit behind this stop line before the upstream one is blocked.
    pub storage: f64,
    /// Free-flow time from the previous stop line, s.
    pub travel_time: f64,
    /// Discharge rate during effective green, veh/s.
    pub rate: f64,
    pub signal: Signal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRoute {
    pub movement: usize,
    /// Index of the shared entry queue.
    pub entry: usize,
    /// veh/s.
    pub demand: f64,
    pub stages: Vec<SimStage>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimNetwork {
    pub routes: Vec<SimRoute>,
    pub entries: usize,
    pub lost_time: f64,
}

/// Movements sharing an approach: each through movement with the displaced right turn entering beside it.
pub fn approach_of(i: usize) -> usize {
    (i - 1) / 2
}

impl SimNetwork {
    pub fn from_plan(
        plan: &SignalPlan,
        scenario: &DemandScenario,
        table: &MovementTable,
        params: &ModelParams,
    ) -> Result<Self, SimError> {
        if plan.cycle <= 0 {
            return Err(SimError::Cycle);
        }
        let mut routes = Vec::new();
        for m in table.movements() {
            let mut stages = Vec::new();
            for (k, &l) in m.path.iter().enumerate() {
                let missing = SimError::MissingTiming { intersection: l, movement: m.id };
                let g = plan.green(l, m.id).ok_or(missing.clone())?;
                let r = plan.start(l, m.id).ok_or(missing.clone())?;
                let th = plan.offset(l).ok_or(missing)?;
                let (storage, travel_time) = if k == 0 {
                    (m.stopline_capacity, 0.0)
                } else {
                    let prev = m.path[k - 1];
                    let pair = m
                        .pairs
                        .iter()
                        .find(|p| p.from == prev && p.to == l)
                        .expect("consecutive path intersections form a pair");
                    (pair.storage, pair.travel_time)
                };
                stages.push(SimStage {
                    intersection: l,
                    storage,
                    travel_time,
                    rate: params.s(l, m.id) / params.alpha(table, l, m.id),
                    signal: Signal::Fixed {
                        cycle: plan.cycle as f64,
                        start: (th + r) as f64,
                        green: g as f64,
                    },
                });
            }
            routes.push(SimRoute {
                movement: m.id,
                entry: approach_of(m.id),
                demand: scenario.q(m.id),
                stages,
            });
        }
        Ok(SimNetwork {
            routes,
            entries: 4,
            lost_time: params.lost_time,
        })
    }
}
