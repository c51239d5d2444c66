use crate::model::{coordinated_pairs, DemandScenario, ModelParams, MovementTable, SignalPlan};
use crate::step1::Step1Solution;

use super::Step2Error;

#[derive(Debug, Clone, PartialEq)]
pub struct PairData {
    /// Positions of the two intersections within the movement path.
    pub a: usize,
    pub b: usize,
    pub from: usize,
    pub to: usize,
    pub travel_time: f64,
    pub storage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovementData {
    pub id: usize,
    /// veh/s.
    pub q: f64,
    pub eta: f64,
    pub path: Vec<usize>,
    pub greens: Vec<f64>,
    pub starts: Vec<f64>,
    /// Free-flow time from the first stop line to each path intersection.
    pub arrival: Vec<f64>,
    pub pairs: Vec<PairData>,
}

/// Everything the offset problem needs once cycle and greens are fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Step2Instance {
    pub cycle: f64,
    pub min_band: f64,
    pub big_m: f64,
    pub movements: Vec<MovementData>,
}

impl Step2Instance {
    pub fn new(
        timings: &Step1Solution,
        scenario: &DemandScenario,
        table: &MovementTable,
        params: &ModelParams,
    ) -> Result<Self, Step2Error> {
        Self::from_plan(&timings.plan(table), scenario, table, params)
    }

    /// Uses the cycle, greens and phase starts of `plan`; offsets are ignored.
    pub fn from_plan(
        plan: &SignalPlan,
        scenario: &DemandScenario,
        table: &MovementTable,
        params: &ModelParams,
    ) -> Result<Self, Step2Error> {
        let mut movements = Vec::new();
        for m in table.movements() {
            let mut greens = Vec::new();
            let mut starts = Vec::new();
            for &l in &m.path {
                let g = plan.green(l, m.id).ok_or(Step2Error::MissingGreen { intersection: l, movement: m.id })?;
                let r = plan.start(l, m.id).ok_or(Step2Error::MissingGreen { intersection: l, movement: m.id })?;
                greens.push(g as f64);
                starts.push(r as f64);
            }
            let pos = |l: usize| m.path.iter().position(|&x| x == l).expect("pair on path");
            let mut arrival = vec![0.0; m.path.len()];
            for p in &m.pairs {
                if pos(p.from) + 1 == pos(p.to) {
                    arrival[pos(p.to)] = arrival[pos(p.from)] + p.travel_time;
                }
            }
            let pairs = coordinated_pairs(table, params, m.id)
                .into_iter()
                .map(|p| PairData {
                    a: pos(p.from),
                    b: pos(p.to),
                    from: p.from,
                    to: p.to,
                    travel_time: p.travel_time,
                    storage: p.storage,
                })
                .collect();
            movements.push(MovementData {
                id: m.id,
                q: scenario.q(m.id),
                eta: scenario.eta(m.id),
                path: m.path.clone(),
                greens,
                starts,
                arrival,
                pairs,
            });
        }
        Ok(Step2Instance {
            cycle: plan.cycle as f64,
            min_band: params.min_band,
            big_m: params.big_m,
            movements,
        })
    }

    pub fn movement(&self, i: usize) -> &MovementData {
        self.movements.iter().find(|m| m.id == i).expect("movement in instance")
    }
}
