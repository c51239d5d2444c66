//! Reference timing procedure: ratio splits, a classical cycle rule and travel-time offsets.

use thiserror::Error;

use crate::model::{DemandScenario, ModelParams, MovementTable, Phase, SignalPlan, MAIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alignment {
    /// Platoon leaves the crossover sub as the downstream green opens.
    #[default]
    StartOfGreen,
    /// Platoon centre meets the centre of the downstream green.
    MidGreen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    /// Total lost time per cycle used by the cycle rule, s.
    pub lost_time: f64,
    pub lost_time_factor: f64,
    pub constant: f64,
    pub cycle_min: f64,
    pub cycle_max: f64,
    pub alignment: Alignment,
}

impl BenchmarkConfig {
    pub fn from_params(params: &ModelParams) -> Self {
        BenchmarkConfig {
            lost_time: 2.0 * params.lost_time,
            lost_time_factor: 1.5,
            constant: 5.0,
            cycle_min: params.cycle_min,
            cycle_max: params.cycle_max,
            alignment: Alignment::StartOfGreen,
        }
    }

    pub fn validate(&self) -> Result<(), BenchmarkError> {
        let ok = self.lost_time > 0.0
            && self.lost_time_factor > 0.0
            && self.constant > 0.0
            && self.cycle_min > 0.0
            && self.cycle_min <= self.cycle_max;
        if ok { Ok(()) } else { Err(BenchmarkError::Config) }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchmarkError {
    #[error("critical flow ratios sum to {0:.3}, at or above 1")]
    Oversaturated(f64),
    #[error("invalid benchmark configuration")]
    Config,
}

/// `(1.5 L + 5) / (1 - Y)`, rounded and clamped.
pub fn webster_cycle(critical_ratios: &[f64], lost_time: f64, config: &BenchmarkConfig) -> Result<i64, BenchmarkError> {
    let y: f64 = critical_ratios.iter().sum();
    if y >= 1.0 {
        return Err(BenchmarkError::Oversaturated(y));
    }
    let c = (config.lost_time_factor * lost_time + config.constant) / (1.0 - y);
    Ok(c.round().clamp(config.cycle_min.ceil(), config.cycle_max.floor()) as i64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkPlan {
    pub plan: SignalPlan,
    /// Critical ratios at the main intersection, phases A and B.
    pub critical: [f64; 2],
    /// Set when the cycle rule was oversaturated and `cycle_max` was used.
    pub fallback: bool,
}

fn ratio(scenario: &DemandScenario, table: &MovementTable, params: &ModelParams, l: usize, i: usize) -> f64 {
    params.alpha(table, l, i) * scenario.q(i) / params.s(l, i)
}

fn critical(scenario: &DemandScenario, table: &MovementTable, params: &ModelParams, l: usize, phase: Phase) -> f64 {
    table
        .group(l, phase)
        .iter()
        .map(|&i| ratio(scenario, table, params, l, i))
        .fold(0.0, f64::max)
}

/// Phase greens `[A, B]` proportional to the critical ratios, each inflated by the start-up loss.
fn split(cycle: i64, ratios: [f64; 2], params: &ModelParams, lost_time: f64) -> [i64; 2] {
    let y = ratios[0] + ratios[1];
    let share = if y > 0.0 { ratios[0] / y } else { 0.5 };
    let effective = (cycle as f64 - lost_time).max(0.0);
    let lo = params.green_min.ceil() as i64;
    let hi = (params.green_max.floor() as i64).min(cycle - lo);
    let a = (params.lost_time + effective * share).round() as i64;
    let a = a.clamp(lo, hi.max(lo));
    [a, cycle - a]
}

pub fn build_benchmark_plan(
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
    config: &BenchmarkConfig,
) -> Result<BenchmarkPlan, BenchmarkError> {
    config.validate()?;
    let main = [
        critical(scenario, table, params, MAIN, Phase::A),
        critical(scenario, table, params, MAIN, Phase::B),
    ];
    let (cycle, fallback) = match webster_cycle(&main, config.lost_time, config) {
        Ok(c) => (c, false),
        Err(BenchmarkError::Oversaturated(_)) => (config.cycle_max.floor() as i64, true),
        Err(e) => return Err(e),
    };

    let mut greens = [[0i64; 2]; 5];
    greens[MAIN - 1] = split(cycle, main, params, config.lost_time);
    for (l, opposite) in [(1, 3), (2, 4)] {
        let avg = |phase| {
            0.5 * (critical(scenario, table, params, l, phase) + critical(scenario, table, params, opposite, phase))
        };
        let g = split(cycle, [avg(Phase::A), avg(Phase::B)], params, config.lost_time);
        greens[l - 1] = g;
        greens[opposite - 1] = g;
    }

    let mut offsets = [0i64; 5];
    for l in 1..=4 {
        let x = table.group(l, Phase::A)[0];
        let travel = table
            .pairs(x)
            .iter()
            .find(|p| p.from == l && p.to == MAIN)
            .map(|p| p.travel_time)
            .expect("crossover movement reaches the main intersection");
        let phase = table.phase_of(MAIN, x).expect("crossover movement is served at main");
        let main_start = match phase {
            Phase::A => 0,
            Phase::B => greens[MAIN - 1][0],
        } as f64;
        let theta = match config.alignment {
            Alignment::StartOfGreen => main_start - travel,
            Alignment::MidGreen => {
                main_start + 0.5 * greens[MAIN - 1][phase.index()] as f64
                    - 0.5 * greens[l - 1][0] as f64
                    - travel
            }
        };
        offsets[l - 1] = (theta.round() as i64).rem_euclid(cycle);
    }

    Ok(BenchmarkPlan {
        plan: SignalPlan::from_phases(table, cycle, &greens, &offsets),
        critical: main,
        fallback,
    })
}
