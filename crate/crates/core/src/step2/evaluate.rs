//! Best band of each movement for fixed offsets, computed in closed form.

use crate::model::{case_residual, PairTiming};

use super::instance::{MovementData, Step2Instance};

const GEOMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum MovementOutcome {
    Band {
        width: f64,
        lags: Vec<f64>,
        cycles: Vec<u8>,
        cases: Vec<u8>,
    },
    /// No band; allowed only when a full cycle of arrivals fits every storage.
    NoBand,
    Infeasible,
}

impl MovementOutcome {
    pub fn width(&self) -> f64 {
        match self {
            MovementOutcome::Band { width, .. } => *width,
            _ => 0.0,
        }
    }

    pub fn is_feasible(&self) -> bool {
        !matches!(self, MovementOutcome::Infeasible)
    }
}

pub(crate) fn pair_timing(inst: &Step2Instance, m: &MovementData, k: usize, thetas: &[f64; 5], cycles: &[u8]) -> PairTiming {
    let p = &m.pairs[k];
    PairTiming {
        g_a: m.greens[p.a],
        g_b: m.greens[p.b],
        theta_a: thetas[p.from - 1],
        theta_b: thetas[p.to - 1],
        r_a: m.starts[p.a],
        r_b: m.starts[p.b],
        n_a: f64::from(cycles[p.a]),
        n_b: f64::from(cycles[p.b]),
        t: p.travel_time,
        c: inst.cycle,
    }
}

/// Band width and lags for fixed cycle indices and cases; `None` if any rule fails.
pub fn band_with_cases(
    inst: &Step2Instance,
    m: &MovementData,
    thetas: &[f64; 5],
    cycles: &[u8],
    cases: &[u8],
) -> Option<(f64, Vec<f64>)> {
    let mut width = f64::INFINITY;
    for (k, &case) in cases.iter().enumerate() {
        if case == 6 {
            return None;
        }
        let pt = pair_timing(inst, m, k, thetas, cycles);
        if case_residual(case, &pt) > GEOMETRY_TOL {
            return None;
        }
        let p = pt.period(case);
        if m.q * inst.cycle * p / pt.g_a > m.pairs[k].storage + GEOMETRY_TOL {
            return None;
        }
        width = width.min(pt.g_a - p);
    }
    // Band start at each stop line relative to the first one: lag_l = lag_0 + d_l.
    let start = |j: usize| thetas[m.path[j] - 1] + m.starts[j] + f64::from(cycles[j]) * inst.cycle;
    let d: Vec<f64> = (0..m.path.len()).map(|j| start(0) + m.arrival[j] - start(j)).collect();
    let lag0 = d.iter().map(|&x| -x).fold(0.0, f64::max);
    let lags: Vec<f64> = d.iter().map(|&x| lag0 + x).collect();
    for (j, &w) in lags.iter().enumerate() {
        width = width.min(m.greens[j] - w);
    }
    (width >= inst.min_band - GEOMETRY_TOL).then_some((width, lags))
}

/// Whether every pair's storage holds a full cycle of arrivals.
pub fn no_band_allowed(inst: &Step2Instance, m: &MovementData) -> bool {
    m.pairs.iter().all(|p| m.q * inst.cycle <= p.storage + GEOMETRY_TOL)
}

/// Cheapest feasible case on pair `k`: smallest uncoordinated period, ties to the lower case.
fn best_case(inst: &Step2Instance, m: &MovementData, k: usize, thetas: &[f64; 5], cycles: &[u8]) -> Option<(u8, f64)> {
    let pt = pair_timing(inst, m, k, thetas, cycles);
    let mut best: Option<(u8, f64)> = None;
    for case in 1..=5u8 {
        if case_residual(case, &pt) > GEOMETRY_TOL {
            continue;
        }
        let p = pt.period(case);
        if m.q * inst.cycle * p / pt.g_a > m.pairs[k].storage + GEOMETRY_TOL {
            continue;
        }
        if best.is_none_or(|(_, bp)| p < bp - 1e-12) {
            best = Some((case, p));
        }
    }
    best
}

pub fn evaluate_movement(inst: &Step2Instance, m: &MovementData, thetas: &[f64; 5]) -> MovementOutcome {
    let len = m.path.len();
    let mut best: Option<MovementOutcome> = None;
    for mask in 0..(1u32 << len) {
        let cycles: Vec<u8> = (0..len).map(|j| ((mask >> j) & 1) as u8).collect();
        let mut cases = Vec::with_capacity(m.pairs.len());
        for k in 0..m.pairs.len() {
            match best_case(inst, m, k, thetas, &cycles) {
                Some((c, _)) => cases.push(c),
                None => break,
            }
        }
        if cases.len() != m.pairs.len() {
            continue;
        }
        if let Some((width, lags)) = band_with_cases(inst, m, thetas, &cycles, &cases) {
            if best.as_ref().is_none_or(|b| width > b.width() + 1e-12) {
                best = Some(MovementOutcome::Band { width, lags, cycles, cases });
            }
        }
    }
    match best {
        Some(b) => b,
        None if no_band_allowed(inst, m) => MovementOutcome::NoBand,
        None => MovementOutcome::Infeasible,
    }
}

/// Per-movement outcomes and the weighted objective for a full offset vector.
pub fn evaluate_offsets(inst: &Step2Instance, thetas: &[f64; 5]) -> (Vec<MovementOutcome>, f64, usize) {
    let outcomes: Vec<MovementOutcome> = inst.movements.iter().map(|m| evaluate_movement(inst, m, thetas)).collect();
    let objective = inst.movements.iter().zip(&outcomes).map(|(m, o)| m.eta * o.width()).sum();
    let infeasible = outcomes.iter().filter(|o| !o.is_feasible()).count();
    (outcomes, objective, infeasible)
}
