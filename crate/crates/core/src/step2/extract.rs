use crate::milp::Solution;
use crate::model::{BandDiagnostics, MovementBand, SignalPlan, MAIN};

use super::build::Step2Model;
use super::evaluate::{band_with_cases, evaluate_offsets, no_band_allowed, MovementOutcome};
use super::instance::Step2Instance;
use super::Step2Error;

/// How the integer plan was recovered from the MILP point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionPath {
    /// Nearest-integer offsets kept every selected case.
    Rounded,
    /// A floor/ceil combination of the offsets kept every selected case.
    Enumerated,
    /// Cases were re-selected at the rounded offsets.
    Reselected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    pub plan: SignalPlan,
    pub objective: f64,
    pub thetas: [f64; 5],
    pub path: ExtractionPath,
}

fn round_theta(x: f64, cycle: f64) -> f64 {
    x.round().rem_euclid(cycle)
}

/// Builds a plan with band diagnostics from per-movement outcomes at integer offsets.
pub fn plan_from_outcomes(
    inst: &Step2Instance,
    base: &SignalPlan,
    thetas: &[f64; 5],
    outcomes: &[MovementOutcome],
) -> SignalPlan {
    let mut plan = base.clone();
    for l in 1..=5 {
        plan.offsets.insert(l, thetas[l - 1].round() as i64);
    }
    let mut bands = BandDiagnostics::default();
    for (m, o) in inst.movements.iter().zip(outcomes) {
        let rec = match o {
            MovementOutcome::Band { width, lags, cycles, cases } => MovementBand {
                width: width.round() as i64,
                lags: m.path.iter().zip(lags).map(|(&l, w)| (l, w.round() as i64)).collect(),
                cycles: m.path.iter().zip(cycles).map(|(&l, &n)| (l, i64::from(n))).collect(),
                cases: cases.clone(),
            },
            _ => MovementBand {
                width: 0,
                lags: m.path.iter().map(|&l| (l, 0)).collect(),
                cycles: m.path.iter().map(|&l| (l, 0)).collect(),
                cases: vec![6; m.pairs.len()],
            },
        };
        bands.movements.insert(m.id, rec);
    }
    plan.bands = Some(bands);
    plan
}

/// Outcomes at `thetas` with the cycle indices and cases of the MILP point held fixed.
fn fixed_case_outcomes(
    inst: &Step2Instance,
    model: &Step2Model,
    values: &[f64],
    thetas: &[f64; 5],
) -> Option<Vec<MovementOutcome>> {
    let mut out = Vec::with_capacity(inst.movements.len());
    for m in &inst.movements {
        let cycles: Vec<u8> = m
            .path
            .iter()
            .map(|&l| u8::from(values[model.cycle_index[&(l, m.id)].0] > 0.5))
            .collect();
        let cases: Vec<u8> = (0..m.pairs.len())
            .map(|d| (1..=6u8).find(|&k| values[model.case[&(m.id, d, k)].0] < 0.5).unwrap_or(6))
            .collect();
        if cases.iter().all(|&k| k == 6) {
            if !no_band_allowed(inst, m) {
                return None;
            }
            out.push(MovementOutcome::NoBand);
            continue;
        }
        let (width, lags) = band_with_cases(inst, m, thetas, &cycles, &cases)?;
        out.push(MovementOutcome::Band { width, lags, cycles, cases });
    }
    Some(out)
}

/// Integer plan from a MILP incumbent. `base` supplies cycle, greens and phase starts.
pub fn extract_plan(
    solution: &Solution,
    model: &Step2Model,
    inst: &Step2Instance,
    base: &SignalPlan,
) -> Result<Extracted, Step2Error> {
    if !solution.status.has_solution() {
        return Err(Step2Error::NoIncumbent(solution.status));
    }
    let v = &solution.values;
    let raw: [f64; 5] = std::array::from_fn(|k| if k + 1 == MAIN { 0.0 } else { v[model.theta[k].0] });
    let rounded = raw.map(|x| round_theta(x, inst.cycle));

    let mut candidates = vec![(rounded, ExtractionPath::Rounded)];
    for mask in 0..16u32 {
        let mut t = [0.0; 5];
        for k in 0..4 {
            let x = raw[k];
            t[k] = if (mask >> k) & 1 == 1 { x.ceil() } else { x.floor() }.rem_euclid(inst.cycle);
        }
        if !candidates.iter().any(|(c, _)| *c == t) {
            candidates.push((t, ExtractionPath::Enumerated));
        }
    }
    for (thetas, path) in candidates {
        if let Some(outcomes) = fixed_case_outcomes(inst, model, v, &thetas) {
            let objective = inst.movements.iter().zip(&outcomes).map(|(m, o)| m.eta * o.width()).sum();
            return Ok(Extracted {
                plan: plan_from_outcomes(inst, base, &thetas, &outcomes),
                objective,
                thetas,
                path,
            });
        }
    }
    let (outcomes, objective, infeasible) = evaluate_offsets(inst, &rounded);
    if infeasible > 0 {
        return Err(Step2Error::Extraction);
    }
    Ok(Extracted {
        plan: plan_from_outcomes(inst, base, &rounded, &outcomes),
        objective,
        thetas: rounded,
        path: ExtractionPath::Reselected,
    })
}

/// MILP start vector matching per-movement outcomes at fixed offsets.
pub fn start_vector(inst: &Step2Instance, model: &Step2Model, thetas: &[f64; 5], outcomes: &[MovementOutcome]) -> Vec<f64> {
    let mut x = vec![0.0; model.problem.num_vars()];
    for l in 1..=5 {
        x[model.theta[l - 1].0] = thetas[l - 1];
    }
    for (m, o) in inst.movements.iter().zip(outcomes) {
        let (width, lags, cycles, cases): (f64, Vec<f64>, Vec<u8>, Vec<u8>) = match o {
            MovementOutcome::Band { width, lags, cycles, cases } => (*width, lags.clone(), cycles.clone(), cases.clone()),
            _ => (0.0, vec![0.0; m.path.len()], vec![0; m.path.len()], vec![6; m.pairs.len()]),
        };
        x[model.band[m.id - 1].0] = width;
        for (j, &l) in m.path.iter().enumerate() {
            x[model.lag[&(l, m.id)].0] = lags[j];
            x[model.cycle_index[&(l, m.id)].0] = f64::from(cycles[j]);
        }
        for (d, &sel) in cases.iter().enumerate() {
            for k in 1..=6u8 {
                x[model.case[&(m.id, d, k)].0] = if k == sel { 0.0 } else { 1.0 };
            }
        }
    }
    x
}
