//! Common cycle and green splits.
//!
//! The LP maximizes the sum of per-intersection capacity multipliers (capped at 1).
//! Because that objective is flat whenever the demand fits, the solve continues with
//! two refinement LPs so the chosen timing is unique and reproducible:
//! the shortest cycle keeping every stop line at or below 90% degree of saturation,
//! then, at the integer cycle, splits that maximize each intersection's reserve.

use thiserror::Error;

use crate::milp::{solve_lp, LinExpr, LinearProblem, Relation, Sense, SolveStatus, VarId};
use crate::model::{
    capacity_row, clearance_row, queue_row, DemandScenario, ModelParams, MovementTable, Phase, SignalPlan,
    INTERSECTIONS,
};

/// Target degree of saturation for the cycle refinement.
pub const TARGET_SATURATION: f64 = 0.9;
const RESERVE_CAP: f64 = 1e3;
const DEMAND_FLOOR: f64 = 1e-6;
const REPAIR_RANGE: i64 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Step1Error {
    #[error("movement {movement} is oversaturated at intersection {intersection}: alpha*Q = {alpha_q:.4} veh/s >= s = {s} veh/s")]
    Oversaturated {
        movement: usize,
        intersection: usize,
        alpha_q: f64,
        s: f64,
    },
    #[error("no feasible cycle and split{}", binding.as_ref().map(|b| format!("; most binding: {b}")).unwrap_or_default())]
    Infeasible { binding: Option<String> },
    #[error("solver returned {0}")]
    Solver(SolveStatus),
}

/// Variable handles of the split LP.
#[derive(Debug, Clone)]
pub struct Step1Model {
    pub problem: LinearProblem,
    pub mu: [VarId; 5],
    pub xi: VarId,
    /// `[A, B]` green fractions per intersection.
    pub phi: [[VarId; 2]; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step1Solution {
    /// Capacity multipliers from the primary LP, per intersection.
    pub mu: [f64; 5],
    /// Reciprocal of the integer cycle.
    pub xi: f64,
    /// Green fractions `[A, B]` chosen by the split refinement.
    pub phi: [[f64; 2]; 5],
    /// Largest common demand multiplier the network supports.
    pub reserve: f64,
    pub cycle: i64,
    pub greens: [[i64; 2]; 5],
    pub warnings: Vec<String>,
}

impl Step1Solution {
    pub fn objective(&self) -> f64 {
        self.mu.iter().sum()
    }

    pub fn phase_green(&self, l: usize, phase: Phase) -> i64 {
        self.greens[l - 1][phase.index()]
    }

    pub fn green(&self, table: &MovementTable, l: usize, i: usize) -> Option<i64> {
        table.phase_of(l, i).map(|p| self.phase_green(l, p))
    }

    /// Plan with these greens, phase A first, all offsets zero.
    pub fn plan(&self, table: &MovementTable) -> SignalPlan {
        SignalPlan::from_phases(table, self.cycle, &self.greens, &[0; 5])
    }
}

fn check_saturation(scenario: &DemandScenario, table: &MovementTable, params: &ModelParams) -> Result<(), Step1Error> {
    for m in table.movements() {
        let l = m.first();
        let aq = params.alpha(table, l, m.id) * scenario.q(m.id);
        let s = params.s(l, m.id);
        if s <= aq {
            return Err(Step1Error::Oversaturated {
                movement: m.id,
                intersection: l,
                alpha_q: aq,
                s,
            });
        }
    }
    Ok(())
}

struct SplitVars {
    xi: VarId,
    phi: [[VarId; 2]; 5],
}

fn add_split_vars(p: &mut LinearProblem, params: &ModelParams, xi_range: (f64, f64)) -> SplitVars {
    let xi = p.add_var("xi", xi_range.0, xi_range.1);
    let phi = INTERSECTIONS.map(|l| [Phase::A, Phase::B].map(|ph| p.add_var(format!("phi_{l}_{ph}"), 0.0, 1.0)));
    for l in INTERSECTIONS {
        let [a, b] = phi[l - 1];
        p.add_constraint(format!("split_sum_{l}"), vec![(a, 1.0), (b, 1.0)], Relation::Eq, 1.0);
        for (k, ph) in [Phase::A, Phase::B].into_iter().enumerate() {
            let f = phi[l - 1][k];
            p.add_constraint(format!("gmin_{l}_{ph}"), vec![(xi, params.green_min), (f, -1.0)], Relation::Le, 0.0);
            p.add_constraint(format!("gmax_{l}_{ph}"), vec![(f, 1.0), (xi, -params.green_max)], Relation::Le, 0.0);
        }
    }
    SplitVars { xi, phi }
}

/// Queue-storage and clearance rows at each movement's first stop line. Returns row names per movement.
fn add_first_stop_rows(
    p: &mut LinearProblem,
    v: &SplitVars,
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
    elastic: bool,
) -> Vec<(VarId, String)> {
    let mut slacks = Vec::new();
    for m in table.movements() {
        let (l, i) = (m.first(), m.id);
        let phase = table.phase_of(l, i).expect("movement served at its first stop line");
        let f = v.phi[l - 1][phase.index()];
        let aq = params.alpha(table, l, i) * scenario.q(i);
        let s = params.s(l, i);
        let q = queue_row(aq, s, params.lost_time, table.stopline_capacity(i)).expect("saturation checked");
        let c = clearance_row(aq, s, params.lost_time);
        for (name, row) in [(format!("queue_{l}_{i}"), q), (format!("clear_{l}_{i}"), c)] {
            let mut terms = vec![(f, row.phi), (v.xi, row.xi)];
            if elastic {
                let e = p.add_var(format!("slack_{name}"), 0.0, f64::INFINITY);
                terms.push((e, -1.0));
                slacks.push((e, format!("{name} (movement {i} at intersection {l})")));
            }
            p.add_constraint(name, terms, Relation::Le, row.rhs);
        }
    }
    slacks
}

/// Split LP: multipliers, reciprocal cycle and phase fractions.
pub fn build_step1(
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
) -> Result<Step1Model, Step1Error> {
    check_saturation(scenario, table, params)?;
    let mut p = LinearProblem::new(format!("splits_{}", scenario.id));
    let mu = INTERSECTIONS.map(|l| p.add_var(format!("mu_{l}"), 0.0, 1.0));
    let v = add_split_vars(&mut p, params, (1.0 / params.cycle_max, 1.0 / params.cycle_min));
    p.set_objective(Sense::Maximize, LinExpr::from_terms(mu.iter().map(|&m| (m, 1.0))));
    for (l, i) in table.stop_lines() {
        let phase = table.phase_of(l, i).expect("stop line belongs to a phase");
        let f = v.phi[l - 1][phase.index()];
        let aq = params.alpha(table, l, i) * scenario.q(i);
        let s = params.s(l, i);
        let row = capacity_row(0.0, s, params.lost_time);
        p.add_constraint(
            format!("cap_{l}_{i}"),
            vec![(mu[l - 1], aq), (f, row.phi), (v.xi, row.xi)],
            Relation::Le,
            0.0,
        );
    }
    add_first_stop_rows(&mut p, &v, scenario, table, params, false);
    Ok(Step1Model {
        problem: p,
        mu,
        xi: v.xi,
        phi: v.phi,
    })
}

/// Reserve LP: one multiplier per intersection (or a shared one) against every stop line.
fn reserve_problem(
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
    xi_range: (f64, f64),
    shared: bool,
) -> (LinearProblem, SplitVars, Vec<VarId>) {
    let mut p = LinearProblem::new("reserve");
    let v = add_split_vars(&mut p, params, xi_range);
    let lambdas: Vec<VarId> = if shared {
        vec![p.add_var("lambda", 0.0, RESERVE_CAP)]
    } else {
        INTERSECTIONS.iter().map(|l| p.add_var(format!("lambda_{l}"), 0.0, RESERVE_CAP)).collect()
    };
    for (l, i) in table.stop_lines() {
        let phase = table.phase_of(l, i).expect("stop line belongs to a phase");
        let f = v.phi[l - 1][phase.index()];
        let aq = (params.alpha(table, l, i) * scenario.q(i)).max(DEMAND_FLOOR);
        let s = params.s(l, i);
        let lam = if shared { lambdas[0] } else { lambdas[l - 1] };
        p.add_constraint(
            format!("reserve_{l}_{i}"),
            vec![(lam, aq), (f, -s), (v.xi, s * params.lost_time)],
            Relation::Le,
            0.0,
        );
    }
    add_first_stop_rows(&mut p, &v, scenario, table, params, false);
    (p, v, lambdas)
}

/// Names the first-stop-line row needing the most relaxation when the split LP is infeasible.
fn diagnose(scenario: &DemandScenario, table: &MovementTable, params: &ModelParams) -> Option<String> {
    let mut p = LinearProblem::new("elastic");
    let v = add_split_vars(&mut p, params, (1.0 / params.cycle_max, 1.0 / params.cycle_min));
    let slacks = add_first_stop_rows(&mut p, &v, scenario, table, params, true);
    p.set_objective(Sense::Minimize, LinExpr::from_terms(slacks.iter().map(|(e, _)| (*e, 1.0))));
    let sol = solve_lp(&p);
    if sol.status != SolveStatus::Optimal {
        return None;
    }
    slacks
        .iter()
        .map(|(e, name)| (sol.value(*e), name))
        .filter(|(x, _)| *x > 1e-9)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, n)| n.clone())
}

/// Nearest integer, halves away from zero.
fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}

/// Integer phase greens closest to `phi * cycle` that sum to the cycle.
pub fn integer_greens(phi: [f64; 2], cycle: i64) -> [i64; 2] {
    let c = cycle as f64;
    let mut g = [round_half_away(phi[0] * c), round_half_away(phi[1] * c)];
    let diff = cycle - g[0] - g[1];
    if diff != 0 {
        let k = if g[1] > g[0] { 1 } else { 0 };
        g[k] += diff;
    }
    g
}

fn row_residuals(
    l: usize,
    greens: [i64; 2],
    cycle: i64,
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
) -> f64 {
    let xi = 1.0 / cycle as f64;
    let mut worst: f64 = 0.0;
    for ph in [Phase::A, Phase::B] {
        let phi = greens[ph.index()] as f64 * xi;
        worst = worst
            .max(params.green_min * xi - phi)
            .max(phi - params.green_max * xi)
            .max(params.lost_time * xi - phi);
        for &i in table.group(l, ph) {
            if table.first(i) != l {
                continue;
            }
            let aq = params.alpha(table, l, i) * scenario.q(i);
            let s = params.s(l, i);
            let q = queue_row(aq, s, params.lost_time, table.stopline_capacity(i)).expect("saturation checked");
            let c = clearance_row(aq, s, params.lost_time);
            worst = worst.max(q.residual(phi, xi)).max(c.residual(phi, xi));
        }
    }
    worst
}

/// Rounds the fractions at one intersection and, if a replayed row breaks, shifts green by up to two seconds.
fn repair(
    l: usize,
    phi: [f64; 2],
    cycle: i64,
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
) -> Option<[i64; 2]> {
    let base = integer_greens(phi, cycle);
    let mut candidates = vec![base];
    for d in 1..=REPAIR_RANGE {
        for sign in [-1, 1] {
            candidates.push([base[0] + sign * d, base[1] - sign * d]);
        }
    }
    candidates
        .into_iter()
        .find(|&g| g[0] > 0 && g[1] > 0 && row_residuals(l, g, cycle, scenario, table, params) <= 1e-9)
}

fn solved(p: &LinearProblem) -> Result<crate::milp::Solution, Step1Error> {
    let s = solve_lp(p);
    match s.status {
        SolveStatus::Optimal => Ok(s),
        SolveStatus::Infeasible => Err(Step1Error::Infeasible { binding: None }),
        other => Err(Step1Error::Solver(other)),
    }
}

/// Integer cycle and greens at a fixed cycle, or `None` if the rows cannot be met there.
fn splits_at_cycle(
    cycle: i64,
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
) -> Option<([[f64; 2]; 5], [[i64; 2]; 5])> {
    let xi = 1.0 / cycle as f64;
    let (mut p, v, lambdas) = reserve_problem(scenario, table, params, (xi, xi), false);
    p.set_objective(Sense::Maximize, LinExpr::from_terms(lambdas.iter().map(|&l| (l, 1.0))));
    let sol = solve_lp(&p);
    if sol.status != SolveStatus::Optimal {
        return None;
    }
    let mut phi = [[0.0; 2]; 5];
    let mut greens = [[0; 2]; 5];
    for l in INTERSECTIONS {
        let f = [sol.value(v.phi[l - 1][0]), sol.value(v.phi[l - 1][1])];
        phi[l - 1] = f;
        greens[l - 1] = repair(l, f, cycle, scenario, table, params)?;
    }
    Some((phi, greens))
}

/// Solves the split LP and its refinements and returns integer timings.
pub fn solve_step1(
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
) -> Result<Step1Solution, Step1Error> {
    let model = build_step1(scenario, table, params)?;
    let primary = solve_lp(&model.problem);
    match primary.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(Step1Error::Infeasible {
                binding: diagnose(scenario, table, params),
            })
        }
        other => return Err(Step1Error::Solver(other)),
    }
    let mu = model.mu.map(|m| primary.value(m));
    extract_timings(&mu, scenario, table, params)
}

/// Picks the integer cycle and greens given the optimal multipliers.
pub fn extract_timings(
    mu: &[f64; 5],
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
) -> Result<Step1Solution, Step1Error> {
    let xi_range = (1.0 / params.cycle_max, 1.0 / params.cycle_min);
    let (mut p, v, lam) = reserve_problem(scenario, table, params, xi_range, true);
    p.set_objective(Sense::Maximize, LinExpr::var(lam[0]));
    let reserve = solved(&p)?.value(lam[0]);

    let target = (1.0 / TARGET_SATURATION).min(reserve);
    p.variables[lam[0].0].lower = (target - 1e-9).max(0.0);
    p.set_objective(Sense::Maximize, LinExpr::var(v.xi));
    let xi = solved(&p)?.value(v.xi);

    let c_min = params.cycle_min.ceil() as i64;
    let c_max = params.cycle_max.floor() as i64;
    let nominal = round_half_away(1.0 / xi).clamp(c_min, c_max);
    let mut tried = Vec::new();
    for d in 0..=10 {
        for c in [nominal + d, nominal - d] {
            if c < c_min || c > c_max || tried.contains(&c) {
                continue;
            }
            tried.push(c);
            if let Some((phi, greens)) = splits_at_cycle(c, scenario, table, params) {
                let mut warnings = Vec::new();
                let cf = c as f64;
                for (l, i) in table.stop_lines() {
                    let ph = table.phase_of(l, i).expect("stop line belongs to a phase");
                    let g = greens[l - 1][ph.index()] as f64;
                    let s = params.s(l, i);
                    let lhs = mu[l - 1] * params.alpha(table, l, i) * scenario.q(i) - s * g / cf + s * params.lost_time / cf;
                    if lhs > 1e-3 {
                        warnings.push(format!(
                            "capacity row at intersection {l} movement {i} exceeded by {lhs:.4} after rounding"
                        ));
                    }
                }
                return Ok(Step1Solution {
                    mu: *mu,
                    xi: 1.0 / cf,
                    phi,
                    reserve,
                    cycle: c,
                    greens,
                    warnings,
                });
            }
        }
    }
    Err(Step1Error::Infeasible {
        binding: Some("no integer cycle near the continuous optimum satisfies the stop-line rows".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_topology, default_params};

    #[test]
    fn integer_greens_rebalance() {
        assert_eq!(integer_greens([0.435, 0.565], 100), [44, 56]);
        assert_eq!(integer_greens([0.5, 0.5], 41), [20, 21]);
        assert_eq!(integer_greens([0.5, 0.5], 40), [20, 20]);
    }

    #[test]
    fn uniform_primary_objective_is_five() {
        let t = build_topology();
        let p = default_params();
        let m = build_step1(&DemandScenario::uniform(1, 4000.0), &t, &p).unwrap();
        let s = solve_lp(&m.problem);
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective - 5.0).abs() < 1e-9);
    }

    #[test]
    fn oversaturation_is_rejected() {
        let t = build_topology();
        let p = default_params();
        let sc = DemandScenario::uniform(1, 40_000.0);
        assert!(matches!(build_step1(&sc, &t, &p), Err(Step1Error::Oversaturated { .. })));
    }
}
