use std::collections::BTreeMap;

use crate::milp::{LinExpr, LinearProblem, Relation, Sense, VarId};
use crate::model::{rows_for_case, MAIN};

use super::instance::{MovementData, Step2Instance};

/// Variable handles of the offset MILP.
#[derive(Debug, Clone)]
pub struct Step2Model {
    pub problem: LinearProblem,
    /// Offsets by intersection; the main intersection is fixed at zero.
    pub theta: [VarId; 5],
    pub band: [VarId; 8],
    /// Band lag keyed by (intersection, movement).
    pub lag: BTreeMap<(usize, usize), VarId>,
    /// Cycle index keyed by (intersection, movement).
    pub cycle_index: BTreeMap<(usize, usize), VarId>,
    /// Case selectors keyed by (movement, pair index, case); 0 means selected.
    pub case: BTreeMap<(usize, usize, u8), VarId>,
}

impl Step2Model {
    /// Start of green of `m` at path position `j`, in the chosen cycle: theta + r + n*C.
    fn green_start(&self, inst: &Step2Instance, m: &MovementData, j: usize) -> LinExpr {
        let l = m.path[j];
        LinExpr::var(self.theta[l - 1])
            + m.starts[j]
            + LinExpr::term(self.cycle_index[&(l, m.id)], inst.cycle)
    }

    /// Uncoordinated period of case `k` as a linear expression.
    fn period(&self, inst: &Step2Instance, m: &MovementData, pair: usize, k: u8) -> LinExpr {
        let p = &m.pairs[pair];
        let (ga, gb) = (m.greens[p.a], m.greens[p.b]);
        let sa = self.green_start(inst, m, p.a);
        let sb = self.green_start(inst, m, p.b);
        match k {
            1 => LinExpr::constant(ga) - (sa + ga - sb + p.travel_time),
            2 => LinExpr::constant(ga) - (sb + gb - sa - p.travel_time),
            3 => LinExpr::constant(inst.cycle - gb),
            4 => LinExpr::constant(ga - gb),
            5 => LinExpr::zero(),
            _ => LinExpr::constant(ga),
        }
    }
}

pub fn build_step2(inst: &Step2Instance) -> Step2Model {
    let big_m = inst.big_m;
    let c = inst.cycle;
    let mut p = LinearProblem::new("offsets");
    let theta = [1, 2, 3, 4, 5].map(|l| {
        let hi = if l == MAIN { 0.0 } else { c - 1.0 };
        p.add_var(format!("theta_{l}"), 0.0, hi)
    });
    let band = [1, 2, 3, 4, 5, 6, 7, 8].map(|i| {
        let g = inst
            .movements
            .iter()
            .find(|m| m.id == i)
            .map_or(0.0, |m| m.greens.iter().copied().fold(f64::INFINITY, f64::min));
        p.add_var(format!("b_{i}"), 0.0, g)
    });
    let mut lag = BTreeMap::new();
    let mut cycle_index = BTreeMap::new();
    let mut case = BTreeMap::new();
    for m in &inst.movements {
        for (j, &l) in m.path.iter().enumerate() {
            lag.insert((l, m.id), p.add_var(format!("w_{l}_{}", m.id), 0.0, m.greens[j]));
        }
        for &l in &m.path {
            cycle_index.insert((l, m.id), p.add_binary(format!("n_{l}_{}", m.id)));
        }
        for (d, pair) in m.pairs.iter().enumerate() {
            for k in 1..=6u8 {
                let y = p.add_binary(format!("y_{}_{}_{}_{k}", m.id, pair.from, pair.to));
                case.insert((m.id, d, k), y);
            }
        }
    }
    let model = Step2Model {
        problem: LinearProblem::new(""),
        theta,
        band,
        lag,
        cycle_index,
        case,
    };

    p.set_objective(
        Sense::Maximize,
        LinExpr::from_terms(inst.movements.iter().map(|m| (model.band[m.id - 1], m.eta))),
    );

    for m in &inst.movements {
        let i = m.id;
        let b = LinExpr::var(model.band[i - 1]);
        for (j, &l) in m.path.iter().enumerate() {
            p.add_row(
                format!("lag_green_{l}_{i}"),
                LinExpr::var(model.lag[&(l, i)]) + b.clone(),
                Relation::Le,
                LinExpr::constant(m.greens[j]),
            );
        }
        for (d, pair) in m.pairs.iter().enumerate() {
            let tag = format!("{i}_{}_{}", pair.from, pair.to);
            let y = |k: u8| model.case[&(i, d, k)];
            p.add_row(
                format!("one_case_{tag}"),
                LinExpr::from_terms((1..=6).map(|k| (y(k), 1.0))),
                Relation::Eq,
                LinExpr::constant(5.0),
            );
            let ga = m.greens[pair.a];
            let gb = m.greens[pair.b];
            let sa = model.green_start(inst, m, pair.a);
            let sb = model.green_start(inst, m, pair.b);
            for k in 1..=5u8 {
                for row in rows_for_case(k) {
                    let lhs = sa.clone() + if row.a_end { ga } else { 0.0 } + pair.travel_time;
                    let rhs = sb.clone() + if row.b_end { gb } else { 0.0 } + f64::from(row.shift) * c;
                    let gate = LinExpr::term(y(k), big_m);
                    let name = format!("geom{}_{tag}_{k}", row.label);
                    match row.relation {
                        Relation::Le => p.add_row(name, lhs, Relation::Le, rhs + gate),
                        _ => p.add_row(name, lhs, Relation::Ge, rhs - gate),
                    }
                }
            }
            for k in 1..=6u8 {
                let period = model.period(inst, m, d, k);
                p.add_row(
                    format!("band_cap_{tag}_{k}"),
                    b.clone(),
                    Relation::Le,
                    LinExpr::constant(ga) - period.clone() + LinExpr::term(y(k), big_m),
                );
                p.add_row(
                    format!("storage_{tag}_{k}"),
                    period * (m.q * c / ga),
                    Relation::Le,
                    LinExpr::constant(pair.storage) + LinExpr::term(y(k), big_m),
                );
            }
            let open = LinExpr::constant(big_m) - LinExpr::term(y(6), big_m);
            p.add_row(
                format!("min_band_{tag}"),
                b.clone(),
                Relation::Ge,
                LinExpr::constant(inst.min_band) - open.clone(),
            );
            let wa = LinExpr::var(model.lag[&(pair.from, i)]);
            let wb = LinExpr::var(model.lag[&(pair.to, i)]);
            let up = sa + wa + pair.travel_time;
            let down = sb + wb;
            p.add_row(format!("prog_lo_{tag}"), up.clone(), Relation::Ge, down.clone() - open.clone());
            p.add_row(format!("prog_hi_{tag}"), up, Relation::Le, down + open);
        }
    }
    Step2Model { problem: p, ..model }
}
