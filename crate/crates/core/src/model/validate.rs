use std::fmt;

use super::band::{case_residual, PairTiming};
use super::capacity::{clearance_row, queue_row, StopLineRow};
use super::params::ModelParams;
use super::plan::SignalPlan;
use super::scenario::DemandScenario;
use super::topology::{MovementTable, Pair, PairKind, Phase, INTERSECTIONS};

pub const REPLAY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationClass {
    /// Missing or inconsistent plan entries.
    Structural,
    /// Cycle, split and stop-line queue rules.
    Timing,
    /// Green-band rules (only checked when band diagnostics are present).
    Band,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanViolation {
    pub class: ViolationClass,
    pub rule: &'static str,
    pub at: String,
    pub residual: f64,
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: residual {:.6}", self.rule, self.at, self.residual)
    }
}

struct Collector {
    out: Vec<PlanViolation>,
    tol: f64,
}

impl Collector {
    fn structural(&mut self, rule: &'static str, at: String) {
        self.out.push(PlanViolation {
            class: ViolationClass::Structural,
            rule,
            at,
            residual: f64::INFINITY,
        });
    }

    fn check(&mut self, class: ViolationClass, rule: &'static str, at: impl FnOnce() -> String, residual: f64) {
        if residual > self.tol || residual.is_nan() {
            self.out.push(PlanViolation { class, rule, at: at(), residual });
        }
    }
}

/// Replays every applicable constraint on an integer plan. An empty list means the plan is sound.
pub fn validate_plan(
    plan: &SignalPlan,
    scenario: &DemandScenario,
    table: &MovementTable,
    params: &ModelParams,
) -> Vec<PlanViolation> {
    let mut c = Collector {
        out: Vec::new(),
        tol: REPLAY_TOL,
    };
    let cycle = plan.cycle as f64;
    if plan.cycle <= 0 {
        c.structural("non-positive cycle", format!("C={}", plan.cycle));
        return c.out;
    }
    let xi = 1.0 / cycle;
    c.check(ViolationClass::Timing, "cycle range", || format!("C={}", plan.cycle), (xi - 1.0 / params.cycle_min).max(1.0 / params.cycle_max - xi));

    for l in INTERSECTIONS {
        match plan.offset(l) {
            None => c.structural("missing offset", format!("intersection {l}")),
            Some(th) if th < 0 || th >= plan.cycle => c.structural("offset out of range", format!("intersection {l}: {th}")),
            Some(_) => {}
        }
    }
    for &(l, i) in plan.greens.keys().chain(plan.starts.keys()) {
        if !(1..=8).contains(&i) || !table.path(i).contains(&l) {
            c.structural("unknown stop line", format!("intersection {l} movement {i}"));
        }
    }
    let mut complete = true;
    for (l, i) in table.stop_lines() {
        if plan.green(l, i).is_none() {
            c.structural("missing green", format!("intersection {l} movement {i}"));
            complete = false;
        }
        if plan.start(l, i).is_none() {
            c.structural("missing phase start", format!("intersection {l} movement {i}"));
            complete = false;
        }
    }
    if !complete {
        return c.out;
    }

    let mut phase_ok = true;
    for l in INTERSECTIONS {
        for phase in [Phase::A, Phase::B] {
            let group = table.group(l, phase);
            let g0 = plan.green(l, group[0]).unwrap();
            let r0 = plan.start(l, group[0]).unwrap();
            for &i in &group[1..] {
                if plan.green(l, i) != Some(g0) {
                    c.structural("phase green mismatch", format!("intersection {l} movement {i}"));
                    phase_ok = false;
                }
                if plan.start(l, i) != Some(r0) {
                    c.structural("phase start mismatch", format!("intersection {l} movement {i}"));
                    phase_ok = false;
                }
            }
        }
        let ga = plan.phase_green(table, l, Phase::A).unwrap() as f64;
        let gb = plan.phase_green(table, l, Phase::B).unwrap() as f64;
        let ra = plan.phase_start(table, l, Phase::A).unwrap() as f64;
        let rb = plan.phase_start(table, l, Phase::B).unwrap() as f64;
        c.check(ViolationClass::Timing, "phase greens must sum to cycle", || format!("intersection {l}"), ((ga + gb) * xi - 1.0).abs());
        c.check(ViolationClass::Timing, "phase schedule", || format!("intersection {l}"), ra.abs().max((rb - ga).abs()));
    }
    if !phase_ok {
        return c.out;
    }

    let s = params.saturation;
    let delta = params.lost_time;
    for (l, i) in table.stop_lines() {
        let phi = plan.green(l, i).unwrap() as f64 * xi;
        let at = || format!("intersection {l} movement {i}");
        c.check(ViolationClass::Timing, "green below minimum", at, params.green_min * xi - phi);
        c.check(ViolationClass::Timing, "green above maximum", at, phi - params.green_max * xi);
        // Capacity with the smallest admissible multiplier: effective green must be non-negative.
        c.check(ViolationClass::Timing, "effective green", at, -s * phi + s * delta * xi);
        if l == table.first(i) {
            let aq = params.alpha(table, l, i) * scenario.q(i);
            match queue_row(aq, s, delta, table.stopline_capacity(i)) {
                Ok(row) => c.check(ViolationClass::Timing, "queue exceeds storage", at, row.residual(phi, xi)),
                Err(_) => c.structural("oversaturated movement", at()),
            }
            let row: StopLineRow = clearance_row(aq, s, delta);
            c.check(ViolationClass::Timing, "queue does not clear", at, row.residual(phi, xi));
        }
    }

    if let Some(bands) = &plan.bands {
        for m in table.movements() {
            let i = m.id;
            let Some(rec) = bands.movements.get(&i) else {
                c.structural("missing band record", format!("movement {i}"));
                continue;
            };
            let pairs = coordinated_pairs(table, params, i);
            if rec.cases.len() != pairs.len() {
                c.structural("band case count", format!("movement {i}"));
                continue;
            }
            let mut ok = true;
            for &l in &m.path {
                match (rec.lags.get(&l), rec.cycles.get(&l)) {
                    (Some(_), Some(&n)) if n == 0 || n == 1 => {}
                    (Some(_), Some(_)) => {
                        c.structural("cycle index not binary", format!("intersection {l} movement {i}"));
                        ok = false;
                    }
                    _ => {
                        c.structural("missing band lag", format!("intersection {l} movement {i}"));
                        ok = false;
                    }
                }
            }
            if rec.cases.iter().any(|k| !(1..=6).contains(k)) {
                c.structural("unknown band case", format!("movement {i}"));
                ok = false;
            }
            if !ok {
                continue;
            }
            let b = rec.width as f64;
            c.check(ViolationClass::Band, "negative band", || format!("movement {i}"), -b);
            for &l in &m.path {
                let w = rec.lags[&l] as f64;
                let g = plan.green(l, i).unwrap() as f64;
                let at = || format!("intersection {l} movement {i}");
                c.check(ViolationClass::Band, "negative band lag", at, -w);
                c.check(ViolationClass::Band, "band exceeds green", at, w + b - g);
            }
            for (pair, &k) in pairs.iter().zip(&rec.cases) {
                let pt = pair_timing(plan, rec, pair, i);
                let at = || format!("movement {i} pair {}-{} case {k}", pair.from, pair.to);
                let p = pt.period(k);
                if k != 6 {
                    c.check(ViolationClass::Band, "band case geometry", at, case_residual(k, &pt));
                    c.check(ViolationClass::Band, "band below minimum", at, params.min_band - b);
                    let wa = rec.lags[&pair.from] as f64;
                    let wb = rec.lags[&pair.to] as f64;
                    c.check(ViolationClass::Band, "band progression", at, (pt.start_a() + wa + pt.t - pt.start_b() - wb).abs());
                }
                c.check(ViolationClass::Band, "band exceeds coordinated green", at, b - (pt.g_a - p));
                c.check(ViolationClass::Band, "uncoordinated period range", at, (-p).max(p - pt.g_a));
                let arrivals = scenario.q(i) * cycle * p / pt.g_a;
                c.check(ViolationClass::Band, "uncoordinated arrivals exceed storage", at, arrivals - pair.storage);
            }
        }
    }
    c.out
}

/// Pairs of movement `i` that carry band variables.
pub fn coordinated_pairs(table: &MovementTable, params: &ModelParams, i: usize) -> Vec<Pair> {
    table
        .pairs(i)
        .iter()
        .copied()
        .filter(|p| params.coordinate_sub_pair || p.kind != PairKind::CrossoverToExit)
        .collect()
}

fn pair_timing(plan: &SignalPlan, rec: &super::plan::MovementBand, pair: &Pair, i: usize) -> PairTiming {
    let (a, b) = (pair.from, pair.to);
    PairTiming {
        g_a: plan.green(a, i).unwrap() as f64,
        g_b: plan.green(b, i).unwrap() as f64,
        theta_a: plan.offset(a).unwrap() as f64,
        theta_b: plan.offset(b).unwrap() as f64,
        r_a: plan.start(a, i).unwrap() as f64,
        r_b: plan.start(b, i).unwrap() as f64,
        n_a: rec.cycles[&a] as f64,
        n_b: rec.cycles[&b] as f64,
        t: pair.travel_time,
        c: plan.cycle as f64,
    }
}
