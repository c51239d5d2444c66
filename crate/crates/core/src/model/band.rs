//! Green-band geometry between two consecutive signals of one movement.

use crate::milp::Relation;

/// Timing of one movement across an intersection pair `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTiming {
    pub g_a: f64,
    pub g_b: f64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub t: f64,
    pub c: f64,
}

impl PairTiming {
    /// Green start at `a` in the selected cycle.
    pub fn start_a(&self) -> f64 {
        self.theta_a + self.r_a + self.n_a * self.c
    }

    pub fn start_b(&self) -> f64 {
        self.theta_b + self.r_b + self.n_b * self.c
    }
}

/// Uncoordinated part of the upstream green for case `k` (1..=6).
#[allow(clippy::too_many_arguments)]
pub fn uncoordinated_period(
    k: u8,
    g_a: f64,
    g_b: f64,
    theta_a: f64,
    theta_b: f64,
    r_a: f64,
    r_b: f64,
    n_a: f64,
    n_b: f64,
    t: f64,
    c: f64,
) -> f64 {
    match k {
        1 => g_a - (theta_a + r_a + n_a * c + g_a - theta_b - r_b - n_b * c + t),
        2 => g_a - (theta_b + r_b + n_b * c + g_b - theta_a - r_a - n_a * c - t),
        3 => c - g_b,
        4 => g_a - g_b,
        5 => 0.0,
        _ => g_a,
    }
}

impl PairTiming {
    pub fn period(&self, k: u8) -> f64 {
        uncoordinated_period(
            k, self.g_a, self.g_b, self.theta_a, self.theta_b, self.r_a, self.r_b, self.n_a, self.n_b, self.t, self.c,
        )
    }
}

/// One case-geometry row: `start_a [+ g_a] + t  rel  start_b [+ g_b] + shift * C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseRow {
    pub label: u8,
    pub a_end: bool,
    pub relation: Relation,
    pub b_end: bool,
    pub shift: i8,
    pub cases: &'static [u8],
}

pub const CASE_ROWS: [CaseRow; 9] = [
    CaseRow { label: 1, a_end: false, relation: Relation::Ge, b_end: true, shift: -1, cases: &[1] },
    CaseRow { label: 2, a_end: false, relation: Relation::Le, b_end: false, shift: 0, cases: &[1, 4] },
    CaseRow { label: 3, a_end: false, relation: Relation::Ge, b_end: false, shift: 0, cases: &[2, 5] },
    CaseRow { label: 4, a_end: false, relation: Relation::Le, b_end: true, shift: 0, cases: &[2, 3] },
    CaseRow { label: 5, a_end: true, relation: Relation::Le, b_end: true, shift: 0, cases: &[1, 5] },
    CaseRow { label: 6, a_end: true, relation: Relation::Ge, b_end: true, shift: 0, cases: &[2, 4] },
    CaseRow { label: 7, a_end: true, relation: Relation::Le, b_end: false, shift: 1, cases: &[2] },
    CaseRow { label: 8, a_end: true, relation: Relation::Ge, b_end: false, shift: 1, cases: &[3] },
    CaseRow { label: 9, a_end: true, relation: Relation::Ge, b_end: false, shift: 0, cases: &[1] },
];

pub fn rows_for_case(k: u8) -> impl Iterator<Item = &'static CaseRow> {
    CASE_ROWS.iter().filter(move |r| r.cases.contains(&k))
}

impl CaseRow {
    /// Violation amount of the row at `p` (0 when satisfied).
    pub fn residual(&self, p: &PairTiming) -> f64 {
        let lhs = p.start_a() + if self.a_end { p.g_a } else { 0.0 } + p.t;
        let rhs = p.start_b() + if self.b_end { p.g_b } else { 0.0 } + f64::from(self.shift) * p.c;
        match self.relation {
            Relation::Le => (lhs - rhs).max(0.0),
            Relation::Ge => (rhs - lhs).max(0.0),
            Relation::Eq => (lhs - rhs).abs(),
        }
    }
}

/// Largest case-row violation for case `k` at `p`.
pub fn case_residual(k: u8, p: &PairTiming) -> f64 {
    rows_for_case(k).map(|r| r.residual(p)).fold(0.0, f64::max)
}
