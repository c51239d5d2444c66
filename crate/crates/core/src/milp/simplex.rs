//! Bounded dual simplex on a dense condensed tableau.
//!
//! Every row `i` gets a logical variable `r_i = a_i . x` whose bounds encode the
//! relation, so the working system is `A x - r = 0` with all variables boxed.
//! The starting basis (all logicals) is made dual feasible by parking each
//! structural at the bound its cost prefers; infinite bounds are replaced by an
//! artificial box and a final solution resting on it is reported as unbounded.
//! Re-solves after bound changes (branch and bound) reuse the tableau directly.

use super::problem::{LinearProblem, Relation, Sense};

const ARTIFICIAL_BOUND: f64 = 1e7;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_SWITCH: usize = 50;
const REINVERT_EVERY: u64 = 800;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Place {
    Basic(usize),
    Nonbasic(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Tableau {
    m: usize,
    n: usize,
    /// Working bounds for all `n + m` variables (structurals first).
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Bounds as declared; infinite entries were replaced in `lower`/`upper`.
    declared_lower: Vec<f64>,
    declared_upper: Vec<f64>,
    value: Vec<f64>,
    obj: Vec<f64>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    place: Vec<Place>,
    tab: Vec<f64>,
    cost: Vec<f64>,
    columns: Vec<Vec<(usize, f64)>>,
    pub iterations: u64,
    since_reinvert: u64,
}

impl Tableau {
    /// Builds the slack-basis tableau. `bounds` overrides the declared variable bounds.
    pub(crate) fn new(problem: &LinearProblem, bounds: &[(f64, f64)], rows: &[usize]) -> Self {
        let n = problem.num_vars();
        let m = rows.len();
        let sign = match problem.sense() {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };
        let mut obj = vec![0.0; n + m];
        for &(v, c) in &problem.objective {
            obj[v.0] += sign * c;
        }

        let mut declared_lower = Vec::with_capacity(n + m);
        let mut declared_upper = Vec::with_capacity(n + m);
        for &(lo, hi) in bounds {
            declared_lower.push(lo);
            declared_upper.push(hi);
        }
        let mut columns = vec![Vec::new(); n];
        let mut tab = vec![0.0; m * n];
        for (i, &ri) in rows.iter().enumerate() {
            let row = &problem.constraints[ri];
            for &(v, a) in &row.terms {
                tab[i * n + v.0] += a;
            }
            let (lo, hi) = match row.relation {
                Relation::Le => (f64::NEG_INFINITY, row.rhs),
                Relation::Ge => (row.rhs, f64::INFINITY),
                Relation::Eq => (row.rhs, row.rhs),
            };
            declared_lower.push(lo);
            declared_upper.push(hi);
        }
        for i in 0..m {
            for j in 0..n {
                let a = tab[i * n + j];
                if a != 0.0 {
                    columns[j].push((i, a));
                }
            }
        }

        let lower: Vec<f64> = declared_lower
            .iter()
            .map(|&l| if l.is_finite() { l } else { -ARTIFICIAL_BOUND })
            .collect();
        let upper: Vec<f64> = declared_upper
            .iter()
            .map(|&u| if u.is_finite() { u } else { ARTIFICIAL_BOUND })
            .collect();

        let mut value = vec![0.0; n + m];
        for j in 0..n {
            let c = obj[j];
            let free = !declared_lower[j].is_finite() && !declared_upper[j].is_finite();
            value[j] = if c > 0.0 {
                upper[j]
            } else if c < 0.0 {
                lower[j]
            } else if free {
                0.0
            } else if declared_lower[j].is_finite() {
                lower[j]
            } else {
                upper[j]
            };
        }
        for i in 0..m {
            value[n + i] = (0..n).map(|j| tab[i * n + j] * value[j]).sum();
        }

        Tableau {
            m,
            n,
            lower,
            upper,
            declared_lower,
            declared_upper,
            value,
            cost: obj[..n].to_vec(),
            obj,
            basic: (n..n + m).collect(),
            nonbasic: (0..n).collect(),
            place: (0..n)
                .map(Place::Nonbasic)
                .chain((0..m).map(Place::Basic))
                .collect(),
            tab,
            columns,
            iterations: 0,
            since_reinvert: 0,
        }
    }

    pub(crate) fn structural_values(&self) -> Vec<f64> {
        self.value[..self.n].to_vec()
    }

    pub(crate) fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.obj[j] * self.value[j]).sum()
    }

    /// Tightens the working bounds of a structural variable, keeping dual feasibility.
    pub(crate) fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.lower[var] = lo;
        self.upper[var] = hi;
        self.declared_lower[var] = lo;
        self.declared_upper[var] = hi;
        if let Place::Nonbasic(col) = self.place[var] {
            let current = self.value[var];
            let target = if lo == hi {
                lo
            } else if self.cost[col] > DUAL_TOL {
                hi
            } else if self.cost[col] < -DUAL_TOL {
                lo
            } else {
                current.clamp(lo, hi)
            };
            self.move_nonbasic(col, target);
        }
    }

    fn move_nonbasic(&mut self, col: usize, target: f64) {
        let var = self.nonbasic[col];
        let delta = target - self.value[var];
        if delta == 0.0 {
            return;
        }
        let n = self.n;
        for i in 0..self.m {
            let a = self.tab[i * n + col];
            if a != 0.0 {
                self.value[self.basic[i]] += a * delta;
            }
        }
        self.value[var] = target;
    }

    fn infeasibility(&self, var: usize) -> f64 {
        let v = self.value[var];
        let lo = self.lower[var];
        let hi = self.upper[var];
        let tol = PRIMAL_TOL * (1.0 + v.abs().min(1e4));
        if v < lo - tol {
            lo - v
        } else if v > hi + tol {
            v - hi
        } else {
            0.0
        }
    }

    /// Runs dual simplex iterations until optimal, infeasible or failing.
    pub(crate) fn solve(&mut self, max_iterations: u64) -> LpOutcome {
        let mut degenerate = 0usize;
        let mut refreshed = 0;
        let start = self.iterations;
        loop {
            if self.iterations - start > max_iterations {
                return LpOutcome::Failure;
            }
            if self.since_reinvert >= REINVERT_EVERY && !self.reinvert() {
                return LpOutcome::Failure;
            }
            let bland = degenerate >= DEGENERATE_SWITCH;
            let Some(row) = self.choose_leaving(bland) else {
                // Clean accumulated drift once before declaring optimality.
                if refreshed < 2 && self.iterations > start {
                    refreshed += 1;
                    if !self.refresh_values() {
                        return LpOutcome::Failure;
                    }
                    if self.choose_leaving(false).is_some() {
                        continue;
                    }
                }
                return if self.rests_on_artificial() {
                    LpOutcome::Unbounded
                } else {
                    LpOutcome::Optimal
                };
            };
            let leaving = self.basic[row];
            let increase = self.value[leaving] < self.lower[leaving];
            let Some((col, ratio)) = self.choose_entering(row, increase, bland) else {
                return LpOutcome::Infeasible;
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            let target = if increase {
                self.lower[leaving]
            } else {
                self.upper[leaving]
            };
            let a = self.tab[row * self.n + col];
            let delta = (target - self.value[leaving]) / a;
            let entering = self.nonbasic[col];
            let n = self.n;
            for i in 0..self.m {
                let t = self.tab[i * n + col];
                if t != 0.0 {
                    self.value[self.basic[i]] += t * delta;
                }
            }
            self.value[entering] += delta;
            self.value[leaving] = target;
            self.pivot(row, col);
            self.iterations += 1;
            self.since_reinvert += 1;
        }
    }

    fn choose_leaving(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let var = self.basic[i];
            let inf = self.infeasibility(var);
            if inf <= 0.0 {
                continue;
            }
            match best {
                None => best = Some((i, inf)),
                Some((bi, binf)) => {
                    let better = if bland {
                        var < self.basic[bi]
                    } else {
                        inf > binf || (inf == binf && var < self.basic[bi])
                    };
                    if better {
                        best = Some((i, inf));
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// Dual ratio test (Harris two-pass unless in Bland mode). Returns column and ratio.
    fn choose_entering(&self, row: usize, increase: bool, bland: bool) -> Option<(usize, f64)> {
        let n = self.n;
        let base = row * n;
        // (col, |a|, dual slack)
        let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
        for col in 0..n {
            let a = self.tab[base + col];
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let var = self.nonbasic[col];
            let lo = self.lower[var];
            let hi = self.upper[var];
            if lo == hi {
                continue;
            }
            let v = self.value[var];
            let free_at_zero = !self.declared_lower[var].is_finite()
                && !self.declared_upper[var].is_finite()
                && v > lo
                && v < hi;
            let at_upper = !free_at_zero && (v - hi).abs() <= (v - lo).abs();
            // Moving the entering variable up (+) or down (-) must push the leaving one the right way.
            let up_ok = if increase { a > 0.0 } else { a < 0.0 };
            let eligible = if free_at_zero { true } else if at_upper { !up_ok } else { up_ok };
            if !eligible {
                continue;
            }
            let c = self.cost[col];
            let slack = if free_at_zero {
                c.abs()
            } else if at_upper {
                c.max(0.0)
            } else {
                (-c).max(0.0)
            };
            candidates.push((col, a.abs(), slack));
        }
        if candidates.is_empty() {
            return None;
        }
        if bland {
            let min = candidates
                .iter()
                .map(|&(_, a, s)| s / a)
                .fold(f64::INFINITY, f64::min);
            return candidates
                .iter()
                .filter(|&&(_, a, s)| s / a <= min + 1e-12)
                .min_by_key(|&&(c, _, _)| self.nonbasic[c])
                .map(|&(c, a, s)| (c, s / a));
        }
        let bound = candidates
            .iter()
            .map(|&(_, a, s)| (s + DUAL_TOL) / a)
            .fold(f64::INFINITY, f64::min);
        candidates
            .iter()
            .filter(|&&(_, a, s)| s / a <= bound)
            .max_by(|x, y| {
                x.1.partial_cmp(&y.1)
                    .unwrap()
                    .then_with(|| self.nonbasic[y.0].cmp(&self.nonbasic[x.0]))
            })
            .map(|&(c, a, s)| (c, s / a))
    }

    /// Jordan exchange of basic row `r` with nonbasic column `q`.
    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.n;
        let p = self.tab[r * n + q];
        let inv = 1.0 / p;
        let mut pivot_row = self.tab[r * n..(r + 1) * n].to_vec();
        for (j, x) in pivot_row.iter_mut().enumerate() {
            *x = if j == q { inv } else { -*x * inv };
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * n + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * n..(i + 1) * n];
            for (j, x) in row.iter_mut().enumerate() {
                if j == q {
                    *x = f * inv;
                } else {
                    let d = pivot_row[j];
                    if d != 0.0 {
                        *x += f * d;
                    }
                }
            }
        }
        let f = self.cost[q];
        if f != 0.0 {
            for (j, c) in self.cost.iter_mut().enumerate() {
                if j == q {
                    *c = f * inv;
                } else {
                    *c += f * pivot_row[j];
                }
            }
        }
        self.tab[r * n..(r + 1) * n].copy_from_slice(&pivot_row);
        let entering = self.nonbasic[q];
        let leaving = self.basic[r];
        self.basic[r] = entering;
        self.nonbasic[q] = leaving;
        self.place[entering] = Place::Basic(r);
        self.place[leaving] = Place::Nonbasic(q);
    }

    fn rests_on_artificial(&self) -> bool {
        (0..self.n + self.m).any(|v| {
            let x = self.value[v];
            (!self.declared_lower[v].is_finite() && x <= -0.5 * ARTIFICIAL_BOUND)
                || (!self.declared_upper[v].is_finite() && x >= 0.5 * ARTIFICIAL_BOUND)
        })
    }

    /// Dense basis matrix `E_B` for `E = [A | -I]`.
    fn basis_matrix(&self) -> Vec<f64> {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (k, &var) in self.basic.iter().enumerate() {
            if var < self.n {
                for &(i, a) in &self.columns[var] {
                    b[i * m + k] = a;
                }
            } else {
                b[(var - self.n) * m + k] = -1.0;
            }
        }
        b
    }

    /// Recomputes basic values from the nonbasic ones by solving with the basis.
    fn refresh_values(&mut self) -> bool {
        let m = self.m;
        if m == 0 {
            return true;
        }
        let Some(lu) = Lu::factor(self.basis_matrix(), m) else {
            return false;
        };
        let mut rhs = vec![0.0; m];
        for &var in &self.nonbasic {
            let x = self.value[var];
            if x == 0.0 {
                continue;
            }
            if var < self.n {
                for &(i, a) in &self.columns[var] {
                    rhs[i] -= a * x;
                }
            } else {
                rhs[var - self.n] += x;
            }
        }
        let xb = lu.solve(rhs);
        for (k, &var) in self.basic.iter().enumerate() {
            self.value[var] = xb[k];
        }
        true
    }

    /// Rebuilds the tableau and reduced costs from the current basis.
    fn reinvert(&mut self) -> bool {
        let m = self.m;
        let n = self.n;
        self.since_reinvert = 0;
        if m == 0 {
            return true;
        }
        let Some(lu) = Lu::factor(self.basis_matrix(), m) else {
            return false;
        };
        for col in 0..n {
            let var = self.nonbasic[col];
            let mut rhs = vec![0.0; m];
            if var < n {
                for &(i, a) in &self.columns[var] {
                    rhs[i] = -a;
                }
            } else {
                rhs[var - n] = 1.0;
            }
            let t = lu.solve(rhs);
            for i in 0..m {
                self.tab[i * n + col] = t[i];
            }
        }
        for col in 0..n {
            let mut c = self.obj[self.nonbasic[col]];
            for i in 0..m {
                c += self.obj[self.basic[i]] * self.tab[i * n + col];
            }
            self.cost[col] = c;
        }
        self.refresh_values()
    }
}

/// Dense LU with partial pivoting.
struct Lu {
    m: usize,
    a: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<f64>, m: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let (p, max) = (k..m)
                .map(|i| (i, a[i * m + k].abs()))
                .fold((k, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if max < 1e-12 {
                return None;
            }
            if p != k {
                for j in 0..m {
                    a.swap(k * m + j, p * m + j);
                }
                perm.swap(k, p);
            }
            let piv = a[k * m + k];
            for i in k + 1..m {
                let f = a[i * m + k] / piv;
                if f == 0.0 {
                    continue;
                }
                a[i * m + k] = f;
                for j in k + 1..m {
                    a[i * m + j] -= f * a[k * m + j];
                }
            }
        }
        Some(Lu { m, a, perm })
    }

    fn solve(&self, rhs: Vec<f64>) -> Vec<f64> {
        let m = self.m;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..m {
            let mut s = x[i];
            for j in 0..i {
                s -= self.a[i * m + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..m).rev() {
            let mut s = x[i];
            for j in i + 1..m {
                s -= self.a[i * m + j] * x[j];
            }
            x[i] = s / self.a[i * m + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::problem::{LinExpr, LinearProblem, Relation, Sense};

    fn run(p: &LinearProblem) -> (LpOutcome, Vec<f64>, f64) {
        let bounds: Vec<_> = p.variables.iter().map(|v| (v.lower, v.upper)).collect();
        let rows: Vec<_> = (0..p.constraints.len()).collect();
        let mut t = Tableau::new(p, &bounds, &rows);
        let out = t.solve(10_000);
        (out, t.structural_values(), t.objective())
    }

    #[test]
    fn lu_solves_permuted_system() {
        let lu = Lu::factor(vec![0.0, 2.0, 1.0, 1.0], 2).unwrap();
        let x = lu.solve(vec![4.0, 3.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn classic_two_variable_lp() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut p = LinearProblem::new("wyndor");
        let x = p.add_var("x", 0.0, f64::INFINITY);
        let y = p.add_var("y", 0.0, f64::INFINITY);
        p.set_objective(Sense::Maximize, LinExpr::from_terms([(x, 3.0), (y, 5.0)]));
        p.add_constraint("a", vec![(x, 1.0)], Relation::Le, 4.0);
        p.add_constraint("b", vec![(y, 2.0)], Relation::Le, 12.0);
        p.add_constraint("c", vec![(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
        let (out, v, obj) = run(&p);
        assert_eq!(out, LpOutcome::Optimal);
        assert!((v[0] - 2.0).abs() < 1e-9 && (v[1] - 6.0).abs() < 1e-9);
        assert!((obj - 36.0).abs() < 1e-9);
    }

    #[test]
    fn minimization_with_ge_rows_and_free_variable() {
        // min x + y, x + y >= 2, x - y = 0, x free -> 2
        let mut p = LinearProblem::new("m");
        let x = p.add_var("x", f64::NEG_INFINITY, f64::INFINITY);
        let y = p.add_var("y", 0.0, f64::INFINITY);
        p.set_objective(Sense::Minimize, LinExpr::from_terms([(x, 1.0), (y, 1.0)]));
        p.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 2.0);
        p.add_constraint("b", vec![(x, 1.0), (y, -1.0)], Relation::Eq, 0.0);
        let (out, v, obj) = run(&p);
        assert_eq!(out, LpOutcome::Optimal);
        assert!((v[0] - 1.0).abs() < 1e-9 && (v[1] - 1.0).abs() < 1e-9);
        assert!((obj + 2.0).abs() < 1e-9, "internal objective is negated for min");
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut p = LinearProblem::new("inf");
        let x = p.add_var("x", 0.0, 1.0);
        p.add_constraint("a", vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(run(&p).0, LpOutcome::Infeasible);

        let mut p = LinearProblem::new("unb");
        let x = p.add_var("x", 0.0, f64::INFINITY);
        let y = p.add_var("y", 0.0, f64::INFINITY);
        p.set_objective(Sense::Maximize, LinExpr::var(x));
        p.add_constraint("a", vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(run(&p).0, LpOutcome::Unbounded);
    }

    #[test]
    fn bound_change_resolve_matches_fresh_solve() {
        let mut p = LinearProblem::new("bb");
        let x = p.add_var("x", 0.0, 10.0);
        let y = p.add_var("y", 0.0, 10.0);
        p.set_objective(Sense::Maximize, LinExpr::from_terms([(x, 1.0), (y, 2.0)]));
        p.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Relation::Le, 4.0);
        p.add_constraint("b", vec![(x, -1.0), (y, 1.0)], Relation::Le, 1.0);
        let bounds: Vec<_> = p.variables.iter().map(|v| (v.lower, v.upper)).collect();
        let rows = vec![0, 1];
        let mut t = Tableau::new(&p, &bounds, &rows);
        assert_eq!(t.solve(1000), LpOutcome::Optimal);
        assert!((t.objective() - 6.5).abs() < 1e-9);
        t.set_bounds(y.0, 0.0, 2.0);
        assert_eq!(t.solve(1000), LpOutcome::Optimal);
        assert!((t.objective() - 6.0).abs() < 1e-9);
        assert!(t.reinvert());
        assert!((t.objective() - 6.0).abs() < 1e-9);
        let _ = x;
    }
}
