use super::problem::{LinearProblem, Relation};

pub(crate) struct Presolved {
    pub bounds: Vec<(f64, f64)>,
    /// Indices of rows kept for the simplex.
    pub rows: Vec<usize>,
}

/// Folds empty and single-variable rows into variable bounds.
/// Returns `None` when a folded row proves the problem infeasible.
pub(crate) fn presolve(problem: &LinearProblem, tol: f64) -> Option<Presolved> {
    let mut bounds: Vec<(f64, f64)> = problem.variables.iter().map(|v| (v.lower, v.upper)).collect();
    let mut rows = Vec::new();
    for (ri, row) in problem.constraints.iter().enumerate() {
        match row.terms.as_slice() {
            [] => {
                let ok = match row.relation {
                    Relation::Le => 0.0 <= row.rhs + tol,
                    Relation::Ge => 0.0 >= row.rhs - tol,
                    Relation::Eq => row.rhs.abs() <= tol,
                };
                if !ok {
                    return None;
                }
            }
            &[(v, a)] if a.abs() > 1e-9 => {
                let q = row.rhs / a;
                let (lo, hi) = &mut bounds[v.0];
                let (tighten_hi, tighten_lo) = match (row.relation, a > 0.0) {
                    (Relation::Eq, _) => (true, true),
                    (Relation::Le, true) | (Relation::Ge, false) => (true, false),
                    _ => (false, true),
                };
                if tighten_hi && q < *hi {
                    *hi = q;
                }
                if tighten_lo && q > *lo {
                    *lo = q;
                }
            }
            _ => rows.push(ri),
        }
    }
    for (b, v) in bounds.iter_mut().zip(&problem.variables) {
        if v.binary {
            b.0 = (b.0 - 1e-9).ceil().max(0.0);
            b.1 = (b.1 + 1e-9).floor().min(1.0);
        }
        if b.0 > b.1 {
            if b.0 - b.1 > tol {
                return None;
            }
            let mid = 0.5 * (b.0 + b.1);
            *b = (mid, mid);
        }
    }
    Some(Presolved { bounds, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_rows_become_bounds() {
        let mut p = LinearProblem::new("t");
        let x = p.add_var("x", 0.0, 10.0);
        let y = p.add_binary("y");
        p.add_constraint("a", vec![(x, 2.0)], Relation::Le, 6.0);
        p.add_constraint("b", vec![(x, -1.0)], Relation::Le, -1.0);
        p.add_constraint("c", vec![(y, 1.0)], Relation::Le, 0.5);
        p.add_constraint("d", vec![(x, 1.0), (y, 1.0)], Relation::Le, 5.0);
        let pre = presolve(&p, 1e-7).unwrap();
        assert_eq!(pre.bounds, vec![(1.0, 3.0), (0.0, 0.0)]);
        assert_eq!(pre.rows, vec![3]);
    }

    #[test]
    fn crossing_bounds_are_infeasible() {
        let mut p = LinearProblem::new("t");
        let x = p.add_var("x", 0.0, 1.0);
        p.add_constraint("a", vec![(x, 1.0)], Relation::Ge, 2.0);
        assert!(presolve(&p, 1e-7).is_none());
    }
}
