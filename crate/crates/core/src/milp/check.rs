use std::fmt;

use super::problem::LinearProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Bound,
    Row,
    Integrality,
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Variable or row name.
    pub name: String,
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ViolationKind::Bound => "bound",
            ViolationKind::Row => "row",
            ViolationKind::Integrality => "integrality",
            ViolationKind::Missing => "missing",
        };
        write!(f, "{kind} {}: {:.3e}", self.name, self.residual)
    }
}

/// Lists every bound, row and integrality violation of `values` above `tol`.
///
/// Integrality uses `tol` as well; callers wanting the looser binary tolerance
/// run [`check_point_with`].
pub fn check_point(problem: &LinearProblem, values: &[f64], tol: f64) -> Vec<Violation> {
    check_point_with(problem, values, tol, tol)
}

pub fn check_point_with(
    problem: &LinearProblem,
    values: &[f64],
    tol: f64,
    integrality: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if values.len() < problem.num_vars() {
        for v in &problem.variables[values.len()..] {
            out.push(Violation {
                kind: ViolationKind::Missing,
                name: v.name.clone(),
                residual: f64::INFINITY,
            });
        }
        return out;
    }
    for (v, &x) in problem.variables.iter().zip(values) {
        if !x.is_finite() {
            out.push(Violation {
                kind: ViolationKind::Missing,
                name: v.name.clone(),
                residual: f64::INFINITY,
            });
            continue;
        }
        let excess = (v.lower - x).max(x - v.upper);
        if excess > tol {
            out.push(Violation {
                kind: ViolationKind::Bound,
                name: v.name.clone(),
                residual: excess,
            });
        }
        if v.binary {
            let frac = (x - x.round()).abs();
            if frac > integrality {
                out.push(Violation {
                    kind: ViolationKind::Integrality,
                    name: v.name.clone(),
                    residual: frac,
                });
            }
        }
    }
    for row in &problem.constraints {
        let r = row.residual(values);
        if r > tol {
            out.push(Violation {
                kind: ViolationKind::Row,
                name: row.name.clone(),
                residual: r,
            });
        }
    }
    out
}
