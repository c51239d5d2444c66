use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

/// Index of a variable inside a [`LinearProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub binary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violates the row; zero when satisfied.
    pub fn residual(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("variable {0} has lower bound above upper bound")]
    InvertedBounds(String),
    #[error("binary variable {0} has bounds outside [0, 1]")]
    BinaryBounds(String),
    #[error("row {row} references undeclared variable {var}")]
    UnknownVariable { row: String, var: VarId },
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
}

/// Sparse linear (or mixed binary) program.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProblem {
    pub name: String,
    pub variables: Vec<Variable>,
    pub objective: Vec<(VarId, f64)>,
    pub objective_constant: f64,
    pub sense: Option<Sense>,
    pub constraints: Vec<Constraint>,
}

impl LinearProblem {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            sense: Some(Sense::Maximize),
            ..Self::default()
        }
    }

    pub fn sense(&self) -> Sense {
        self.sense.unwrap_or(Sense::Maximize)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            binary: false,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            binary: true,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn has_binaries(&self) -> bool {
        self.variables.iter().any(|v| v.binary)
    }

    pub fn set_objective(&mut self, sense: Sense, expr: LinExpr) {
        self.sense = Some(sense);
        self.objective_constant = expr.constant;
        self.objective = expr.into_terms();
    }

    /// Adds `lhs (rel) rhs`, moving every variable to the left and every constant to the right.
    pub fn add_row(&mut self, name: impl Into<String>, lhs: LinExpr, relation: Relation, rhs: LinExpr) {
        let expr = lhs - rhs;
        let constant = expr.constant;
        self.constraints.push(Constraint {
            name: name.into(),
            terms: expr.into_terms(),
            relation,
            rhs: -constant,
        });
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        let expr = LinExpr::from_terms(terms);
        self.constraints.push(Constraint {
            name: name.into(),
            terms: expr.into_terms(),
            relation,
            rhs,
        });
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .map(|&(v, c)| c * values[v.0])
                .sum::<f64>()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() {
                return Err(ProblemError::NonFinite(v.name.clone()));
            }
            if v.lower > v.upper {
                return Err(ProblemError::InvertedBounds(v.name.clone()));
            }
            if v.binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(ProblemError::BinaryBounds(v.name.clone()));
            }
        }
        let n = self.variables.len();
        for &(v, c) in &self.objective {
            if v.0 >= n {
                return Err(ProblemError::UnknownVariable {
                    row: "objective".into(),
                    var: v,
                });
            }
            if !c.is_finite() {
                return Err(ProblemError::NonFinite("objective".into()));
            }
        }
        for row in &self.constraints {
            if !row.rhs.is_finite() {
                return Err(ProblemError::NonFinite(row.name.clone()));
            }
            for &(v, a) in &row.terms {
                if v.0 >= n {
                    return Err(ProblemError::UnknownVariable {
                        row: row.name.clone(),
                        var: v,
                    });
                }
                if !a.is_finite() {
                    return Err(ProblemError::NonFinite(row.name.clone()));
                }
            }
        }
        Ok(())
    }
}

/// Affine expression used by the model builders.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    terms: BTreeMap<VarId, f64>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, 1.0)
    }

    pub fn term(v: VarId, coef: f64) -> Self {
        let mut e = Self::zero();
        e.add_term(v, coef);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (VarId, f64)>) -> Self {
        let mut e = Self::zero();
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    pub fn add_term(&mut self, v: VarId, coef: f64) {
        *self.terms.entry(v).or_insert(0.0) += coef;
    }

    pub fn coefficient(&self, v: VarId) -> f64 {
        self.terms.get(&v).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(v, c)| c * values[v.0]).sum::<f64>()
    }

    pub fn into_terms(self) -> Vec<(VarId, f64)> {
        self.terms.into_iter().filter(|&(_, c)| c != 0.0).collect()
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::var(v)
    }
}

impl AddAssign for LinExpr {
    fn add_assign(&mut self, rhs: LinExpr) {
        self.constant += rhs.constant;
        for (v, c) in rhs.terms {
            self.add_term(v, c);
        }
    }
}

impl SubAssign for LinExpr {
    fn sub_assign(&mut self, rhs: LinExpr) {
        *self += -rhs;
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += rhs;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self -= rhs;
        self
    }
}

impl Add<f64> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: f64) -> LinExpr {
        self.constant += rhs;
        self
    }
}

impl Sub<f64> for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: f64) -> LinExpr {
        self.constant -= rhs;
        self
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, rhs: f64) -> LinExpr {
        self.constant *= rhs;
        for c in self.terms.values_mut() {
            *c *= rhs;
        }
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}
