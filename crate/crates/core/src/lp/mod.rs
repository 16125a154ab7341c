//! Linear programs, the bundled bounded-variable simplex backend, and an
//! independent KKT checker.
//!
//! Everything downstream talks to a solver through [`LpBackend`], so an
//! external solver can be swapped in without touching the model builders.

mod lu;
pub mod mps;
mod simplex;
pub mod verify;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use simplex::SimplexOptions;
pub use verify::{verify_optimality, OptimalityReport};

/// Row sense of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        f.write_str(s)
    }
}

/// Index of a variable inside a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Index of a constraint row inside a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// A minimization problem `min c'x  s.t.  rows, lower <= x <= upper`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    /// Sparse objective; repeated indices are summed.
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_objective(&mut self, var: VarId, coeff: f64) {
        if coeff != 0.0 {
            self.objective.push((var.0, coeff));
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> RowId {
        self.constraints.push(Constraint {
            coeffs: coeffs.into_iter().map(|(v, a)| (v.0, a)).collect(),
            sense,
            rhs,
        });
        RowId(self.constraints.len() - 1)
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variable_index(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    /// Dense objective vector with duplicates summed.
    pub fn dense_objective(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.variables.len()];
        for &(j, v) in &self.objective {
            c[j] += v;
        }
        c
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        for (j, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper || v.lower == f64::INFINITY
                || v.upper == f64::NEG_INFINITY
            {
                return Err(LpError::InvalidBounds {
                    var: j,
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        let n = self.variables.len();
        for &(j, c) in &self.objective {
            if j >= n {
                return Err(LpError::UnknownVariable { row: None, var: j });
            }
            if !c.is_finite() {
                return Err(LpError::NonFinite { row: None });
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::NonFinite { row: Some(i) });
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::UnknownVariable { row: Some(i), var: j });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite { row: Some(i) });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    /// One value per variable; empty unless optimal.
    pub primal: Vec<f64>,
    /// One multiplier per constraint (`>=` rows nonnegative, `<=` rows
    /// nonpositive); empty unless optimal.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.primal[var.0]
    }

    pub(crate) fn infeasible(iterations: usize) -> Self {
        Self {
            status: LpStatus::Infeasible,
            objective: f64::INFINITY,
            primal: Vec::new(),
            duals: Vec::new(),
            iterations,
        }
    }

    pub(crate) fn unbounded(iterations: usize) -> Self {
        Self {
            status: LpStatus::Unbounded,
            objective: f64::NEG_INFINITY,
            primal: Vec::new(),
            duals: Vec::new(),
            iterations,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("variable {var} has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("reference to undeclared variable {var} (row {row:?})")]
    UnknownVariable { row: Option<usize>, var: usize },
    #[error("non-finite coefficient (row {row:?})")]
    NonFinite { row: Option<usize> },
    #[error("numerical breakdown after {iterations} iterations: {reason}; the instance likely needs scaling")]
    NumericalBreakdown { iterations: usize, reason: String },
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
}

/// Anything that can solve a [`LinearProgram`].
pub trait LpBackend: Send + Sync {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, LpError>;
}

/// The bundled two-phase bounded-variable revised simplex.
#[derive(Debug, Clone, Default)]
pub struct BundledSimplex {
    pub options: SimplexOptions,
}

impl LpBackend for BundledSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        lp.validate()?;
        simplex::solve(lp, &self.options)
    }
}

/// Solve with the bundled simplex and default options.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    BundledSimplex::default().solve(lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_crossed_bounds() {
        let mut lp = LinearProgram::new();
        lp.add_variable("x", 2.0, 1.0);
        assert!(matches!(lp.validate(), Err(LpError::InvalidBounds { var: 0, .. })));
    }

    #[test]
    fn validate_rejects_unknown_variable() {
        let mut lp = LinearProgram::new();
        lp.add_variable("x", 0.0, 1.0);
        lp.constraints.push(Constraint {
            coeffs: vec![(3, 1.0)],
            sense: Sense::Le,
            rhs: 1.0,
        });
        assert!(matches!(
            lp.validate(),
            Err(LpError::UnknownVariable { row: Some(0), var: 3 })
        ));
    }
}
