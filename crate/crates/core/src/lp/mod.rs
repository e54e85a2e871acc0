//! Linear programs over residues for fixed poles.

mod closed_form;
mod simplex;

pub use closed_form::{
    residues_iso_three_pole, residues_iso_two_pole, residues_no_info, residues_vf_two_pole,
    COINCIDENT_POLE_TOL,
};
pub use simplex::{simplex_solve, PIVOT_TOL};

use crate::error::{Error, Result};

/// One linear row `coeffs . x (=|<=) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        Constraint { coeffs, rhs }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// `optimize objective . x + offset` subject to equalities, `<=` rows and
/// `x >= 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgramSpec {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub equalities: Vec<Constraint>,
    pub inequalities: Vec<Constraint>,
}

impl LinearProgramSpec {
    /// A spec with `num_vars` variables, zero objective and no rows.
    pub fn new(num_vars: usize) -> Self {
        LinearProgramSpec { num_vars, objective: vec![0.0; num_vars], ..Default::default() }
    }

    pub fn with_objective(mut self, objective: Vec<f64>, offset: f64) -> Self {
        self.objective = objective;
        self.objective_offset = offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::InvalidParameter(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        for row in self.equalities.iter().chain(&self.inequalities) {
            if row.coeffs.len() != self.num_vars {
                return Err(Error::InvalidParameter(format!(
                    "constraint has {} coefficients for {} variables",
                    row.coeffs.len(),
                    self.num_vars
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter("constraint with non-finite entry".into()));
            }
        }
        if !self.objective_offset.is_finite() || self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("objective with non-finite entry".into()));
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Largest violation of any row or sign condition at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0f64, |w, &v| w.max(-v));
        for row in &self.equalities {
            worst = worst.max((row.eval(x) - row.rhs).abs());
        }
        for row in &self.inequalities {
            worst = worst.max(row.eval(x) - row.rhs);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub point: Vec<f64>,
    /// Indices of the inequality rows that are tight at `point`.
    pub active_set: Vec<usize>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
