//! Exact verification of infeasibility certificates for systems of linear
//! inequalities `Σ_x c_x · x ≤ b`.
//!
//! A non-negative multiplier vector whose combination of the rows has every
//! variable coefficient equal to zero and a negative right-hand side proves
//! that no real assignment satisfies all rows (it would give `0 ≤ b < 0`).

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// `Σ coefficients[x] · x ≤ rhs`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearInequality {
    pub coefficients: BTreeMap<usize, BigRational>,
    pub rhs: BigRational,
}

impl LinearInequality {
    pub fn new(rhs: BigRational) -> Self {
        LinearInequality {
            coefficients: BTreeMap::new(),
            rhs,
        }
    }

    /// Adds `c · x` to the left-hand side.
    pub fn add_term(&mut self, x: usize, c: BigRational) {
        let entry = self.coefficients.entry(x).or_insert_with(BigRational::zero);
        *entry += c;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfeasibilityCheck {
    pub combined_rhs: BigRational,
    /// Variables whose combined coefficient is not zero.
    pub residual: Vec<(usize, BigRational)>,
    /// Rows with a negative multiplier.
    pub negative_multipliers: Vec<usize>,
}

impl InfeasibilityCheck {
    pub fn proves_infeasible(&self) -> bool {
        self.residual.is_empty() && self.negative_multipliers.is_empty() && self.combined_rhs.is_negative()
    }
}

pub fn check_infeasibility(rows: &[LinearInequality], multipliers: &[BigRational]) -> Result<InfeasibilityCheck> {
    if rows.len() != multipliers.len() {
        return Err(Error::InvalidParameter(format!(
            "{} rows but {} multipliers",
            rows.len(),
            multipliers.len()
        )));
    }
    let mut combined: BTreeMap<usize, BigRational> = BTreeMap::new();
    let mut combined_rhs = BigRational::zero();
    let mut negative_multipliers = Vec::new();
    for (idx, (row, y)) in rows.iter().zip(multipliers).enumerate() {
        if y.is_negative() {
            negative_multipliers.push(idx);
        }
        if y.is_zero() {
            continue;
        }
        for (&x, c) in &row.coefficients {
            *combined.entry(x).or_insert_with(BigRational::zero) += c * y;
        }
        combined_rhs += &row.rhs * y;
    }
    Ok(InfeasibilityCheck {
        combined_rhs,
        residual: combined.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        negative_multipliers,
    })
}
