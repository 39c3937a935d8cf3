//! Polynomials, piecewise rational functions with linear denominators, real
//! root finding, and exact global maximization over an interval.

mod piecewise;
mod polynomial;
pub(crate) mod roots;

pub use piecewise::{Denominator, MaxResult, Piece, PiecewiseFunction};
pub use polynomial::Polynomial;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("point {x} lies outside the support [{lo}, {hi}]")]
    OutsideSupport { x: f64, lo: f64, hi: f64 },
    #[error("polynomial is not divisible by (x - {root}); residual {residual:e}")]
    NotDivisible { root: f64, residual: f64 },
    #[error("invalid interval: lower {lo} must be below upper {hi}")]
    InvalidDomain { lo: f64, hi: f64 },
    #[error("malformed piecewise function: {0}")]
    Malformed(String),
}

/// A closed interval of the real line; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    lower: f64,
    upper: f64,
}

impl Domain {
    pub fn new(lower: f64, upper: f64) -> Result<Self, PolyError> {
        if lower.is_nan() || upper.is_nan() || lower >= upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(PolyError::InvalidDomain { lo: lower, hi: upper });
        }
        Ok(Domain { lower, upper })
    }

    pub fn real_line() -> Self {
        Domain {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    /// `[lower, +inf)`
    pub fn from(lower: f64) -> Self {
        Domain {
            lower,
            upper: f64::INFINITY,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn contains_domain(&self, other: &Domain) -> bool {
        other.lower >= self.lower && other.upper <= self.upper
    }

    /// Largest finite magnitude among the endpoints, at least one.
    pub fn scale(&self) -> f64 {
        [self.lower, self.upper]
            .iter()
            .filter(|v| v.is_finite())
            .fold(1.0f64, |m, v| m.max(v.abs()))
    }

    pub fn intersect(&self, other: &Domain) -> Option<Domain> {
        let lo = self.lower.max(other.lower);
        let hi = self.upper.min(other.upper);
        Domain::new(lo, hi).ok()
    }
}
