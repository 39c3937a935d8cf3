use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::PolyError;

/// Relative size below which a coefficient produced by cancellation is
/// flushed to zero.
const CANCEL_TOL: f64 = 1e-12;

/// Tolerance for the divisibility pre-check in [`Polynomial::divide_by_linear`].
const DIVISIBILITY_TOL: f64 = 1e-9;

/// A real polynomial stored with ascending-degree coefficients.
///
/// The highest stored coefficient is always nonzero; the zero polynomial has
/// no coefficients at all.
#[derive(Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// `x^k`
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Polynomial { coeffs: c }
    }

    /// `a + b x`
    pub fn linear(a: f64, b: f64) -> Self {
        Polynomial::new(vec![a, b])
    }

    /// Builds `prod (x - r)` scaled by `lead`.
    pub fn from_roots(lead: f64, roots: &[f64]) -> Self {
        let mut p = Polynomial::constant(lead);
        for &r in roots {
            p = p.mul_linear(r);
        }
        p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Sum of `|a_k| |x|^k`, the natural magnitude for rounding error in `eval(x)`.
    pub fn eval_scale(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| a * k as f64)
            .collect();
        Polynomial::new(c)
    }

    /// The antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| a / (k as f64 + 1.0)),
        );
        Polynomial::new(c)
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        if k == 0.0 {
            return Polynomial::zero();
        }
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// `self * (x - c)`
    pub fn mul_linear(&self, c: f64) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let n = self.coeffs.len();
        let mut out = vec![0.0; n + 1];
        for (k, &a) in self.coeffs.iter().enumerate() {
            out[k + 1] += a;
            out[k] -= c * a;
        }
        combine_cancel(out, |k| {
            let hi = if k >= 1 { self.coeff(k - 1).abs() } else { 0.0 };
            hi.max((c * self.coeff(k)).abs())
        })
    }

    /// Exact quotient of `self` by `(x - c)`.
    ///
    /// Fails when `self(c)` is not zero to within `1e-9` of the evaluation
    /// magnitude at `c`. The remainder is discarded after that check.
    pub fn divide_by_linear(&self, c: f64) -> Result<Polynomial, PolyError> {
        if self.is_zero() {
            return Ok(Polynomial::zero());
        }
        let residual = self.eval(c);
        let scale = self.max_abs_coeff().max(self.eval_scale(c));
        if residual.abs() > DIVISIBILITY_TOL * scale {
            return Err(PolyError::NotDivisible { root: c, residual });
        }
        let n = self.coeffs.len();
        if n == 1 {
            return Ok(Polynomial::zero());
        }
        let mut q = vec![0.0; n - 1];
        let mut carry = 0.0;
        for k in (1..n).rev() {
            carry = self.coeffs[k] + carry * c;
            q[k - 1] = carry;
        }
        Ok(Polynomial::new(q))
    }

    pub fn roots_real(&self, dom: super::Domain) -> Vec<f64> {
        super::roots::roots_in(self, dom)
    }
}

/// Flushes coefficients that are tiny relative to the magnitude of the terms
/// that produced them.
fn combine_cancel(mut out: Vec<f64>, magnitude: impl Fn(usize) -> f64) -> Polynomial {
    for (k, v) in out.iter_mut().enumerate() {
        if *v != 0.0 && v.abs() < CANCEL_TOL * magnitude(k) {
            *v = 0.0;
        }
    }
    Polynomial::new(out)
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}x")?,
                _ => write!(f, "{c}x^{k}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let out = (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        combine_cancel(out, |k| self.coeff(k).abs().max(rhs.coeff(k).abs()))
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let out = (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect();
        combine_cancel(out, |k| self.coeff(k).abs().max(rhs.coeff(k).abs()))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        let mut mag = vec![0.0f64; out.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
                mag[i + j] = mag[i + j].max((a * b).abs());
            }
        }
        combine_cancel(out, |k| mag[k])
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_trims_trailing_zeros() {
        let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(Polynomial::new(vec![0.0]).degree(), None);
    }

    #[test]
    fn cancellation_drops_degree() {
        let a = Polynomial::new(vec![1.0, 0.0, 1.0 + 1e-15]);
        let b = Polynomial::new(vec![0.0, 0.0, 1.0]);
        assert_eq!((&a - &b).degree(), Some(0));
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(Polynomial::constant(1.0).antiderivative().coeffs(), &[0.0, 1.0]);
        assert_eq!(
            Polynomial::monomial(2).antiderivative().coeffs(),
            &[0.0, 0.0, 0.0, 1.0 / 3.0]
        );
        let p = Polynomial::new(vec![0.0, 2.0, 3.0]);
        assert_eq!(p.antiderivative().coeffs(), &[0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn divide_by_linear_examples() {
        let p = Polynomial::new(vec![-2500.0, 0.0, 1.0]);
        assert_eq!(p.divide_by_linear(50.0).unwrap().coeffs(), &[50.0, 1.0]);
        let p = Polynomial::new(vec![-8.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.divide_by_linear(2.0).unwrap().coeffs(), &[4.0, 2.0, 1.0]);
        let p = Polynomial::new(vec![1.0, 0.0, 1.0]);
        assert!(matches!(
            p.divide_by_linear(0.0),
            Err(PolyError::NotDivisible { .. })
        ));
    }

    #[test]
    fn product_and_eval() {
        let p = Polynomial::from_roots(2.0, &[1.0, -3.0]);
        assert_eq!(p.coeffs(), &[-6.0, 4.0, 2.0]);
        assert_eq!(p.eval(1.0), 0.0);
        let q = &p * &Polynomial::linear(1.0, 1.0);
        assert_eq!(q.eval(2.0), p.eval(2.0) * 3.0);
    }
}
