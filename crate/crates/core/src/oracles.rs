//! Reference values used to validate the column-generation bounds:
//! closed-form mean–variance call bounds, Black–Scholes prices and a
//! brute-force LP over a dense fixed grid of atoms.

use thiserror::Error;

use crate::lpcore::{solve_lp, LpProblem, LpStatus, RowKind};
use crate::mixtures::{transform, MixtureError};
use crate::model::{ProblemSpec, Sense};

pub use crate::numeric::normal_cdf;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("grid window [{0}, {1}] must be finite and nonempty")]
    BadWindow(f64, f64),
    #[error("no distribution on the grid satisfies the constraints")]
    Infeasible,
    #[error("grid LP ended with status {0}")]
    Lp(String),
    #[error(transparent)]
    Mixture(#[from] MixtureError),
}

/// Sharp upper bound on `E[max(X - d, 0)]` over laws on `[0, inf)` with
/// mean `mu` and standard deviation `sigma`.
///
/// ```
/// use semibound::oracles::lo_upper_bound;
/// assert!((lo_upper_bound(50.0, 10.1, 50.0) - 5.05).abs() < 1e-12);
/// assert_eq!(lo_upper_bound(50.0, 15.0, 0.0), 50.0);
/// ```
pub fn lo_upper_bound(mu: f64, sigma: f64, d: f64) -> f64 {
    let m2 = mu * mu + sigma * sigma;
    if d >= m2 / (2.0 * mu) {
        let e = mu - d;
        0.5 * (e + (e * e + sigma * sigma).sqrt())
    } else {
        mu - d * mu * mu / m2
    }
}

/// Black–Scholes price of a European call.
pub fn black_scholes_call(s0: f64, strike: f64, rate: f64, vol: f64, maturity: f64) -> f64 {
    let sd = vol * maturity.sqrt();
    let d1 = ((s0 / strike).ln() + (rate + 0.5 * vol * vol) * maturity) / sd;
    let d2 = d1 - sd;
    s0 * normal_cdf(d1) - strike * (-rate * maturity).exp() * normal_cdf(d2)
}

/// Grid used by [`grid_lp_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOracleConfig {
    pub n: usize,
    pub clip: (f64, f64),
}

impl GridOracleConfig {
    pub fn new(n: usize, lo: f64, hi: f64) -> Result<Self, OracleError> {
        if n < 2 {
            return Err(OracleError::TooFewPoints(n));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(OracleError::BadWindow(lo, hi));
        }
        Ok(GridOracleConfig { n, clip: (lo, hi) })
    }

    pub fn points(&self) -> Vec<f64> {
        let (lo, hi) = self.clip;
        let last = self.n - 1;
        (0..self.n)
            .map(|i| if i == last { hi } else { lo + (hi - lo) * i as f64 / last as f64 })
            .collect()
    }
}

/// Master LP solved once over the grid atoms (transformed for the spec's
/// family). An inner approximation of the bound: it never exceeds the true
/// upper bound and increases as nested grids refine.
pub fn grid_lp_bound(spec: &ProblemSpec, cfg: &GridOracleConfig) -> Result<f64, OracleError> {
    let xs: Vec<f64> = cfg.points().into_iter().filter(|x| spec.support.contains(*x)).collect();
    let sign = match spec.sense {
        Sense::Upper => 1.0,
        Sense::Lower => -1.0,
    };
    let f = transform(&spec.target, spec.family);
    let obj = xs.iter().map(|&x| f.eval(x).map(|v| sign * v)).collect::<Result<Vec<_>, _>>()?;
    let mut lp = LpProblem::new(obj);
    for c in &spec.constraints {
        let g = transform(&c.g, spec.family);
        let row = xs.iter().map(|&x| g.eval(x)).collect::<Result<Vec<_>, _>>()?;
        if c.sigma_lo.is_finite() {
            lp.add_row(row.clone(), RowKind::Ge, c.sigma_lo).expect("row sized to grid");
        }
        if c.sigma_hi.is_finite() {
            lp.add_row(row, RowKind::Le, c.sigma_hi).expect("row sized to grid");
        }
    }
    lp.add_row(vec![1.0; xs.len()], RowKind::Eq, 1.0).expect("row sized to grid");
    let sol = solve_lp(&lp);
    match sol.status {
        LpStatus::Optimal => Ok(sign * sol.objective),
        LpStatus::Infeasible => Err(OracleError::Infeasible),
        other => Err(OracleError::Lp(format!("{other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MixtureFamily, MomentConstraint};
    use crate::polyalg::{Domain, PiecewiseFunction};

    #[test]
    fn lo_bound_examples() {
        assert!((lo_upper_bound(50.0, 10.1, 50.0) - 5.05).abs() < 1e-12);
        assert_eq!(lo_upper_bound(50.0, 10.0, 0.0), 50.0);
        let v = lo_upper_bound(50.0, 15.0, 80.0);
        assert!((v - 0.5 * (-30.0 + 1125f64.sqrt())).abs() < 1e-12);
        assert!((v - 1.7705).abs() < 1e-4);
    }

    #[test]
    fn lo_bound_is_continuous_across_regimes() {
        let (mu, sigma) = (50.0, 15.0);
        let d0 = (mu * mu + sigma * sigma) / (2.0 * mu);
        let below = lo_upper_bound(mu, sigma, d0 * (1.0 - 1e-12));
        let above = lo_upper_bound(mu, sigma, d0);
        assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn black_scholes_examples() {
        let c = black_scholes_call(49.5, 49.5, 0.01, 0.2, 1.0);
        assert!((c - 4.17).abs() < 0.01, "{c}");
        let fwd = black_scholes_call(49.5, 40.0, 0.01, 1e-9, 1.0);
        assert!((fwd - (49.5 - 40.0 * (-0.01f64).exp())).abs() < 1e-9);
        assert!(black_scholes_call(49.5, 1e9, 0.01, 0.2, 1.0) < 1e-300);
    }

    #[test]
    fn black_scholes_shape() {
        let vols: Vec<f64> = (1..40).map(|i| 0.02 * i as f64).collect();
        let prices: Vec<f64> = vols.iter().map(|&v| black_scholes_call(49.5, 49.5, 0.01, v, 1.0)).collect();
        assert!(prices.windows(2).all(|w| w[1] > w[0] - 1e-8));
        let ks: Vec<f64> = (0..60).map(|i| 20.0 + i as f64).collect();
        let c: Vec<f64> = ks.iter().map(|&k| black_scholes_call(49.5, k, 0.01, 0.2, 1.0)).collect();
        assert!(c.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] > -1e-8));
    }

    #[test]
    fn two_atom_grid() {
        let d = Domain::new(0.0, 100.0).unwrap();
        let spec = ProblemSpec::new(
            d,
            PiecewiseFunction::monomial(d, 2),
            vec![MomentConstraint::pinned(PiecewiseFunction::monomial(d, 1), 50.0)],
            Sense::Upper,
            MixtureFamily::Dirac,
        )
        .unwrap();
        let cfg = GridOracleConfig::new(2, 0.0, 100.0).unwrap();
        assert!((grid_lp_bound(&spec, &cfg).unwrap() - 5000.0).abs() < 1e-9);
        assert!(GridOracleConfig::new(1, 0.0, 1.0).is_err());
    }
}
