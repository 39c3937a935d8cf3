//! Extremal mixtures: density and distribution evaluation, a grid test for
//! unimodality, bisection on the lognormal width, loss elimination ratios
//! and tabular export.

use log::debug;
use thiserror::Error;

use crate::cg::{moment_envelope, run_cg, BoundResult, CgError};
use crate::mixtures::{component_cdf, component_pdf, component_quantile, MixtureError};
use crate::model::{standard_policy_problem, MixtureFamily, ModelError, ProblemSpec, Sense};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("weights must be nonnegative and sum to one (sum {0})")]
    BadWeights(f64),
    #[error("evaluation window [{0}, {1}] is degenerate")]
    DegenerateWindow(f64, f64),
    #[error(
        "invalid bracket [{alpha_lo}, {alpha_hi}]: unimodal at lower end {lo_unimodal:?}, at upper end {hi_unimodal:?}"
    )]
    Bracket {
        alpha_lo: f64,
        alpha_hi: f64,
        lo_unimodal: Option<bool>,
        hi_unimodal: Option<bool>,
    },
    #[error("bracket end {alpha_hi} is not below the largest feasible standard deviation {limit}")]
    BracketAboveLimit { alpha_hi: f64, limit: f64 },
    #[error("run at alpha = {alpha} did not converge")]
    NotConverged { alpha: f64 },
    #[error(transparent)]
    Cg(#[from] CgError),
    #[error(transparent)]
    Mixture(#[from] MixtureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `sum_x p_x H_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDistribution {
    pub family: MixtureFamily,
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
    /// Evaluation window: extreme component quantiles at `1e-6`, `1 - 1e-6`.
    pub window: (f64, f64),
}

const WINDOW_TAIL: f64 = 1e-6;
const UNIMODAL_GRID: usize = 4096;

impl MixtureDistribution {
    pub fn new(family: MixtureFamily, atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self, ShapeError> {
        let total: f64 = weights.iter().sum();
        if atoms.len() != weights.len()
            || atoms.is_empty()
            || weights.iter().any(|&w| !(w >= 0.0))
            || (total - 1.0).abs() > 1e-9
        {
            return Err(ShapeError::BadWeights(total));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &x in &atoms {
            lo = lo.min(component_quantile(family, x, WINDOW_TAIL)?);
            hi = hi.max(component_quantile(family, x, 1.0 - WINDOW_TAIL)?);
        }
        Ok(MixtureDistribution {
            family,
            atoms,
            weights,
            window: (lo, hi),
        })
    }

    pub fn from_result(r: &BoundResult) -> Result<Self, ShapeError> {
        MixtureDistribution::new(r.family, r.atoms.clone(), r.weights.clone())
    }

    pub fn pdf(&self, u: f64) -> Result<f64, ShapeError> {
        let mut s = 0.0;
        for (&x, &w) in self.atoms.iter().zip(&self.weights) {
            if w > 0.0 {
                s += w * component_pdf(self.family, x, u)?;
            }
        }
        Ok(s)
    }

    pub fn cdf(&self, u: f64) -> Result<f64, ShapeError> {
        let mut s = 0.0;
        for (&x, &w) in self.atoms.iter().zip(&self.weights) {
            s += w * component_cdf(self.family, x, u)?;
        }
        Ok(s.min(1.0))
    }

    fn grid(&self, n: usize) -> Result<Vec<f64>, ShapeError> {
        let (lo, hi) = self.window;
        if !(hi > lo) {
            return Err(ShapeError::DegenerateWindow(lo, hi));
        }
        Ok((0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect())
    }
}

pub fn mixture_pdf(dist: &MixtureDistribution, u: f64) -> Result<f64, ShapeError> {
    dist.pdf(u)
}

pub fn mixture_cdf(dist: &MixtureDistribution, u: f64) -> Result<f64, ShapeError> {
    dist.cdf(u)
}

/// Counts strict local maxima of `values` after merging runs whose values
/// differ by less than `tol`.
fn count_modes(values: &[f64], tol: f64) -> usize {
    let mut runs: Vec<f64> = Vec::new();
    for &v in values {
        match runs.last_mut() {
            Some(last) if (v - *last).abs() < tol => *last = last.max(v),
            _ => runs.push(v),
        }
    }
    (0..runs.len())
        .filter(|&i| (i == 0 || runs[i] > runs[i - 1]) && (i + 1 == runs.len() || runs[i] > runs[i + 1]))
        .count()
}

/// Whether the mixture density has exactly one mode on a 4096-point grid.
pub fn is_unimodal(dist: &MixtureDistribution) -> Result<bool, ShapeError> {
    let us = dist.grid(UNIMODAL_GRID)?;
    let vals = us.iter().map(|&u| dist.pdf(u)).collect::<Result<Vec<_>, _>>()?;
    let peak = vals.iter().fold(0.0f64, |m, &v| m.max(v));
    Ok(count_modes(&vals, 1e-9 * peak) == 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionStep {
    pub alpha: f64,
    pub unimodal: bool,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionResult {
    pub alpha_star: f64,
    pub bound: f64,
    pub unimodal: bool,
    pub result: BoundResult,
    pub trace: Vec<BisectionStep>,
}

fn lognormal_run(spec: &ProblemSpec, alpha: f64) -> Result<(BoundResult, bool), ShapeError> {
    let s = spec.clone().with_family(MixtureFamily::Lognormal { alpha });
    let r = run_cg(&s)?;
    if !r.converged {
        return Err(ShapeError::NotConverged { alpha });
    }
    let uni = is_unimodal(&MixtureDistribution::from_result(&r)?)?;
    debug!("alpha {alpha}: bound {} unimodal {uni}", r.bound);
    Ok((r, uni))
}

/// Smallest lognormal width `alpha` in `[alpha_lo, alpha_hi]` whose extremal
/// mixture is unimodal, located to within `eps` by bisection. The mixture
/// must be unimodal at `alpha_hi` and not at `alpha_lo`.
pub fn bisect_alpha(spec: &ProblemSpec, alpha_lo: f64, alpha_hi: f64, eps: f64) -> Result<BisectionResult, ShapeError> {
    if !(alpha_lo > 0.0 && alpha_lo < alpha_hi) {
        return Err(ShapeError::Bracket {
            alpha_lo,
            alpha_hi,
            lo_unimodal: None,
            hi_unimodal: None,
        });
    }
    let limit = moment_envelope(spec)?.var_hi.sqrt();
    if !(alpha_hi < limit) {
        return Err(ShapeError::BracketAboveLimit { alpha_hi, limit });
    }
    let (mut best, hi_uni) = lognormal_run(spec, alpha_hi)?;
    let (lo_run, lo_uni) = lognormal_run(spec, alpha_lo)?;
    let mut trace = vec![
        BisectionStep {
            alpha: alpha_lo,
            unimodal: lo_uni,
            bound: lo_run.bound,
        },
        BisectionStep {
            alpha: alpha_hi,
            unimodal: hi_uni,
            bound: best.bound,
        },
    ];
    if !hi_uni || lo_uni {
        return Err(ShapeError::Bracket {
            alpha_lo,
            alpha_hi,
            lo_unimodal: Some(lo_uni),
            hi_unimodal: Some(hi_uni),
        });
    }
    let (mut lo, mut hi) = (alpha_lo, alpha_hi);
    while hi - lo > eps {
        let mid = 0.5 * (lo + hi);
        let (r, uni) = lognormal_run(spec, mid)?;
        trace.push(BisectionStep {
            alpha: mid,
            unimodal: uni,
            bound: r.bound,
        });
        if uni {
            hi = mid;
            best = r;
        } else {
            lo = mid;
        }
    }
    Ok(BisectionResult {
        alpha_star: hi,
        bound: best.bound,
        unimodal: true,
        result: best,
        trace,
    })
}

/// Bounds on the expected loss elimination ratio
/// `E[min(X, d)] / E[X] = 1 - E[max(X - d, 0)] / mu` over laws on `[0, b]`
/// with mean `mu` and variance `sigma2`. Returns `(lowest, highest)`.
pub fn ler_bounds(mu: f64, sigma2: f64, b: f64, d: f64, family: MixtureFamily) -> Result<(f64, f64), ShapeError> {
    let spec = standard_policy_problem(mu, sigma2, d, b, None)?.with_family(family);
    let hi_loss = run_cg(&spec.clone().with_sense(Sense::Upper))?;
    let lo_loss = run_cg(&spec.with_sense(Sense::Lower))?;
    Ok(((mu - hi_loss.bound) / mu, (mu - lo_loss.bound) / mu))
}

/// Tabulated extremal distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum ExportTable {
    /// Rows of `(u, pdf, cdf)`.
    Density(Vec<(f64, f64, f64)>),
    /// Rows of `(atom, weight)` for point-mass mixtures.
    Atoms(Vec<(f64, f64)>),
}

pub fn export_distribution(dist: &MixtureDistribution, n_points: usize) -> Result<ExportTable, ShapeError> {
    if !dist.family.has_density() {
        let mut rows: Vec<(f64, f64)> = dist.atoms.iter().copied().zip(dist.weights.iter().copied()).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        return Ok(ExportTable::Atoms(rows));
    }
    let us = dist.grid(n_points.max(2))?;
    let mut rows = Vec::with_capacity(us.len());
    let mut last = 0.0f64;
    for u in us {
        // Guard against round-off making the column decrease.
        let c = dist.cdf(u)?.max(last);
        last = c;
        rows.push((u, dist.pdf(u)?, c));
    }
    Ok(ExportTable::Density(rows))
}
