//! Mixture components `H_x` and the transformed functions
//! `x -> E[f(U)], U ~ H_x`.
//!
//! A bound over mixtures of `H_x` is a bound over point masses once every
//! target and constraint function is replaced by its component expectation,
//! so the column-generation engine only ever sees transformed functions.
//!
//! | family | evaluation |
//! |---|---|
//! | `Dirac` | identity |
//! | `UniformZero`, `KhintchineUniform` | exact piecewise rational in `x` |
//! | `Lognormal` | closed-form partial moments for piecewise polynomials |
//! | `SmoothedUniform` | adaptive quadrature |

use thiserror::Error;

use crate::model::MixtureFamily;
use crate::numeric::{integrate_pieces, normal_cdf, normal_pdf, normal_quantile, QuadError, DEFAULT_REL_TOL};
use crate::polyalg::{Piece, PiecewiseFunction, PolyError, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixtureError {
    #[error("lognormal components need a positive mean, got {0}")]
    NonPositiveMean(f64),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Log-scale parameters of a lognormal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalParams {
    pub mu_x: f64,
    pub sigma_x: f64,
}

/// Lognormal parameters giving mean `x` and standard deviation `alpha`.
pub fn lognormal_params(x: f64, alpha: f64) -> Result<LognormalParams, MixtureError> {
    if !(x > 0.0) {
        return Err(MixtureError::NonPositiveMean(x));
    }
    let r = alpha / x;
    let s2 = (r * r).ln_1p();
    Ok(LognormalParams {
        mu_x: x.ln() - 0.5 * s2,
        sigma_x: s2.sqrt(),
    })
}

/// Logistic function `1 / (1 + e^-z)` without overflow.
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)`.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Density of the logistic-smoothed `Uniform(a, b)`:
/// `[L(eta (u - a)) - L(eta (u - b))] / (b - a)` with `L` the logistic
/// function. At `a = b` this is the logistic density centred at `a`.
pub fn smoothed_uniform_pdf(a: f64, b: f64, eta: f64, u: f64) -> f64 {
    let p = eta * (u - a);
    let q = eta * (u - b);
    let width = b - a;
    // L(p) - L(q) = L(p) L(-q) (1 - e^-(p - q))
    let factor = if width > 0.0 {
        -(-eta * width).exp_m1() / width
    } else {
        eta
    };
    logistic(p) * logistic(-q) * factor
}

/// Distribution function matching [`smoothed_uniform_pdf`].
pub fn smoothed_uniform_cdf(a: f64, b: f64, eta: f64, u: f64) -> f64 {
    let p = eta * (u - a);
    let q = eta * (u - b);
    let delta = p - q;
    if !(delta > 0.0) {
        return logistic(p);
    }
    if u <= 0.5 * (a + b) {
        // softplus(p) - softplus(q)
        let diff = if delta < 30.0 {
            (logistic(q) * delta.exp_m1()).ln_1p()
        } else {
            softplus(p) - softplus(q)
        };
        (diff / delta).clamp(0.0, 1.0)
    } else {
        let diff = if delta < 30.0 {
            (logistic(-p) * delta.exp_m1()).ln_1p()
        } else {
            softplus(-q) - softplus(-p)
        };
        (1.0 - diff / delta).clamp(0.0, 1.0)
    }
}

/// Half-width beyond `[a, b]` outside which the smoothed density is below
/// `1e-14` of its peak.
fn smoothed_tail(eta: f64) -> f64 {
    32.24 / eta
}

/// Endpoints `(a, b)` of the uniform-type component at `x`.
fn uniform_endpoints(family: MixtureFamily, x: f64) -> Option<(f64, f64)> {
    let mode = match family {
        MixtureFamily::UniformZero => 0.0,
        MixtureFamily::KhintchineUniform { mode } => mode,
        MixtureFamily::SmoothedUniform { mode, .. } => mode,
        _ => return None,
    };
    Some((x.min(mode), x.max(mode)))
}

/// Density of `H_x` at `u`. Uniform components degenerate to a point mass
/// when `x` equals the mode; the density is then `+inf` at the mode and
/// zero elsewhere.
pub fn component_pdf(family: MixtureFamily, x: f64, u: f64) -> Result<f64, MixtureError> {
    match family {
        MixtureFamily::Dirac => Err(MixtureError::Unsupported(
            "point-mass components have no density".into(),
        )),
        MixtureFamily::UniformZero | MixtureFamily::KhintchineUniform { .. } => {
            let (a, b) = uniform_endpoints(family, x).unwrap();
            Ok(if a == b {
                if u == a {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else if u >= a && u <= b {
                1.0 / (b - a)
            } else {
                0.0
            })
        }
        MixtureFamily::Lognormal { alpha } => {
            let lp = lognormal_params(x, alpha)?;
            Ok(if u <= 0.0 {
                0.0
            } else {
                normal_pdf((u.ln() - lp.mu_x) / lp.sigma_x) / (u * lp.sigma_x)
            })
        }
        MixtureFamily::SmoothedUniform { eta, .. } => {
            let (a, b) = uniform_endpoints(family, x).unwrap();
            Ok(smoothed_uniform_pdf(a, b, eta, u))
        }
    }
}

pub fn component_cdf(family: MixtureFamily, x: f64, u: f64) -> Result<f64, MixtureError> {
    match family {
        MixtureFamily::Dirac => Ok(if u >= x { 1.0 } else { 0.0 }),
        MixtureFamily::UniformZero | MixtureFamily::KhintchineUniform { .. } => {
            let (a, b) = uniform_endpoints(family, x).unwrap();
            Ok(if u >= b {
                1.0
            } else if u < a {
                0.0
            } else {
                (u - a) / (b - a)
            })
        }
        MixtureFamily::Lognormal { alpha } => {
            let lp = lognormal_params(x, alpha)?;
            Ok(if u <= 0.0 {
                0.0
            } else {
                normal_cdf((u.ln() - lp.mu_x) / lp.sigma_x)
            })
        }
        MixtureFamily::SmoothedUniform { eta, .. } => {
            let (a, b) = uniform_endpoints(family, x).unwrap();
            Ok(smoothed_uniform_cdf(a, b, eta, u))
        }
    }
}

/// Quantile of `H_x` for `p` in `(0, 1)`.
pub fn component_quantile(family: MixtureFamily, x: f64, p: f64) -> Result<f64, MixtureError> {
    match family {
        MixtureFamily::Dirac => Ok(x),
        MixtureFamily::UniformZero | MixtureFamily::KhintchineUniform { .. } => {
            let (a, b) = uniform_endpoints(family, x).unwrap();
            Ok(a + p * (b - a))
        }
        MixtureFamily::Lognormal { alpha } => {
            let lp = lognormal_params(x, alpha)?;
            Ok((lp.mu_x + lp.sigma_x * normal_quantile(p)).exp())
        }
        MixtureFamily::SmoothedUniform { eta, .. } => {
            let (a, b) = uniform_endpoints(family, x).unwrap();
            let reach = 40.0 / eta;
            let (mut lo, mut hi) = (a - reach, b + reach);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if smoothed_uniform_cdf(a, b, eta, mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Evaluator {
    Exact(PiecewiseFunction),
    /// Lognormal partial moments of a piecewise polynomial.
    LognormalClosedForm,
    Quadrature,
}

/// `x -> E[base(U)]` with `U ~ H_x`. Outside its support the base function
/// is extended by its outer pieces, since components may spill over.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedFunction {
    family: MixtureFamily,
    base: PiecewiseFunction,
    evaluator: Evaluator,
}

pub fn transform(base: &PiecewiseFunction, family: MixtureFamily) -> TransformedFunction {
    let evaluator = match family {
        MixtureFamily::Dirac => Evaluator::Exact(base.clone()),
        MixtureFamily::UniformZero => uniform_exact(base, 0.0),
        MixtureFamily::KhintchineUniform { mode } => uniform_exact(base, mode),
        MixtureFamily::Lognormal { .. } if base.is_piecewise_polynomial() => Evaluator::LognormalClosedForm,
        _ => Evaluator::Quadrature,
    };
    TransformedFunction {
        family,
        base: base.clone(),
        evaluator,
    }
}

/// `(G(x) - G(m)) / (x - m)` with `G` a continuous antiderivative of the base.
fn uniform_exact(base: &PiecewiseFunction, m: f64) -> Evaluator {
    if !base.is_piecewise_polynomial() {
        return Evaluator::Quadrature;
    }
    let breaks = base.breaks();
    let pieces = base.pieces();
    let n = pieces.len();
    let anti: Vec<Polynomial> = pieces.iter().map(|p| p.numerator.antiderivative()).collect();
    // Piece whose (extended) interval holds the mode.
    let km = (breaks.partition_point(|&b| b <= m)).saturating_sub(1).min(n - 1);
    let mut offset = vec![0.0; n];
    offset[km] = -anti[km].eval(m);
    for k in km + 1..n {
        let b = breaks[k];
        offset[k] = anti[k - 1].eval(b) + offset[k - 1] - anti[k].eval(b);
    }
    for k in (0..km).rev() {
        let b = breaks[k + 1];
        offset[k] = anti[k + 1].eval(b) + offset[k + 1] - anti[k].eval(b);
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let num = &anti[k] + &Polynomial::constant(offset[k]);
        let (l, r) = (breaks[k], breaks[k + 1]);
        let touches_mode = (k == 0 || l <= m) && (k == n - 1 || m <= r);
        let piece = if touches_mode {
            match num.divide_by_linear(m) {
                Ok(q) => Piece::polynomial(q),
                Err(_) => Piece::rational(num, m, Some(pieces[k].numerator.eval(m))),
            }
        } else {
            Piece::rational(num, m, None)
        };
        out.push(piece);
    }
    match PiecewiseFunction::new(breaks.to_vec(), out) {
        Ok(f) => Evaluator::Exact(f),
        Err(_) => Evaluator::Quadrature,
    }
}

impl TransformedFunction {
    pub fn family(&self) -> MixtureFamily {
        self.family
    }

    pub fn base(&self) -> &PiecewiseFunction {
        &self.base
    }

    /// Closed form as a piecewise rational function of `x`, when one exists.
    pub fn exact(&self) -> Option<&PiecewiseFunction> {
        match &self.evaluator {
            Evaluator::Exact(f) => Some(f),
            _ => None,
        }
    }

    /// Whether evaluation avoids numerical integration.
    pub fn is_closed_form(&self) -> bool {
        !matches!(self.evaluator, Evaluator::Quadrature)
    }

    pub fn eval(&self, x: f64) -> Result<f64, MixtureError> {
        match &self.evaluator {
            Evaluator::Exact(f) => Ok(f.eval_extended(x)),
            Evaluator::LognormalClosedForm => self.lognormal_closed_form(x),
            Evaluator::Quadrature => self.eval_numeric(x),
        }
    }

    /// Component expectation by adaptive quadrature, regardless of any
    /// closed form.
    pub fn eval_numeric(&self, x: f64) -> Result<f64, MixtureError> {
        let f = |u: f64| self.base.eval_extended(u);
        match self.family {
            MixtureFamily::Dirac => Ok(f(x)),
            MixtureFamily::UniformZero | MixtureFamily::KhintchineUniform { .. } => {
                let (a, b) = uniform_endpoints(self.family, x).unwrap();
                if a == b {
                    return Ok(f(a));
                }
                let pts = self.points_within(a, b);
                let v = quad(f, &pts)?;
                Ok(v / (b - a))
            }
            MixtureFamily::Lognormal { alpha } => {
                let lp = lognormal_params(x, alpha)?;
                let deg = self.base.max_degree().max(1) as f64;
                let reach = 12.0 + 4.0 * deg * lp.sigma_x;
                let to_t = |u: f64| (u.ln() - lp.mu_x) / lp.sigma_x;
                let mut pts = vec![-reach, reach];
                for &b in self.inner_breaks() {
                    if b > 0.0 {
                        let t = to_t(b);
                        if t > -reach && t < reach {
                            pts.push(t);
                        }
                    }
                }
                pts.sort_by(|a, b| a.total_cmp(b));
                Ok(quad(|t| f((lp.mu_x + lp.sigma_x * t).exp()) * normal_pdf(t), &pts)?)
            }
            MixtureFamily::SmoothedUniform { eta, .. } => {
                let (a, b) = uniform_endpoints(self.family, x).unwrap();
                let tail = smoothed_tail(eta);
                let mut pts = self.points_within(a - tail, b + tail);
                pts.extend([a, b]);
                pts.sort_by(|p, q| p.total_cmp(q));
                pts.dedup();
                Ok(quad(|u| f(u) * smoothed_uniform_pdf(a, b, eta, u), &pts)?)
            }
        }
    }

    fn inner_breaks(&self) -> &[f64] {
        let b = self.base.breaks();
        &b[1..b.len() - 1]
    }

    /// `[lo, hi]` split at the base breakpoints it contains.
    fn points_within(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = vec![lo];
        pts.extend(self.inner_breaks().iter().copied().filter(|&b| b > lo && b < hi));
        pts.push(hi);
        pts
    }

    fn lognormal_closed_form(&self, x: f64) -> Result<f64, MixtureError> {
        let MixtureFamily::Lognormal { alpha } = self.family else {
            unreachable!("closed form is only built for lognormal components");
        };
        let lp = lognormal_params(x, alpha)?;
        let (mu, s) = (lp.mu_x, lp.sigma_x);
        let breaks = self.base.breaks();
        let n = self.base.pieces().len();
        let mut total = 0.0;
        for (k, piece) in self.base.pieces().iter().enumerate() {
            let l = if k == 0 { 0.0 } else { breaks[k].max(0.0) };
            let r = if k == n - 1 { f64::INFINITY } else { breaks[k + 1] };
            if r <= 0.0 || l >= r {
                continue;
            }
            let (ln_l, ln_r) = (l.ln(), r.ln());
            for (j, &a) in piece.numerator.coeffs().iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let j = j as f64;
                let shift = mu + j * s * s;
                let zl = (ln_l - shift) / s;
                let zr = (ln_r - shift) / s;
                let mass = if zl > 0.0 {
                    normal_cdf(-zl) - normal_cdf(-zr)
                } else {
                    normal_cdf(zr) - normal_cdf(zl)
                };
                total += a * (j * mu + 0.5 * j * j * s * s).exp() * mass;
            }
        }
        Ok(total)
    }
}

fn quad(mut f: impl FnMut(f64) -> f64, pts: &[f64]) -> Result<f64, QuadError> {
    let mag = pts.iter().fold(0.0f64, |m, &u| m.max(f(u).abs()));
    integrate_pieces(f, pts, DEFAULT_REL_TOL, 1e-14 * mag.max(1e-300))
}
