//! Problem specification: support, target, moment constraints, bound sense
//! and mixture family.

use thiserror::Error;

use crate::polyalg::{Domain, PiecewiseFunction, PolyError, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("at least one moment constraint is required")]
    NoConstraints,
    #[error("constraint {index}: lower value {lo} exceeds upper value {hi}")]
    EmptyInterval { index: usize, lo: f64, hi: f64 },
    #[error("constraint {index}: bounds must not be NaN")]
    NanBound { index: usize },
    #[error("{what} is not defined on the whole support")]
    NotDefinedOnSupport { what: String },
    #[error("second moment {second} is below the squared mean {mean}^2")]
    Jensen { mean: f64, second: f64 },
    #[error("{family} components need a support inside [0, inf)")]
    NegativeSupport { family: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("duplicate strike {0}")]
    DuplicateStrike(f64),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `lo <= E[g(X)] <= hi`. Equal bounds pin the moment.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentConstraint {
    pub g: PiecewiseFunction,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
}

impl MomentConstraint {
    pub fn new(g: PiecewiseFunction, sigma_lo: f64, sigma_hi: f64) -> Self {
        MomentConstraint { g, sigma_lo, sigma_hi }
    }

    pub fn pinned(g: PiecewiseFunction, value: f64) -> Self {
        MomentConstraint::new(g, value, value)
    }

    pub fn is_pinned(&self) -> bool {
        self.sigma_lo == self.sigma_hi
    }
}

/// Component distribution `H_x` attached to an atom `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixtureFamily {
    /// Point mass at `x`.
    Dirac,
    /// `Uniform(0, x)`.
    UniformZero,
    /// Uniform between the mode and `x`; mixtures are exactly the unimodal
    /// laws with that mode.
    KhintchineUniform { mode: f64 },
    /// Lognormal with mean `x` and standard deviation `alpha`.
    Lognormal { alpha: f64 },
    /// Logistic-smoothed uniform between the mode and `x`.
    SmoothedUniform { mode: f64, eta: f64 },
}

impl MixtureFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MixtureFamily::Dirac => "dirac",
            MixtureFamily::UniformZero => "uniform-zero",
            MixtureFamily::KhintchineUniform { .. } => "khintchine-uniform",
            MixtureFamily::Lognormal { .. } => "lognormal",
            MixtureFamily::SmoothedUniform { .. } => "smoothed-uniform",
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |s: String| Err(ModelError::InvalidParameter(s));
        match *self {
            MixtureFamily::Dirac | MixtureFamily::UniformZero => Ok(()),
            MixtureFamily::KhintchineUniform { mode } if !mode.is_finite() => bad(format!("mode {mode}")),
            MixtureFamily::KhintchineUniform { .. } => Ok(()),
            MixtureFamily::Lognormal { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                bad(format!("lognormal alpha must be positive, got {alpha}"))
            }
            MixtureFamily::Lognormal { .. } => Ok(()),
            MixtureFamily::SmoothedUniform { mode, .. } if !mode.is_finite() => bad(format!("mode {mode}")),
            MixtureFamily::SmoothedUniform { eta, .. } if !(eta > 0.0 && eta.is_finite()) => {
                bad(format!("smoothing eta must be positive, got {eta}"))
            }
            MixtureFamily::SmoothedUniform { .. } => Ok(()),
        }
    }

    /// Components with a density (everything but `Dirac`).
    pub fn has_density(&self) -> bool {
        !matches!(self, MixtureFamily::Dirac)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Upper,
    Lower,
}

impl Sense {
    pub fn name(&self) -> &'static str {
        match self {
            Sense::Upper => "upper",
            Sense::Lower => "lower",
        }
    }
}

/// `sup` (or `inf`) of `E[f(X)]` over mixtures of `family` components whose
/// atoms lie in `support`, subject to the moment constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub support: Domain,
    pub target: PiecewiseFunction,
    pub constraints: Vec<MomentConstraint>,
    pub sense: Sense,
    pub family: MixtureFamily,
    /// Reduced-cost threshold of the stopping rule.
    pub cg_epsilon: f64,
    /// Right end of numeric searches when the support is unbounded above.
    pub search_cap: f64,
}

impl ProblemSpec {
    /// Builds a validated spec with default tolerance and search cap.
    /// Functions are restricted to `support`.
    pub fn new(
        support: Domain,
        target: PiecewiseFunction,
        constraints: Vec<MomentConstraint>,
        sense: Sense,
        family: MixtureFamily,
    ) -> Result<Self, ModelError> {
        let target = restrict_to(&target, support, "target")?;
        let constraints = constraints
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                Ok(MomentConstraint {
                    g: restrict_to(&c.g, support, &format!("constraint {i}"))?,
                    ..c
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let mut spec = ProblemSpec {
            support,
            target,
            constraints,
            sense,
            family,
            cg_epsilon: 0.0,
            search_cap: 0.0,
        };
        spec.search_cap = spec.default_search_cap();
        spec.cg_epsilon = spec.default_epsilon();
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.constraints.is_empty() {
            return Err(ModelError::NoConstraints);
        }
        self.family.validate()?;
        if !(self.cg_epsilon > 0.0) {
            return Err(ModelError::InvalidParameter(format!("cg_epsilon {}", self.cg_epsilon)));
        }
        if !(self.search_cap > self.support.lower()) || self.search_cap.is_nan() {
            return Err(ModelError::InvalidParameter(format!("search_cap {}", self.search_cap)));
        }
        if !self.target.support().contains_domain(&self.support) {
            return Err(ModelError::NotDefinedOnSupport { what: "target".into() });
        }
        for (index, c) in self.constraints.iter().enumerate() {
            if c.sigma_lo.is_nan() || c.sigma_hi.is_nan() {
                return Err(ModelError::NanBound { index });
            }
            if c.sigma_lo > c.sigma_hi {
                return Err(ModelError::EmptyInterval {
                    index,
                    lo: c.sigma_lo,
                    hi: c.sigma_hi,
                });
            }
            if !c.g.support().contains_domain(&self.support) {
                return Err(ModelError::NotDefinedOnSupport {
                    what: format!("constraint {index}"),
                });
            }
        }
        if matches!(
            self.family,
            MixtureFamily::Lognormal { .. } | MixtureFamily::SmoothedUniform { .. }
        ) && self.support.lower() < 0.0
        {
            return Err(ModelError::NegativeSupport {
                family: self.family.name(),
            });
        }
        self.check_jensen()
    }

    fn check_jensen(&self) -> Result<(), ModelError> {
        let mean = self.moment_interval(1);
        let second = self.moment_interval(2);
        if let (Some((lo, hi)), Some((_, s_hi))) = (mean, second) {
            // Smallest squared mean compatible with the mean interval.
            let closest = if lo > 0.0 {
                lo
            } else if hi < 0.0 {
                hi
            } else {
                0.0
            };
            if s_hi < closest * closest * (1.0 - 1e-12) {
                return Err(ModelError::Jensen { mean: closest, second: s_hi });
            }
        }
        Ok(())
    }

    /// Interval on `E[X^k]` if some constraint is on `x^k` exactly.
    /// Several such constraints are intersected.
    pub fn moment_interval(&self, k: usize) -> Option<(f64, f64)> {
        self.constraints
            .iter()
            .filter(|c| c.g.is_monomial(k))
            .map(|c| (c.sigma_lo, c.sigma_hi))
            .reduce(|a, b| (a.0.max(b.0), a.1.min(b.1)))
    }

    /// The mean when a constraint pins `E[X]`.
    pub fn pinned_mean(&self) -> Option<f64> {
        self.moment_interval(1).filter(|(lo, hi)| lo == hi).map(|(lo, _)| lo)
    }

    /// Left end used for numeric searches.
    pub fn search_lower(&self) -> f64 {
        self.support.lower().max(-self.search_cap.abs())
    }

    /// Right end used for numeric searches.
    pub fn search_upper(&self) -> f64 {
        self.support.upper().min(self.search_cap)
    }

    /// `hi` for bounded supports; otherwise `mean + 20 sd` estimated from the
    /// moment constraints, falling back to the scale of the problem data.
    fn default_search_cap(&self) -> f64 {
        if self.support.upper().is_finite() {
            return self.support.upper();
        }
        let data_scale = self
            .constraints
            .iter()
            .flat_map(|c| c.g.breaks().iter().copied())
            .chain(self.target.breaks().iter().copied())
            .chain([self.support.lower()])
            .filter(|v| v.is_finite())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let cap = match self.moment_interval(1) {
            Some((m_lo, m_hi)) if m_hi.is_finite() => {
                let sd = match self.moment_interval(2) {
                    Some((_, s_hi)) if s_hi.is_finite() => (s_hi - m_lo * m_lo).max(0.0).sqrt(),
                    _ => m_hi.abs().max(1.0),
                };
                let sd = match self.family {
                    MixtureFamily::Lognormal { alpha } => sd.max(alpha),
                    _ => sd,
                };
                m_hi + 20.0 * sd.max(1e-3 * m_hi.abs().max(1.0))
            }
            _ => 100.0 * data_scale,
        };
        cap.max(self.support.lower() + 1.0)
    }

    /// `1e-8 * max(1, max |f|)` with `|f|` sampled over the search window.
    fn default_epsilon(&self) -> f64 {
        let lo = self.search_lower();
        let hi = self.search_upper();
        let n = 256;
        let peak = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .filter_map(|x| self.target.eval(x).ok())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        1e-8 * peak
    }

    pub fn with_sense(mut self, sense: Sense) -> Self {
        self.sense = sense;
        self
    }

    pub fn with_family(mut self, family: MixtureFamily) -> Self {
        self.family = family;
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.cg_epsilon = eps;
        self
    }

    pub fn with_search_cap(mut self, cap: f64) -> Self {
        self.search_cap = cap;
        self
    }

    /// Replaces the target and recomputes the default tolerance.
    pub fn with_target(mut self, target: PiecewiseFunction) -> Result<Self, ModelError> {
        self.target = restrict_to(&target, self.support, "target")?;
        self.cg_epsilon = self.default_epsilon();
        Ok(self)
    }
}

fn restrict_to(f: &PiecewiseFunction, support: Domain, what: &str) -> Result<PiecewiseFunction, ModelError> {
    f.restrict(support).map_err(|_| ModelError::NotDefinedOnSupport { what: what.into() })
}

/// `E[max(X - d, 0)]` subject to pinned raw moments `E[X] = mu`,
/// `E[X^2] = sigma2 + mu^2` and optionally `E[X^3]`, on `[0, b]`
/// (`b` may be infinite). Upper sense, point-mass components.
pub fn standard_policy_problem(
    mu: f64,
    sigma2: f64,
    d: f64,
    b: f64,
    third_moment: Option<f64>,
) -> Result<ProblemSpec, ModelError> {
    if !(mu > 0.0 && sigma2 > 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "need mu > 0 and sigma2 > 0, got mu = {mu}, sigma2 = {sigma2}"
        )));
    }
    if !(d >= 0.0) {
        return Err(ModelError::InvalidParameter(format!("deductible {d} must be nonnegative")));
    }
    let support = Domain::new(0.0, b)?;
    let mut constraints = vec![
        MomentConstraint::pinned(PiecewiseFunction::monomial(support, 1), mu),
        MomentConstraint::pinned(PiecewiseFunction::monomial(support, 2), sigma2 + mu * mu),
    ];
    if let Some(m3) = third_moment {
        constraints.push(MomentConstraint::pinned(PiecewiseFunction::monomial(support, 3), m3));
    }
    ProblemSpec::new(
        support,
        PiecewiseFunction::call(support, d),
        constraints,
        Sense::Upper,
        MixtureFamily::Dirac,
    )
}

/// Upper bound on the variance `E[(X - mu)^2]` on `[0, inf)` given the mean
/// and the prices of calls `(strike, price)`.
pub fn option_constrained_problem(prices: &[(f64, f64)], mu: f64) -> Result<ProblemSpec, ModelError> {
    let mut strikes: Vec<f64> = prices.iter().map(|p| p.0).collect();
    strikes.sort_by(|a, b| a.total_cmp(b));
    if let Some(w) = strikes.windows(2).find(|w| w[0] == w[1]) {
        return Err(ModelError::DuplicateStrike(w[0]));
    }
    if let Some(&(k, c)) = prices.iter().find(|(k, c)| !(c >= &0.0) || !k.is_finite()) {
        return Err(ModelError::InvalidParameter(format!("call ({k}, {c})")));
    }
    let support = Domain::from(0.0);
    let mut constraints = vec![MomentConstraint::pinned(PiecewiseFunction::monomial(support, 1), mu)];
    for &(k, c) in prices {
        constraints.push(MomentConstraint::pinned(PiecewiseFunction::call(support, k), c));
    }
    let target = PiecewiseFunction::polynomial(support, Polynomial::new(vec![mu * mu, -2.0 * mu, 1.0]));
    ProblemSpec::new(support, target, constraints, Sense::Upper, MixtureFamily::Dirac)
}

/// `gamma * (min(x, u) - min(x, d))`: the insurer's share of the layer
/// between `d` and `u`.
pub fn coinsurance_payoff(d: f64, u: f64, gamma: f64) -> Result<PiecewiseFunction, ModelError> {
    if !(d >= 0.0 && d < u && u.is_finite()) {
        return Err(ModelError::InvalidParameter(format!("need 0 <= d < u < inf, got d = {d}, u = {u}")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(ModelError::InvalidParameter(format!("gamma {gamma} outside [0, 1]")));
    }
    Ok(PiecewiseFunction::from_polynomials(
        vec![f64::NEG_INFINITY, d, u, f64::INFINITY],
        vec![
            Polynomial::zero(),
            Polynomial::linear(-gamma * d, gamma),
            Polynomial::constant(gamma * (u - d)),
        ],
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_problem_pins_raw_moments() {
        let spec = standard_policy_problem(50.0, 225.0, 25.0, 100.0, None).unwrap();
        assert_eq!(spec.constraints.len(), 2);
        assert_eq!(spec.moment_interval(1), Some((50.0, 50.0)));
        assert_eq!(spec.moment_interval(2), Some((2725.0, 2725.0)));
        assert_eq!(spec.support, Domain::new(0.0, 100.0).unwrap());
        assert_eq!(spec.target.eval(60.0).unwrap(), 35.0);
        assert_eq!(spec.search_cap, 100.0);
        assert!(spec.cg_epsilon > 0.0 && spec.cg_epsilon <= 1e-6);
    }

    #[test]
    fn policy_problem_zero_deductible_is_identity() {
        let spec = standard_policy_problem(50.0, 225.0, 0.0, 100.0, None).unwrap();
        for x in [0.0, 13.0, 100.0] {
            assert_eq!(spec.target.eval(x).unwrap(), x);
        }
    }

    #[test]
    fn policy_problem_rejects_bad_moments() {
        assert!(standard_policy_problem(50.0, -500.0, 25.0, 100.0, None).is_err());
        assert!(standard_policy_problem(50.0, 0.0, 25.0, 100.0, None).is_err());
        assert!(standard_policy_problem(50.0, 225.0, -1.0, 100.0, None).is_err());
    }

    #[test]
    fn jensen_violation_rejected() {
        let dom = Domain::new(0.0, 100.0).unwrap();
        let r = ProblemSpec::new(
            dom,
            PiecewiseFunction::call(dom, 25.0),
            vec![
                MomentConstraint::pinned(PiecewiseFunction::monomial(dom, 1), 50.0),
                MomentConstraint::pinned(PiecewiseFunction::monomial(dom, 2), 2000.0),
            ],
            Sense::Upper,
            MixtureFamily::Dirac,
        );
        assert!(matches!(r, Err(ModelError::Jensen { .. })));
    }

    #[test]
    fn unbounded_support_cap_from_moments() {
        let spec = standard_policy_problem(50.0, 100.0, 50.0, f64::INFINITY, None).unwrap();
        assert!((spec.search_cap - 250.0).abs() < 1e-9);
        assert_eq!(spec.search_upper(), spec.search_cap);
    }

    #[test]
    fn option_problem_shapes() {
        let spec = option_constrained_problem(&[(50.0, 5.05)], 50.0).unwrap();
        assert_eq!(spec.constraints.len(), 2);
        assert_eq!(spec.target.eval(60.0).unwrap(), 100.0);
        let spec = option_constrained_problem(&[], 50.0).unwrap();
        assert_eq!(spec.constraints.len(), 1);
        assert!(matches!(
            option_constrained_problem(&[(50.0, 1.0), (50.0, 2.0)], 50.0),
            Err(ModelError::DuplicateStrike(_))
        ));
    }

    #[test]
    fn coinsurance_examples() {
        let f = coinsurance_payoff(10.0, 20.0, 0.5).unwrap();
        assert_eq!(f.eval(5.0).unwrap(), 0.0);
        assert_eq!(f.eval(15.0).unwrap(), 2.5);
        assert_eq!(f.eval(30.0).unwrap(), 5.0);
        let z = coinsurance_payoff(10.0, 20.0, 0.0).unwrap();
        assert!([0.0, 12.0, 50.0].iter().all(|&x| z.eval(x).unwrap() == 0.0));
        assert!(coinsurance_payoff(10.0, 10.0, 0.5).is_err());
        assert!(coinsurance_payoff(10.0, 20.0, 1.5).is_err());
    }

    #[test]
    fn family_parameter_ranges() {
        assert!(MixtureFamily::Lognormal { alpha: 0.0 }.validate().is_err());
        assert!(MixtureFamily::SmoothedUniform { mode: 1.0, eta: -1.0 }.validate().is_err());
        assert!(MixtureFamily::KhintchineUniform { mode: 50.0 }.validate().is_ok());
    }

    #[test]
    fn lognormal_needs_nonnegative_support() {
        let dom = Domain::new(-1.0, 1.0).unwrap();
        let r = ProblemSpec::new(
            dom,
            PiecewiseFunction::monomial(dom, 2),
            vec![MomentConstraint::pinned(PiecewiseFunction::monomial(dom, 1), 0.5)],
            Sense::Upper,
            MixtureFamily::Lognormal { alpha: 1.0 },
        );
        assert!(matches!(r, Err(ModelError::NegativeSupport { .. })));
    }
}
