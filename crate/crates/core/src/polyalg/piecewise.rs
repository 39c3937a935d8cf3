use super::{roots, Domain, PolyError, Polynomial};

/// Denominator of a rational piece.
#[derive(Debug, Clone, PartialEq)]
pub enum Denominator {
    One,
    /// `(x - root)`. `limit` is the value taken at `root` when the
    /// singularity is removable.
    Linear { root: f64, limit: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub numerator: Polynomial,
    pub denominator: Denominator,
}

impl Piece {
    pub fn polynomial(p: Polynomial) -> Self {
        Piece {
            numerator: p,
            denominator: Denominator::One,
        }
    }

    pub fn rational(numerator: Polynomial, root: f64, limit: Option<f64>) -> Self {
        Piece {
            numerator,
            denominator: Denominator::Linear { root, limit },
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.denominator, Denominator::One)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.denominator {
            Denominator::One => self.numerator.eval(x),
            Denominator::Linear { root, limit } => {
                if x == root {
                    limit.unwrap_or(f64::NAN)
                } else {
                    self.numerator.eval(x) / (x - root)
                }
            }
        }
    }

    /// Polynomial whose roots are the stationary points of the piece:
    /// `N'` for a polynomial, `N'(x)(x - c) - N(x)` for `N / (x - c)`.
    pub fn critical_polynomial(&self) -> Polynomial {
        let d = self.numerator.derivative();
        match self.denominator {
            Denominator::One => d,
            Denominator::Linear { root, .. } => &d.mul_linear(root) - &self.numerator,
        }
    }

    /// Sign of the limit as `x -> +inf` (`toward_neg = false`) or `-inf`,
    /// reported only when the piece diverges.
    fn divergence(&self, toward_neg: bool) -> Option<f64> {
        let n = self.numerator.degree()?;
        let eff = match self.denominator {
            Denominator::One => n as i64,
            Denominator::Linear { .. } => n as i64 - 1,
        };
        if eff < 1 {
            return None;
        }
        let mut s = self.numerator.leading().signum();
        if toward_neg && eff % 2 == 1 {
            s = -s;
        }
        Some(s)
    }

    fn limit_at(&self, c: f64) -> Option<f64> {
        match self.denominator {
            Denominator::One => Some(self.numerator.eval(c)),
            Denominator::Linear { root, limit } if root == c => limit,
            Denominator::Linear { .. } => Some(self.eval(c)),
        }
    }
}

/// Result of [`PiecewiseFunction::global_max`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxResult {
    pub argmax: f64,
    pub value: f64,
    /// The function grows without bound on the domain; `argmax` is the
    /// infinite endpoint and `value` is `+inf`.
    pub unbounded: bool,
}

/// A piecewise rational function of one variable.
///
/// `breaks` has one more entry than `pieces`; piece `k` covers
/// `[breaks[k], breaks[k + 1])`, the last piece also covering its finite
/// right end. The outer breaks may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
}

impl PiecewiseFunction {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Piece>) -> Result<Self, PolyError> {
        if pieces.is_empty() || breaks.len() != pieces.len() + 1 {
            return Err(PolyError::Malformed(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                pieces.len()
            )));
        }
        if breaks.iter().any(|b| b.is_nan()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PolyError::Malformed("breakpoints must be strictly increasing".into()));
        }
        let n = breaks.len();
        if breaks[1..n - 1].iter().any(|b| !b.is_finite())
            || breaks[0] == f64::INFINITY
            || breaks[n - 1] == f64::NEG_INFINITY
        {
            return Err(PolyError::Malformed("interior breakpoints must be finite".into()));
        }
        for (k, p) in pieces.iter().enumerate() {
            if let Denominator::Linear { root, limit } = p.denominator {
                let inside = root > breaks[k] && root < breaks[k + 1];
                if !root.is_finite() || (inside && !limit.is_some_and(f64::is_finite)) {
                    return Err(PolyError::Malformed(format!(
                        "pole at {root} inside piece {k} without a removable limit"
                    )));
                }
            }
        }
        Ok(PiecewiseFunction { breaks, pieces })
    }

    pub fn polynomial(support: Domain, p: Polynomial) -> Self {
        PiecewiseFunction {
            breaks: vec![support.lower(), support.upper()],
            pieces: vec![Piece::polynomial(p)],
        }
    }

    pub fn from_polynomials(breaks: Vec<f64>, polys: Vec<Polynomial>) -> Result<Self, PolyError> {
        PiecewiseFunction::new(breaks, polys.into_iter().map(Piece::polynomial).collect())
    }

    pub fn zero(support: Domain) -> Self {
        PiecewiseFunction::polynomial(support, Polynomial::zero())
    }

    /// `x^k` on `support`.
    pub fn monomial(support: Domain, k: usize) -> Self {
        PiecewiseFunction::polynomial(support, Polynomial::monomial(k))
    }

    /// `max(x - strike, 0)` on `support`.
    pub fn call(support: Domain, strike: f64) -> Self {
        PiecewiseFunction::from_polynomials(
            vec![f64::NEG_INFINITY, strike, f64::INFINITY],
            vec![Polynomial::zero(), Polynomial::linear(-strike, 1.0)],
        )
        .and_then(|f| f.restrict(support))
        .unwrap_or_else(|_| {
            // The strike lies outside the support: a single branch applies.
            let p = if strike <= support.lower() {
                Polynomial::linear(-strike, 1.0)
            } else {
                Polynomial::zero()
            };
            PiecewiseFunction::polynomial(support, p)
        })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn support(&self) -> Domain {
        Domain::new(self.breaks[0], self.breaks[self.breaks.len() - 1])
            .expect("breaks are strictly increasing")
    }

    pub fn is_piecewise_polynomial(&self) -> bool {
        self.pieces.iter().all(Piece::is_polynomial)
    }

    /// Largest numerator degree over all pieces.
    pub fn max_degree(&self) -> usize {
        self.pieces
            .iter()
            .filter_map(|p| p.numerator.degree())
            .max()
            .unwrap_or(0)
    }

    /// True when every piece is the polynomial `x^k`.
    pub fn is_monomial(&self, k: usize) -> bool {
        let m = Polynomial::monomial(k);
        self.pieces
            .iter()
            .all(|p| p.is_polynomial() && p.numerator == m)
    }

    fn index_of(&self, x: f64) -> usize {
        // Right piece at interior breakpoints.
        let k = self.breaks.partition_point(|&b| b <= x);
        k.saturating_sub(1).min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> Result<f64, PolyError> {
        let dom = self.support();
        if !dom.contains(x) {
            return Err(PolyError::OutsideSupport {
                x,
                lo: dom.lower(),
                hi: dom.upper(),
            });
        }
        Ok(self.pieces[self.index_of(x)].eval(x))
    }

    /// Evaluates with the first/last piece extended beyond the support.
    pub fn eval_extended(&self, x: f64) -> f64 {
        self.pieces[self.index_of(x)].eval(x)
    }

    /// Restricts to a subdomain of the support.
    pub fn restrict(&self, dom: Domain) -> Result<Self, PolyError> {
        let sup = self.support();
        if !sup.contains_domain(&dom) {
            return Err(PolyError::OutsideSupport {
                x: if dom.lower() < sup.lower() { dom.lower() } else { dom.upper() },
                lo: sup.lower(),
                hi: sup.upper(),
            });
        }
        let mut breaks = vec![dom.lower()];
        let mut pieces = Vec::new();
        for (k, p) in self.pieces.iter().enumerate() {
            let (l, r) = (self.breaks[k], self.breaks[k + 1]);
            if r <= dom.lower() || l >= dom.upper() {
                continue;
            }
            if l > dom.lower() {
                breaks.push(l);
            }
            pieces.push(p.clone());
        }
        breaks.push(dom.upper());
        PiecewiseFunction::new(breaks, pieces)
    }

    pub fn scale(&self, k: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                numerator: p.numerator.scale(k),
                denominator: match p.denominator {
                    Denominator::One => Denominator::One,
                    Denominator::Linear { root, limit } => Denominator::Linear {
                        root,
                        limit: limit.map(|l| l * k),
                    },
                },
            })
            .collect();
        PiecewiseFunction {
            breaks: self.breaks.clone(),
            pieces,
        }
    }

    /// `sum w_i f_i` over the common support.
    ///
    /// Returns `None` when two terms carry linear denominators with different
    /// roots on a common interval (the sum is no longer of this form) or when
    /// the supports do not overlap.
    pub fn linear_combination(terms: &[(f64, &PiecewiseFunction)]) -> Option<Self> {
        let (_, first) = terms.first()?;
        let mut dom = first.support();
        for (_, f) in &terms[1..] {
            dom = dom.intersect(&f.support())?;
        }
        let mut breaks: Vec<f64> = terms
            .iter()
            .flat_map(|(_, f)| f.breaks.iter().copied())
            .filter(|&b| b > dom.lower() && b < dom.upper())
            .collect();
        breaks.push(dom.lower());
        breaks.push(dom.upper());
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup();

        let mut pieces = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let probe = if w[0].is_finite() {
                w[0]
            } else if w[1].is_finite() {
                w[1] - 1.0
            } else {
                0.0
            };
            let parts: Vec<(f64, &Piece)> = terms
                .iter()
                .map(|(wt, f)| (*wt, &f.pieces[f.index_of(probe)]))
                .collect();
            pieces.push(combine_pieces(&parts)?);
        }
        PiecewiseFunction::new(breaks, pieces).ok()
    }

    /// Global maximum over `dom` (intersected with the support).
    ///
    /// Candidates are the finite ends of every piece inside `dom` and the
    /// real roots of each piece's critical polynomial. An infinite end of
    /// `dom` is inspected through the limiting behaviour of the outer piece.
    /// Ties go to the smallest abscissa.
    pub fn global_max(&self, dom: Domain) -> MaxResult {
        let Some(dom) = dom.intersect(&self.support()) else {
            return MaxResult {
                argmax: f64::NAN,
                value: f64::NAN,
                unbounded: false,
            };
        };
        let mut cands = Vec::new();
        for (k, p) in self.pieces.iter().enumerate() {
            let l = self.breaks[k].max(dom.lower());
            let r = self.breaks[k + 1].min(dom.upper());
            if l > r {
                continue;
            }
            if r == f64::INFINITY && p.divergence(false) == Some(1.0) {
                return unbounded(f64::INFINITY);
            }
            if l == f64::NEG_INFINITY && p.divergence(true) == Some(1.0) {
                return unbounded(f64::NEG_INFINITY);
            }
            if l.is_finite() {
                cands.push((l, None));
            }
            if r.is_finite() {
                cands.push((r, None));
                if r < dom.upper() && l < r {
                    // Left limit at an interior break; probed just inside the
                    // piece so the returned value is attained.
                    let x = (r - 1e-13 * r.abs().max(1.0)).max(l);
                    cands.push((x, Some(p.eval(x))));
                }
            }
            let crit = p.critical_polynomial();
            if !crit.is_zero() && l < r {
                cands.extend(
                    roots::real_roots(&crit)
                        .into_iter()
                        .filter(|&x| x > l && x < r)
                        .map(|x| (x, None)),
                );
            }
            if !l.is_finite() && !r.is_finite() {
                cands.push((0.0, None));
            } else if !l.is_finite() || !r.is_finite() {
                // Constant or decaying outer piece: a finite probe suffices.
                cands.push((if l.is_finite() { l } else { r }, None));
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = MaxResult {
            argmax: f64::NAN,
            value: f64::NEG_INFINITY,
            unbounded: false,
        };
        for (x, v) in cands {
            let v = v.unwrap_or_else(|| self.eval(x).unwrap_or(f64::NEG_INFINITY));
            if v > best.value {
                best.argmax = x;
                best.value = v;
            }
        }
        best
    }
}

fn unbounded(at: f64) -> MaxResult {
    MaxResult {
        argmax: at,
        value: f64::INFINITY,
        unbounded: true,
    }
}

fn combine_pieces(parts: &[(f64, &Piece)]) -> Option<Piece> {
    let mut root = None;
    for (_, p) in parts {
        if let Denominator::Linear { root: c, .. } = p.denominator {
            match root {
                None => root = Some(c),
                Some(r) if r == c => {}
                Some(_) => return None,
            }
        }
    }
    match root {
        None => {
            let mut n = Polynomial::zero();
            for (w, p) in parts {
                n = &n + &p.numerator.scale(*w);
            }
            Some(Piece::polynomial(n))
        }
        Some(c) => {
            let mut n = Polynomial::zero();
            let mut limit = Some(0.0);
            for (w, p) in parts {
                let term = match p.denominator {
                    Denominator::One => p.numerator.mul_linear(c),
                    Denominator::Linear { .. } => p.numerator.clone(),
                };
                n = &n + &term.scale(*w);
                limit = match (limit, p.limit_at(c)) {
                    (Some(a), Some(b)) => Some(a + w * b),
                    _ => None,
                };
            }
            Some(Piece::rational(n, c, limit))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(lo: f64, hi: f64) -> Domain {
        Domain::new(lo, hi).unwrap()
    }

    #[test]
    fn eval_examples() {
        let sq = PiecewiseFunction::monomial(Domain::real_line(), 2);
        assert_eq!(sq.eval(3.0).unwrap(), 9.0);

        let call = PiecewiseFunction::call(d(0.0, 100.0), 50.0);
        assert_eq!(call.pieces().len(), 2);
        assert_eq!(call.eval(50.0).unwrap(), 0.0);
        assert_eq!(call.eval(60.0).unwrap(), 10.0);

        let r = PiecewiseFunction::new(
            vec![0.0, 10.0],
            vec![Piece::rational(Polynomial::new(vec![-25.0, 0.0, 1.0]), 5.0, Some(10.0))],
        )
        .unwrap();
        assert_eq!(r.eval(5.0).unwrap(), 10.0);
        assert!((r.eval(5.0 + 1e-7).unwrap() - 10.0).abs() < 1e-6);
    }

    #[test]
    fn eval_outside_support_is_an_error() {
        let call = PiecewiseFunction::call(d(0.0, 100.0), 50.0);
        assert!(matches!(call.eval(101.0), Err(PolyError::OutsideSupport { .. })));
        assert_eq!(call.eval(100.0).unwrap(), 50.0);
    }

    #[test]
    fn interior_pole_needs_limit() {
        let bad = PiecewiseFunction::new(
            vec![0.0, 10.0],
            vec![Piece::rational(Polynomial::monomial(1), 5.0, None)],
        );
        assert!(bad.is_err());
        assert!(PiecewiseFunction::new(vec![0.0, 1.0, 1.0], vec![Piece::polynomial(Polynomial::zero()); 2]).is_err());
    }

    #[test]
    fn global_max_examples() {
        let f = PiecewiseFunction::polynomial(Domain::real_line(), Polynomial::new(vec![-7.0, 6.0, -1.0]));
        let m = f.global_max(d(0.0, 10.0));
        assert_eq!((m.argmax, m.value, m.unbounded), (3.0, 2.0, false));

        let call = PiecewiseFunction::call(d(0.0, 100.0), 50.0);
        let m = call.global_max(d(0.0, 100.0));
        assert_eq!((m.argmax, m.value, m.unbounded), (100.0, 50.0, false));

        let id = PiecewiseFunction::monomial(Domain::from(0.0), 1);
        assert!(id.global_max(Domain::from(0.0)).unbounded);
    }

    #[test]
    fn global_max_rational_piece() {
        // (x^2 + 1) / (x - (-1)) on [0, 5]: minimum inside, maximum at an end.
        let f = PiecewiseFunction::new(
            vec![0.0, 5.0],
            vec![Piece::rational(Polynomial::new(vec![1.0, 0.0, 1.0]), -1.0, None)],
        )
        .unwrap();
        let m = f.global_max(d(0.0, 5.0));
        assert_eq!(m.argmax, 5.0);
        assert!((m.value - 26.0 / 6.0).abs() < 1e-14);
        // Negated: the interior stationary point at sqrt(2) - 1 becomes the max.
        let m = f.scale(-1.0).global_max(d(0.0, 5.0));
        assert!((m.argmax - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn linear_combination_merges_breaks() {
        let dom = d(0.0, 100.0);
        let call = PiecewiseFunction::call(dom, 50.0);
        let id = PiecewiseFunction::monomial(dom, 1);
        let r = PiecewiseFunction::linear_combination(&[(1.0, &call), (-1.0, &id)]).unwrap();
        assert_eq!(r.breaks(), &[0.0, 50.0, 100.0]);
        assert_eq!(r.eval(20.0).unwrap(), -20.0);
        assert_eq!(r.eval(70.0).unwrap(), -50.0);
    }

    #[test]
    fn linear_combination_shares_pole() {
        let dom = d(0.0, 10.0);
        let a = PiecewiseFunction::new(
            vec![0.0, 10.0],
            vec![Piece::rational(Polynomial::new(vec![-25.0, 0.0, 1.0]), 5.0, Some(10.0))],
        )
        .unwrap();
        let b = PiecewiseFunction::monomial(dom, 1);
        let s = PiecewiseFunction::linear_combination(&[(2.0, &a), (1.0, &b)]).unwrap();
        assert!((s.eval(7.0).unwrap() - (2.0 * 12.0 + 7.0)).abs() < 1e-12);
        assert_eq!(s.eval(5.0).unwrap(), 25.0);

        let c = PiecewiseFunction::new(
            vec![0.0, 10.0],
            vec![Piece::rational(Polynomial::monomial(1), -3.0, None)],
        )
        .unwrap();
        assert!(PiecewiseFunction::linear_combination(&[(1.0, &a), (1.0, &c)]).is_none());
    }

    #[test]
    fn restrict_drops_pieces() {
        let call = PiecewiseFunction::call(Domain::real_line(), 50.0);
        let r = call.restrict(d(60.0, 70.0)).unwrap();
        assert_eq!(r.pieces().len(), 1);
        assert_eq!(r.eval(65.0).unwrap(), 15.0);
        assert!(PiecewiseFunction::call(d(0.0, 1.0), 5.0).eval(0.5).unwrap() == 0.0);
    }
}
