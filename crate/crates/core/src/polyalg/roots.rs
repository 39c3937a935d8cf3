//! Real roots of univariate polynomials.
//!
//! Degrees up to four are seeded from the closed forms (quadratic formula,
//! Cardano / trigonometric cubic, Ferrari quartic) and then polished by
//! Newton's method on the original coefficients. Higher degrees are handled by
//! isolation: the real critical points (roots of the derivative, found
//! recursively) split the line into monotone segments, and each segment with a
//! sign change is bisected to machine precision.

use std::f64::consts::PI;

use super::{Domain, Polynomial};

/// Residual accepted after polishing, relative to `sum |a_k| |r|^k`.
const RESIDUAL_TOL: f64 = 1e-10;

pub(crate) fn roots_in(p: &Polynomial, dom: Domain) -> Vec<f64> {
    let mut roots = real_roots(p);
    roots.retain(|&r| dom.contains(r));
    roots
}

/// All real roots, ascending, de-duplicated.
pub(crate) fn real_roots(p: &Polynomial) -> Vec<f64> {
    let deg = match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(d) => d,
    };
    let seeds = if deg <= 4 {
        closed_form(p)
    } else {
        isolate(p)
    };
    let mut roots: Vec<f64> = seeds
        .into_iter()
        .filter(|r| r.is_finite())
        .map(|r| polish(p, r))
        .filter(|&r| p.eval(r).abs() <= RESIDUAL_TOL * p.eval_scale(r).max(f64::MIN_POSITIVE))
        .collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs())));
    roots
}

/// Newton refinement that never wanders from its seed; near a multiple root
/// the derivative vanishes and an unguarded step can jump to another root.
fn polish(p: &Polynomial, mut x: f64) -> f64 {
    let dp = p.derivative();
    let seed = x;
    let reach = 1e-4 * (1.0 + seed.abs());
    let mut best = x;
    let mut best_res = p.eval(x).abs();
    for _ in 0..50 {
        let v = p.eval(x);
        if v == 0.0 {
            return x;
        }
        let d = dp.eval(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let nx = x - v / d;
        if !nx.is_finite() || (nx - seed).abs() > reach {
            break;
        }
        let res = p.eval(nx).abs();
        if res < best_res {
            best = nx;
            best_res = res;
        } else if res >= best_res && (nx - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
        if (nx - x).abs() <= f64::EPSILON * nx.abs() {
            break;
        }
        x = nx;
    }
    best
}

fn closed_form(p: &Polynomial) -> Vec<f64> {
    let c = p.coeffs();
    match c.len() {
        2 => vec![-c[0] / c[1]],
        3 => quadratic(c[2], c[1], c[0]),
        4 => cubic_monic(c[2] / c[3], c[1] / c[3], c[0] / c[3]),
        5 => quartic_monic(c[3] / c[4], c[2] / c[4], c[1] / c[4], c[0] / c[4]),
        _ => unreachable!("closed form only for degree 1..=4"),
    }
}

/// Real roots of `a x^2 + b x + c`, using the cancellation-free form.
/// A slightly negative discriminant (rounding) yields the double root.
pub(crate) fn quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    let mag = (b * b).max((4.0 * a * c).abs());
    if disc < 0.0 {
        if disc < -1e-12 * mag {
            return vec![];
        }
        return vec![-b / (2.0 * a)];
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    let (r1, r2) = (q / a, c / q);
    if r1 <= r2 {
        vec![r1, r2]
    } else {
        vec![r2, r1]
    }
}

/// Real roots of `x^3 + a x^2 + b x + c`.
pub(crate) fn cubic_monic(a: f64, b: f64, c: f64) -> Vec<f64> {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    depressed_cubic(p, q).into_iter().map(|t| t - shift).collect()
}

/// Real roots of `t^3 + p t + q`.
fn depressed_cubic(p: f64, q: f64) -> Vec<f64> {
    if p == 0.0 {
        return vec![(-q).cbrt()];
    }
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let mag = (half_q * half_q).max((third_p * third_p * third_p).abs());
    // Near-zero discriminant is a double root; the trigonometric branch keeps it.
    if disc > 1e-12 * mag {
        // One real root. Pick the larger-magnitude cube root to avoid cancellation.
        let u = (-half_q - half_q.signum() * disc.sqrt()).cbrt();
        let t = if u == 0.0 { 0.0 } else { u - third_p / u };
        vec![t]
    } else {
        let r = 2.0 * (-third_p).max(0.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos())
            .collect()
    }
}

/// Real roots of `x^4 + a x^3 + b x^2 + c x + d` by Ferrari's method.
pub(crate) fn quartic_monic(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let shift = a / 4.0;
    let a2 = a * a;
    let p = b - 3.0 * a2 / 8.0;
    let q = c - a * b / 2.0 + a2 * a / 8.0;
    let r = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
    let scale = p.abs().max(q.abs().sqrt()).max(r.abs().sqrt()).max(f64::MIN_POSITIVE);

    let ys: Vec<f64> = if q.abs() <= 1e-14 * scale * scale.sqrt() {
        // Biquadratic: y^4 + p y^2 + r.
        let mut out = Vec::new();
        for z in quadratic(1.0, p, r) {
            if z > 0.0 {
                let s = z.sqrt();
                out.push(-s);
                out.push(s);
            } else if z > -1e-12 * scale {
                out.push(0.0);
            }
        }
        out
    } else {
        // Resolvent cubic m^3 + p m^2 + (p^2/4 - r) m - q^2/8 = 0 has a positive root.
        let m = cubic_monic(p, p * p / 4.0 - r, -q * q / 8.0)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if !(m > 0.0) {
            return Vec::new();
        }
        let s = (2.0 * m).sqrt();
        let k = q / (2.0 * s);
        let mut out = quadratic(1.0, -s, p / 2.0 + m + k);
        out.extend(quadratic(1.0, s, p / 2.0 + m - k));
        out
    };
    ys.into_iter().map(|y| y - shift).collect()
}

/// Cauchy bound on the magnitude of every root.
fn cauchy_bound(p: &Polynomial) -> f64 {
    let lead = p.leading().abs();
    let c = p.coeffs();
    1.0 + c[..c.len() - 1]
        .iter()
        .fold(0.0f64, |m, a| m.max(a.abs() / lead))
}

/// Root seeds by critical-point isolation; works for any degree.
pub(crate) fn isolate(p: &Polynomial) -> Vec<f64> {
    let deg = p.degree().unwrap_or(0);
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        return vec![-p.coeff(0) / p.coeff(1)];
    }
    let bound = cauchy_bound(p);
    let crit = real_roots(&p.derivative());
    let mut pts = Vec::with_capacity(crit.len() + 2);
    pts.push(-bound);
    pts.extend(crit.iter().copied().filter(|c| c.abs() < bound));
    pts.push(bound);

    let mut out = Vec::new();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (p.eval(lo), p.eval(hi));
        if flo == 0.0 {
            out.push(lo);
        }
        if flo.signum() * fhi.signum() < 0.0 {
            out.push(bisect(p, lo, hi, flo));
        }
    }
    if p.eval(bound) == 0.0 {
        out.push(bound);
    }
    // Touching roots sit at critical points.
    for &c in &crit {
        if p.eval(c).abs() <= RESIDUAL_TOL * p.eval_scale(c) {
            out.push(c);
        }
    }
    out
}

fn bisect(p: &Polynomial, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = p.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Domain {
        Domain::real_line()
    }

    /// Brute-force sign scan; independent of the closed forms.
    fn sign_scan(p: &Polynomial, lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step).round() as usize;
        let mut out = Vec::new();
        let mut prev = p.eval(lo);
        for i in 1..=n {
            let x = lo + i as f64 * step;
            let v = p.eval(x);
            if v == 0.0 {
                out.push(x);
            } else if prev != 0.0 && prev.signum() != v.signum() {
                out.push(x - step / 2.0);
            }
            prev = v;
        }
        out
    }

    #[test]
    fn quadratic_in_domain() {
        let p = Polynomial::new(vec![-1.0, 0.0, 1.0]);
        assert_eq!(p.roots_real(Domain::new(0.0, 2.0).unwrap()), vec![1.0]);
    }

    #[test]
    fn biquadratic_quartic() {
        let p = Polynomial::new(vec![4.0, 0.0, -5.0, 0.0, 1.0]);
        let r = p.roots_real(all());
        assert_eq!(r.len(), 4);
        for (a, b) in r.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn cubic_against_sign_scan() {
        let p = Polynomial::new(vec![-6.0, 11.0, -6.0, 1.0]);
        let dom = Domain::new(1.5, 10.0).unwrap();
        let scan = sign_scan(&p, 1.5, 10.0, 1e-4);
        let roots = p.roots_real(dom);
        assert_eq!(roots.len(), scan.len());
        for (r, s) in roots.iter().zip(&scan) {
            assert!((r - s).abs() < 1e-4);
        }
        assert!((roots[0] - 2.0).abs() < 1e-12 && (roots[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn double_roots_survive() {
        let p = Polynomial::from_roots(1.0, &[1.0, 1.0, 3.0]);
        let r = p.roots_real(all());
        assert_eq!(r.len(), 2, "{r:?}");
        assert!((r[0] - 1.0).abs() < 1e-7 && (r[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_real_root_cubic() {
        let p = Polynomial::new(vec![-8.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.roots_real(all()).len(), 1);
        assert!((p.roots_real(all())[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn quintic_by_isolation() {
        let want = [-3.5, -1.0, 0.25, 2.0, 7.0];
        let p = Polynomial::from_roots(0.2, &want);
        let got = p.roots_real(all());
        assert_eq!(got.len(), 5);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{got:?}");
        }
        // x^5 + 1 has the single real root -1.
        let p = Polynomial::new(vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.roots_real(all()), vec![-1.0]);
    }

    #[test]
    fn no_real_roots() {
        let p = Polynomial::new(vec![1.0, 0.0, 1.0]);
        assert!(p.roots_real(all()).is_empty());
        let p = Polynomial::new(vec![5.0, 0.0, 1.0, 0.0, 1.0]);
        assert!(p.roots_real(all()).is_empty());
    }
}
