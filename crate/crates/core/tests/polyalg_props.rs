use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use semibound::polyalg::{Domain, PiecewiseFunction, Polynomial};

fn separated_roots(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n).prop_filter("roots too close", |r| {
        let mut s = r.clone();
        s.sort_by(|a, b| a.total_cmp(b));
        s.windows(2).all(|w| w[1] - w[0] > 0.05)
    })
}

proptest! {
    #[test]
    fn recovers_factored_roots(n in 1usize..=4, lead in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0], seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut roots: Vec<f64> = Vec::new();
        while roots.len() < n {
            let r: f64 = rng.gen_range(-10.0..10.0);
            if roots.iter().all(|q| (q - r).abs() > 0.05) {
                roots.push(r);
            }
        }
        roots.sort_by(|a, b| a.total_cmp(b));
        let p = Polynomial::from_roots(lead, &roots);
        let got = p.roots_real(Domain::real_line());
        prop_assert_eq!(got.len(), roots.len(), "{:?} vs {:?}", got, roots);
        for (g, w) in got.iter().zip(&roots) {
            prop_assert!((g - w).abs() < 1e-8, "{:?} vs {:?}", got, roots);
        }
    }

    #[test]
    fn recovers_quintic_roots(roots in separated_roots(5)) {
        let mut roots = roots;
        roots.sort_by(|a, b| a.total_cmp(b));
        let p = Polynomial::from_roots(1.0, &roots);
        let got = p.roots_real(Domain::real_line());
        prop_assert_eq!(got.len(), 5);
        for (g, w) in got.iter().zip(&roots) {
            prop_assert!((g - w).abs() < 1e-7);
        }
    }

    #[test]
    fn divide_then_multiply(q in prop::collection::vec(-5.0f64..5.0, 1..5), c in -5.0f64..5.0) {
        let q = Polynomial::new(q);
        let p = q.mul_linear(c);
        let back = p.divide_by_linear(c).unwrap().mul_linear(c);
        let scale = p.max_abs_coeff().max(1e-300);
        for k in 0..p.coeffs().len().max(back.coeffs().len()) {
            prop_assert!((p.coeff(k) - back.coeff(k)).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn antiderivative_inverts_derivative(c in prop::collection::vec(-5.0f64..5.0, 1..6)) {
        let p = Polynomial::new(c);
        let back = p.antiderivative().derivative();
        for k in 0..p.coeffs().len() {
            prop_assert!((p.coeff(k) - back.coeff(k)).abs() <= 1e-15 * p.coeff(k).abs().max(1.0));
        }
    }
}

#[test]
fn global_max_dominates_samples() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..20 {
        let breaks = {
            let mut b: Vec<f64> = (0..3).map(|_| rng.gen_range(-9.0..9.0)).collect();
            b.sort_by(|a, c| a.total_cmp(c));
            b.dedup();
            let mut all = vec![-10.0];
            all.extend(b);
            all.push(10.0);
            all
        };
        let polys = (0..breaks.len() - 1)
            .map(|_| Polynomial::new((0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()))
            .collect();
        let f = PiecewiseFunction::from_polynomials(breaks, polys).unwrap();
        let dom = Domain::new(-10.0, 10.0).unwrap();
        let m = f.global_max(dom);
        assert!(!m.unbounded);
        for _ in 0..10_000 {
            let x = rng.gen_range(-10.0..=10.0);
            let v = f.eval(x).unwrap();
            assert!(m.value >= v - 1e-12 * v.abs().max(1.0), "{} < {v} at {x}", m.value);
        }
    }
}
