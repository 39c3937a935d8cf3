use proptest::prelude::*;
use semibound::mixtures::{component_pdf, component_quantile, smoothed_uniform_pdf, transform};
use semibound::model::MixtureFamily;
use semibound::numeric::integrate_pieces;
use semibound::polyalg::{Domain, PiecewiseFunction, Polynomial};

fn families() -> impl Strategy<Value = MixtureFamily> {
    prop_oneof![
        Just(MixtureFamily::UniformZero),
        (10.0f64..90.0).prop_map(|mode| MixtureFamily::KhintchineUniform { mode }),
        (1.0f64..30.0).prop_map(|alpha| MixtureFamily::Lognormal { alpha }),
        (10.0f64..90.0, 0.2f64..50.0).prop_map(|(mode, eta)| MixtureFamily::SmoothedUniform { mode, eta }),
    ]
}

/// Piecewise quadratic on `[0, inf)` with breaks at 30 and 60.
fn bases() -> impl Strategy<Value = PiecewiseFunction> {
    prop::collection::vec(-1.0f64..1.0, 9).prop_map(|c| {
        PiecewiseFunction::from_polynomials(
            vec![0.0, 30.0, 60.0, f64::INFINITY],
            vec![
                Polynomial::new(vec![c[0] * 10.0, c[1], c[2] * 0.01]),
                Polynomial::new(vec![c[3] * 10.0, c[4], c[5] * 0.01]),
                Polynomial::new(vec![c[6] * 10.0, c[7], c[8] * 0.01]),
            ],
        )
        .unwrap()
    })
}

fn pdf_mass(fam: MixtureFamily, x: f64) -> f64 {
    let q = |p: f64| component_quantile(fam, x, p).unwrap();
    let mut pts = match fam {
        MixtureFamily::Lognormal { .. } => vec![0.0, q(1e-6), q(0.5), q(1.0 - 1e-6), q(1.0 - 1e-15) * 2.0],
        MixtureFamily::SmoothedUniform { mode, eta } => {
            let (a, b) = (x.min(mode), x.max(mode));
            vec![a - 60.0 / eta, a, b, b + 60.0 / eta]
        }
        MixtureFamily::KhintchineUniform { mode } => vec![x.min(mode), x.max(mode)],
        MixtureFamily::UniformZero => vec![0.0, x],
        MixtureFamily::Dirac => unreachable!(),
    };
    pts.dedup();
    integrate_pieces(|u| component_pdf(fam, x, u).unwrap(), &pts, 1e-12, 1e-15).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn component_densities_integrate_to_one(fam in families(), x in 1.0f64..100.0) {
        if let MixtureFamily::KhintchineUniform { mode } | MixtureFamily::SmoothedUniform { mode, .. } = fam {
            prop_assume!((x - mode).abs() > 1e-6);
        }
        let mass = pdf_mass(fam, x);
        prop_assert!((mass - 1.0).abs() < 1e-9, "{fam:?} at {x}: {mass}");
    }

    #[test]
    fn closed_forms_agree_with_quadrature(fam in families(), base in bases(), x in 0.5f64..100.0) {
        let t = transform(&base, fam);
        let closed = t.eval(x).unwrap();
        let numeric = t.eval_numeric(x).unwrap();
        prop_assert!((closed - numeric).abs() <= 1e-7 * numeric.abs().max(1.0), "{fam:?} at {x}: {closed} vs {numeric}");
    }

    #[test]
    fn transform_is_linear(fam in families(), f in bases(), g in bases(), a in -2.0f64..2.0, b in -2.0f64..2.0, x in 0.5f64..100.0) {
        let h = PiecewiseFunction::linear_combination(&[(a, &f), (b, &g)]).unwrap();
        let lhs = transform(&h, fam).eval(x).unwrap();
        let rhs = a * transform(&f, fam).eval(x).unwrap() + b * transform(&g, fam).eval(x).unwrap();
        let scale = (a.abs() * transform(&f, fam).eval(x).unwrap().abs()).max(b.abs() * transform(&g, fam).eval(x).unwrap().abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn khintchine_continuous_at_mode(c in prop::collection::vec(-3.0f64..3.0, 1..6), mode in -5.0f64..5.0) {
        let base = PiecewiseFunction::polynomial(Domain::new(-10.0, 10.0).unwrap(), Polynomial::new(c));
        let t = transform(&base, MixtureFamily::KhintchineUniform { mode });
        let at = base.eval(mode).unwrap();
        let p = &base.pieces()[0].numerator;
        let scale = p.eval_scale(mode).max(1.0);
        // Lipschitz constant of the base near the mode bounds the transform's.
        let lip = p.derivative().eval_scale(mode.abs() + 1.0);
        prop_assert!((t.eval(mode).unwrap() - at).abs() <= 1e-9 * scale);
        for h in [1e-3, 1e-6, 1e-9] {
            prop_assert!((t.eval(mode + h).unwrap() - at).abs() <= lip * h + 1e-9 * scale);
            prop_assert!((t.eval(mode - h).unwrap() - at).abs() <= lip * h + 1e-9 * scale);
        }
    }
}

#[test]
fn smoothed_density_converges_to_uniform() {
    let (a, b) = (20.0, 30.0);
    let mut errs = Vec::new();
    for eta in [10.0, 1e2, 1e3, 1e4] {
        let gap = 1.0 / f64::sqrt(eta);
        let n = 20_000;
        let err = (0..=n)
            .map(|i| a - 1.0 + (b - a + 2.0) * i as f64 / n as f64)
            .filter(|u| (u - a).abs() > gap && (u - b).abs() > gap)
            .map(|u| {
                let exact = if (a..=b).contains(&u) { 0.1 } else { 0.0 };
                (smoothed_uniform_pdf(a, b, eta, u) - exact).abs()
            })
            .fold(0.0f64, f64::max);
        errs.push(err);
    }
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[3] < 1e-40);
}
