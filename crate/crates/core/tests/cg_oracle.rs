use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use semibound::cg::{run_cg, solve_master, BoundResult};
use semibound::model::{standard_policy_problem, MixtureFamily, ProblemSpec, Sense};
use semibound::oracles::{grid_lp_bound, lo_upper_bound, GridOracleConfig};

fn check_run(spec: &ProblemSpec, r: &BoundResult) {
    assert!(r.converged, "not converged: {r:?}");
    assert!(r.gap <= spec.cg_epsilon);
    let scale = r.bound.abs().max(1.0);
    assert!(r.certificate_violation() <= 1e-7 * scale, "certificate {}", r.certificate_violation());
    let s = if spec.sense == Sense::Upper { 1.0 } else { -1.0 };
    for w in r.trace.windows(2) {
        assert!(s * w[1].master_objective >= s * w[0].master_objective - 1e-9 * scale);
    }
    assert!(r.atoms.len() <= 2 * spec.constraints.len() + 2);
    assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(r.weights.iter().all(|&w| w >= 0.0));
}

#[test]
fn lo_bound_matches_dense_grid() {
    // Design of 20 (mu, sigma, d) points spanning both regimes.
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let mu: f64 = rng.gen_range(10.0..100.0);
        let sigma: f64 = rng.gen_range(0.05..1.0) * mu;
        let d: f64 = rng.gen_range(0.0..2.0) * mu;
        let lo = lo_upper_bound(mu, sigma, d);
        let spec = standard_policy_problem(mu, sigma * sigma, d, f64::INFINITY, None).unwrap();
        let cfg = GridOracleConfig::new(20_001, 0.0, mu + 40.0 * sigma).unwrap();
        let grid = grid_lp_bound(&spec, &cfg).unwrap();
        assert!(grid <= lo * (1.0 + 1e-9) + 1e-12, "grid {grid} above closed form {lo}");
        assert!(lo - grid <= 2e-3 * lo.max(1e-3 * mu), "mu {mu} sigma {sigma} d {d}: {lo} vs {grid}");
    }
}

#[test]
fn cg_reproduces_lo_bound() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(12);
    for _ in 0..20 {
        let mu: f64 = rng.gen_range(10.0..100.0);
        let sigma: f64 = rng.gen_range(0.05..1.0) * mu;
        let d: f64 = rng.gen_range(0.0..2.0) * mu;
        let spec = standard_policy_problem(mu, sigma * sigma, d, f64::INFINITY, None).unwrap();
        let r = run_cg(&spec).unwrap();
        check_run(&spec, &r);
        let lo = lo_upper_bound(mu, sigma, d);
        assert!((r.bound - lo).abs() <= 1e-6 * lo.max(1e-3 * mu), "mu {mu} sigma {sigma} d {d}: {} vs {lo}", r.bound);
    }
}

#[test]
fn lo_example_at_the_money() {
    let spec = standard_policy_problem(50.0, 10.1 * 10.1, 50.0, f64::INFINITY, None).unwrap();
    let r = run_cg(&spec).unwrap();
    check_run(&spec, &r);
    assert!((r.bound - 5.05).abs() < 1e-6 * 5.05);
}

#[test]
fn atoms_price_out_at_optimum() {
    // Assemble r(x) = f(x) - tau - sum lambda_j g_j(x) by hand from the
    // master duals; every atom in the final set must have r(x) <= 0.
    let spec = standard_policy_problem(50.0, 225.0, 40.0, 100.0, None).unwrap();
    let r = run_cg(&spec).unwrap();
    let m = solve_master(&r.atoms, &spec).unwrap();
    for &x in &r.atoms {
        let red = (x - 40.0f64).max(0.0) - m.tau - m.duals[0] * x - m.duals[1] * x * x;
        assert!(red <= 1e-7, "reduced cost {red} at {x}");
    }
    // Net duals follow the max-sense convention.
    for j in 0..2 {
        assert!(m.rho_hi[j] >= -1e-12 && m.rho_lo[j] <= 1e-12);
    }
}

#[test]
fn sense_symmetry_is_exact() {
    let spec = standard_policy_problem(50.0, 225.0, 35.0, 100.0, None).unwrap();
    let lower = run_cg(&spec.clone().with_sense(Sense::Lower)).unwrap();
    let neg = spec.clone().with_target(spec.target.scale(-1.0)).unwrap();
    let upper_neg = run_cg(&neg).unwrap();
    assert_eq!(lower.bound, -upper_neg.bound);
}

#[test]
fn unimodal_bound_is_tighter() {
    let spec = standard_policy_problem(50.0, 225.0, 50.0, 100.0, None).unwrap();
    let dirac = run_cg(&spec).unwrap();
    let uni_spec = spec.clone().with_family(MixtureFamily::KhintchineUniform { mode: 50.0 });
    let uni = run_cg(&uni_spec).unwrap();
    check_run(&uni_spec, &uni);
    assert!(uni.bound < dirac.bound - 1e-3);
    let grid = grid_lp_bound(&uni_spec, &GridOracleConfig::new(20_001, 0.0, 100.0).unwrap()).unwrap();
    assert!((uni.bound - grid).abs() <= 1e-4 * uni.bound, "{} vs {grid}", uni.bound);
}

#[test]
fn random_bounded_instances_match_grid() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for _ in 0..6 {
        let b: f64 = if rng.gen_bool(0.5) { 100.0 } else { 200.0 };
        let mu: f64 = rng.gen_range(0.2..0.8) * b;
        let sd = rng.gen_range(0.05..0.9) * (mu * (b - mu)).sqrt();
        let d = rng.gen_range(0..(b as i64)) as f64;
        let spec = standard_policy_problem(mu, sd * sd, d, b, None).unwrap();
        for sense in [Sense::Upper, Sense::Lower] {
            let s = spec.clone().with_sense(sense);
            let r = run_cg(&s).unwrap();
            check_run(&s, &r);
            let grid = grid_lp_bound(&s, &GridOracleConfig::new(20_001, 0.0, b).unwrap()).unwrap();
            assert!((r.bound - grid).abs() <= 1e-4 * r.bound.abs().max(1e-6), "{sense:?} {mu} {sd} {d} {b}: {} vs {grid}", r.bound);
        }
    }
}

#[test]
fn nested_grids_are_monotone() {
    let spec = standard_policy_problem(50.0, 225.0, 60.0, 100.0, None).unwrap();
    let mut last = f64::NEG_INFINITY;
    for k in [6, 8, 10, 12, 14] {
        let v = grid_lp_bound(&spec, &GridOracleConfig::new((1 << k) + 1, 0.0, 100.0).unwrap()).unwrap();
        assert!(v >= last - 1e-12);
        last = v;
    }
}

#[test]
fn lognormal_and_smoothed_families_match_grid() {
    let base = standard_policy_problem(50.0, 225.0, 50.0, 100.0, None).unwrap();
    for fam in [
        MixtureFamily::Lognormal { alpha: 8.0 },
        MixtureFamily::SmoothedUniform { mode: 50.0, eta: 1.0 },
    ] {
        let spec = base.clone().with_family(fam);
        let r = run_cg(&spec).unwrap();
        check_run(&spec, &r);
        let (lo, hi) = if let MixtureFamily::Lognormal { .. } = fam { (1e-4, 100.0) } else { (0.0, 100.0) };
        let grid = grid_lp_bound(&spec, &GridOracleConfig::new(4001, lo, hi).unwrap()).unwrap();
        assert!(grid <= r.bound + 1e-7 * r.bound);
        assert!(r.bound - grid <= 1e-3 * r.bound, "{fam:?}: {} vs {grid}", r.bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cg_invariants_hold(mu in 20.0f64..80.0, frac in 0.1f64..0.9, d in 0.0f64..100.0, upper in any::<bool>()) {
        let b: f64 = 100.0;
        let sd = frac * (mu * (b - mu)).sqrt();
        let sense = if upper { Sense::Upper } else { Sense::Lower };
        let spec = standard_policy_problem(mu, sd * sd, d, b, None).unwrap().with_sense(sense);
        let r = run_cg(&spec).unwrap();
        check_run(&spec, &r);
    }
}
