use rand::{Rng, SeedableRng};
use semibound::lpcore::{solve_lp, LpProblem, LpStatus, RowKind};

/// Brute-force optimum over every basic solution of the slack form.
/// Returns `None` when no vertex is feasible.
fn vertex_optimum(lp: &LpProblem) -> Option<f64> {
    let n = lp.num_cols();
    let m = lp.num_rows();
    // Columns: structurals, then one slack per inequality row.
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|j| lp.rows().iter().map(|r| r.coeffs[j]).collect())
        .collect();
    let mut cost = lp.objective().to_vec();
    for (i, row) in lp.rows().iter().enumerate() {
        let s = match row.kind {
            RowKind::Le => 1.0,
            RowKind::Ge => -1.0,
            RowKind::Eq => continue,
        };
        let mut c = vec![0.0; m];
        c[i] = s;
        cols.push(c);
        cost.push(0.0);
    }
    let b: Vec<f64> = lp.rows().iter().map(|r| r.rhs).collect();
    let total = cols.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let chosen: Vec<usize> = (0..total).filter(|j| mask & (1 << j) != 0).collect();
        let Some(x) = gauss(&chosen.iter().map(|&j| cols[j].clone()).collect::<Vec<_>>(), &b) else {
            continue;
        };
        if x.iter().any(|&v| v < -1e-9) {
            continue;
        }
        let val: f64 = chosen.iter().zip(&x).map(|(&j, v)| cost[j] * v).sum();
        best = Some(best.map_or(val, |b: f64| b.max(val)));
    }
    best
}

/// Solves the square system whose columns are `cols`; `None` if singular.
fn gauss(cols: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row: Vec<f64> = cols.iter().map(|c| c[i]).collect();
            row.push(b[i]);
            row
        })
        .collect();
    for k in 0..m {
        let p = (k..m).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        for i in 0..m {
            if i != k {
                let f = a[i][k] / a[k][k];
                for c in k..=m {
                    a[i][c] -= f * a[k][c];
                }
            }
        }
    }
    Some((0..m).map(|i| a[i][m] / a[i][i]).collect())
}

fn random_lp(rng: &mut impl Rng) -> LpProblem {
    let n = rng.gen_range(1..=4);
    let extra = rng.gen_range(0..=3);
    let mut lp = LpProblem::new((0..n).map(|_| rng.gen_range(-5.0..5.0)).collect());
    lp.add_row(vec![1.0; n], RowKind::Le, 10.0).unwrap();
    for _ in 0..extra {
        let coeffs = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let kind = match rng.gen_range(0..3) {
            0 => RowKind::Le,
            1 => RowKind::Ge,
            _ => RowKind::Eq,
        };
        lp.add_row(coeffs, kind, rng.gen_range(-4.0..6.0)).unwrap();
    }
    lp
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let (mut feasible, mut infeasible) = (0, 0);
    for _ in 0..2000 {
        let lp = random_lp(&mut rng);
        let sol = solve_lp(&lp);
        match vertex_optimum(&lp) {
            None => {
                infeasible += 1;
                assert_eq!(sol.status, LpStatus::Infeasible, "{lp:?}");
            }
            Some(best) => {
                feasible += 1;
                assert_eq!(sol.status, LpStatus::Optimal, "{lp:?}");
                assert!((sol.objective - best).abs() < 1e-7 * (1.0 + best.abs()), "{} vs {best}", sol.objective);
                check_certificate(&lp, &sol.primal, &sol.duals, sol.objective);
            }
        }
    }
    assert!(feasible > 500 && infeasible > 50, "{feasible} / {infeasible}");
}

fn check_certificate(lp: &LpProblem, x: &[f64], y: &[f64], obj: f64) {
    let tol = 1e-7;
    for (row, &yi) in lp.rows().iter().zip(y) {
        let ax: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match row.kind {
            RowKind::Le => assert!(ax <= row.rhs + tol && yi >= -tol),
            RowKind::Ge => assert!(ax >= row.rhs - tol && yi <= tol),
            RowKind::Eq => assert!((ax - row.rhs).abs() <= tol),
        }
        // Complementary slackness on rows.
        assert!((yi * (ax - row.rhs)).abs() <= tol * (1.0 + yi.abs()));
    }
    let dual_obj: f64 = lp.rows().iter().zip(y).map(|(r, yi)| r.rhs * yi).sum();
    assert!((dual_obj - obj).abs() <= tol * (1.0 + obj.abs()), "{dual_obj} vs {obj}");
    for j in 0..lp.num_cols() {
        let red = lp.objective()[j] - lp.rows().iter().zip(y).map(|(r, yi)| r.coeffs[j] * yi).sum::<f64>();
        assert!(red <= tol * (1.0 + lp.objective()[j].abs()), "reduced cost {red}");
        assert!(x[j] >= 0.0);
        assert!((red * x[j]).abs() <= tol * (1.0 + x[j]));
    }
}
