//! Data series behind the published figures.

use anyhow::{bail, Result};
use log::info;
use semibound::cg::{moment_envelope, run_cg, BoundResult, CgError};
use semibound::mixtures::{component_cdf, component_pdf, smoothed_uniform_pdf};
use semibound::model::{standard_policy_problem, MixtureFamily, ProblemSpec, Sense};
use semibound::oracles::{black_scholes_call, lo_upper_bound};
use semibound::shape::{bisect_alpha, MixtureDistribution};

use crate::table::{Cell, Table};

pub const FIGURE_IDS: [&str; 9] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    pub epsilon: Option<f64>,
    /// Grid size for density series.
    pub points: usize,
    pub alpha_lo: f64,
    /// Defaults to `0.999` times the largest feasible standard deviation.
    pub alpha_hi: Option<f64>,
    pub bisect_tol: f64,
    pub etas: Option<Vec<f64>>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            epsilon: None,
            points: 401,
            alpha_lo: 1.0,
            alpha_hi: None,
            bisect_tol: 1e-3,
            etas: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub tables: Vec<Table>,
    pub converged: bool,
}

struct Tracker<'a> {
    opts: &'a FigureOptions,
    converged: bool,
}

impl Tracker<'_> {
    fn spec(&self, spec: ProblemSpec) -> ProblemSpec {
        match self.opts.epsilon {
            Some(e) => spec.with_epsilon(e),
            None => spec,
        }
    }

    fn solve(&mut self, spec: &ProblemSpec) -> Result<BoundResult, CgError> {
        let r = run_cg(&self.spec(spec.clone()))?;
        self.converged &= r.converged;
        Ok(r)
    }

    fn provenance(&self, id: &str, grid: &str) -> String {
        let eps = match self.opts.epsilon {
            Some(e) => crate::table::format_g(e, 12),
            None => "default".into(),
        };
        format!(
            "semibound {} {id} epsilon={eps} grid={grid} converged={}",
            env!("CARGO_PKG_VERSION"),
            self.converged
        )
    }
}

pub fn figure(id: &str, opts: &FigureOptions) -> Result<FigureOutput> {
    let mut t = Tracker { opts, converged: true };
    let mut tables = match id {
        "fig1" | "fig2" => ler_sweep(&mut t, id)?,
        "fig3" => alpha_sweep(&mut t)?,
        "fig4" | "fig5" => uniform_mixture_densities(&mut t, id == "fig4")?,
        "fig6" | "fig7" => lognormal_mixture_densities(&mut t, id == "fig6")?,
        "fig8" => eta_sweep(&mut t)?,
        "fig9" => smoothed_densities(&mut t)?,
        other => bail!("unknown figure {other:?}; expected one of {}", FIGURE_IDS.join(", ")),
    };
    for (table, grid) in &mut tables {
        table.provenance = Some(t.provenance(id, grid));
    }
    Ok(FigureOutput {
        tables: tables.into_iter().map(|(table, _)| table).collect(),
        converged: t.converged,
    })
}

const LER_MU: f64 = 50.0;
const LER_VAR: f64 = 225.0;
const LER_MAX: f64 = 100.0;
const LER_MODES: [f64; 2] = [45.0, 50.0];

fn ler_sweep(t: &mut Tracker, id: &str) -> Result<Vec<(Table, String)>> {
    let mut bounds = Table::new(
        "fig1",
        &[
            "d",
            "dirac_ler_lo",
            "dirac_ler_hi",
            "m45_ler_lo",
            "m45_ler_hi",
            "m50_ler_lo",
            "m50_ler_hi",
            "dirac_gap",
            "m45_gap",
            "m50_gap",
        ],
    );
    let mut gaps = Table::new("fig2", &["d", "dirac_gap", "m45_gap", "m50_gap"]);
    let families = [
        MixtureFamily::Dirac,
        MixtureFamily::KhintchineUniform { mode: LER_MODES[0] },
        MixtureFamily::KhintchineUniform { mode: LER_MODES[1] },
    ];
    for d in 0..=100 {
        let d = d as f64;
        let base = standard_policy_problem(LER_MU, LER_VAR, d, LER_MAX, None)?;
        let mut ler = Vec::new();
        for fam in families {
            let spec = base.clone().with_family(fam);
            let up = t.solve(&spec.clone().with_sense(Sense::Upper))?.bound;
            let down = t.solve(&spec.with_sense(Sense::Lower))?.bound;
            ler.push(((LER_MU - up) / LER_MU, (LER_MU - down) / LER_MU));
        }
        info!("d = {d}: {ler:?}");
        let gap: Vec<f64> = ler.iter().map(|(lo, hi)| hi - lo).collect();
        let mut row = vec![Cell::Num(d)];
        for (lo, hi) in &ler {
            row.push((*lo).into());
            row.push((*hi).into());
        }
        row.extend(gap.iter().map(|&g| Cell::Num(g)));
        bounds.push(row);
        let mut row = vec![Cell::Num(d)];
        row.extend(gap.iter().map(|&g| Cell::Num(g)));
        gaps.push(row);
    }
    let table = if id == "fig1" { bounds } else { gaps };
    Ok(vec![(table, "d=0..100 step 1".into())])
}

/// Call on a lognormal asset: the option-pricing setup.
struct OptionSetup {
    x0: f64,
    rate: f64,
    vol: f64,
    maturity: f64,
    mu: f64,
    sigma: f64,
    spec: ProblemSpec,
}

impl OptionSetup {
    fn new() -> Result<Self> {
        let (x0, rate, vol, maturity) = (49.5f64, 0.01f64, 0.2f64, 1.0f64);
        let mu = x0 * (rate * maturity).exp();
        let sigma = mu * ((vol * vol * maturity).exp() - 1.0).sqrt();
        let spec = standard_policy_problem(mu, sigma * sigma, x0, f64::INFINITY, None)?;
        Ok(OptionSetup {
            x0,
            rate,
            vol,
            maturity,
            mu,
            sigma,
            spec,
        })
    }

    fn price(&self) -> f64 {
        black_scholes_call(self.x0, self.x0, self.rate, self.vol, self.maturity)
    }

    /// Percent of a forward bound above the discounted price.
    fn pct_above(&self, bound: f64) -> f64 {
        let bs = self.price();
        100.0 * (bound * (-self.rate * self.maturity).exp() - bs) / bs
    }

    fn lognormal(&self, alpha: f64) -> ProblemSpec {
        self.spec.clone().with_family(MixtureFamily::Lognormal { alpha })
    }

    fn uniform(&self) -> ProblemSpec {
        self.spec.clone().with_family(MixtureFamily::KhintchineUniform { mode: self.mu })
    }

    /// The law with exactly the pinned mean and variance.
    fn reference_family(&self) -> MixtureFamily {
        MixtureFamily::Lognormal { alpha: self.sigma }
    }
}

struct Thresholds {
    alpha_star: f64,
    star_bound: f64,
    alpha_cross: f64,
    cross_bound: f64,
    uniform_bound: f64,
}

/// Smallest unimodal width, and the width where the lognormal bound meets
/// the uniform-mixture bound.
fn thresholds(t: &mut Tracker, s: &OptionSetup) -> Result<Thresholds> {
    let limit = moment_envelope(&s.spec)?.var_hi.sqrt();
    let hi = t.opts.alpha_hi.unwrap_or(0.999 * limit);
    let bis = bisect_alpha(&t.spec(s.spec.clone()), t.opts.alpha_lo, hi, t.opts.bisect_tol)?;
    t.converged &= bis.result.converged;
    let uniform_bound = t.solve(&s.uniform())?.bound;
    let (mut a, mut b) = (t.opts.alpha_lo, bis.alpha_star);
    let mut cross_bound = bis.bound;
    if t.solve(&s.lognormal(a))?.bound < uniform_bound || bis.bound > uniform_bound {
        // No crossing inside the bracket.
        return Ok(Thresholds {
            alpha_star: bis.alpha_star,
            star_bound: bis.bound,
            alpha_cross: f64::NAN,
            cross_bound: f64::NAN,
            uniform_bound,
        });
    }
    while b - a > t.opts.bisect_tol {
        let m = 0.5 * (a + b);
        let v = t.solve(&s.lognormal(m))?.bound;
        if v > uniform_bound {
            a = m;
        } else {
            b = m;
            cross_bound = v;
        }
    }
    Ok(Thresholds {
        alpha_star: bis.alpha_star,
        star_bound: bis.bound,
        alpha_cross: b,
        cross_bound,
        uniform_bound,
    })
}

fn alpha_sweep(t: &mut Tracker) -> Result<Vec<(Table, String)>> {
    let s = OptionSetup::new()?;
    let lo_pct = s.pct_above(lo_upper_bound(s.mu, s.sigma, s.x0));
    let th = thresholds(t, &s)?;
    let uniform_pct = s.pct_above(th.uniform_bound);
    let mut table = Table::new(
        "fig3",
        &["alpha", "status", "bound", "pct_above_bs", "unimodal", "lo_pct_above_bs", "uniform_pct_above_bs"],
    );
    for i in 0..=38 {
        let alpha = 1.0 + 0.5 * i as f64;
        let (status, bound, unimodal) = match t.solve(&s.lognormal(alpha)) {
            Ok(r) => {
                let uni = semibound::shape::is_unimodal(&MixtureDistribution::from_result(&r)?)?;
                let status = if r.converged { "converged" } else { "not-converged" };
                (status, r.bound, if uni { "true" } else { "false" })
            }
            Err(CgError::Infeasible { .. }) => ("infeasible", f64::NAN, ""),
            Err(e) => return Err(e.into()),
        };
        info!("alpha = {alpha}: {status} {bound}");
        let pct = if bound.is_nan() { f64::NAN } else { s.pct_above(bound) };
        table.push(vec![
            alpha.into(),
            status.into(),
            bound.into(),
            pct.into(),
            unimodal.into(),
            lo_pct.into(),
            uniform_pct.into(),
        ]);
    }
    let mut points = Table::new("fig3_points", &["point", "alpha", "bound", "pct_above_bs"]);
    points.push(vec![
        "unimodal_threshold".into(),
        th.alpha_star.into(),
        th.star_bound.into(),
        s.pct_above(th.star_bound).into(),
    ]);
    points.push(vec![
        "uniform_crossing".into(),
        th.alpha_cross.into(),
        th.cross_bound.into(),
        s.pct_above(th.cross_bound).into(),
    ]);
    Ok(vec![
        (table, "alpha=1..20 step 0.5".into()),
        (points, format!("bisection tol={}", t.opts.bisect_tol)),
    ])
}

fn density_grid(s: &OptionSetup, n: usize) -> Vec<f64> {
    let hi = s.mu + 6.0 * s.sigma;
    (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
}

fn uniform_mixture_densities(t: &mut Tracker, pdf: bool) -> Result<Vec<(Table, String)>> {
    let s = OptionSetup::new()?;
    let r = t.solve(&s.uniform())?;
    let dist = MixtureDistribution::from_result(&r)?;
    let reference = s.reference_family();
    let (name, cols) = if pdf {
        ("fig4", ["u", "mixture_pdf", "lognormal_pdf"])
    } else {
        ("fig5", ["u", "mixture_cdf", "lognormal_cdf"])
    };
    let mut table = Table::new(name, &cols);
    for u in density_grid(&s, t.opts.points.max(2)) {
        let (m, l) = if pdf {
            (dist.pdf(u)?, component_pdf(reference, s.mu, u)?)
        } else {
            (dist.cdf(u)?, component_cdf(reference, s.mu, u)?)
        };
        table.push(vec![u.into(), m.into(), l.into()]);
    }
    Ok(vec![(table, format!("u points={}", t.opts.points.max(2)))])
}

fn lognormal_mixture_densities(t: &mut Tracker, pdf: bool) -> Result<Vec<(Table, String)>> {
    let s = OptionSetup::new()?;
    let th = thresholds(t, &s)?;
    let mut dists = Vec::new();
    for alpha in [th.alpha_cross, th.alpha_star] {
        if alpha.is_nan() {
            dists.push(None);
            continue;
        }
        let r = t.solve(&s.lognormal(alpha))?;
        dists.push(Some(MixtureDistribution::from_result(&r)?));
    }
    let reference = s.reference_family();
    let (name, cols) = if pdf {
        ("fig6", ["u", "crossing_pdf", "threshold_pdf", "lognormal_pdf"])
    } else {
        ("fig7", ["u", "crossing_cdf", "threshold_cdf", "lognormal_cdf"])
    };
    let mut table = Table::new(name, &cols);
    for u in density_grid(&s, t.opts.points.max(2)) {
        let mut row = vec![Cell::Num(u)];
        for d in &dists {
            let v = match d {
                Some(d) if pdf => d.pdf(u)?,
                Some(d) => d.cdf(u)?,
                None => f64::NAN,
            };
            row.push(v.into());
        }
        let l = if pdf {
            component_pdf(reference, s.mu, u)?
        } else {
            component_cdf(reference, s.mu, u)?
        };
        row.push(l.into());
        table.push(row);
    }
    let grid = format!(
        "u points={} crossing alpha={} threshold alpha={}",
        t.opts.points.max(2),
        crate::table::format_g(th.alpha_cross, 12),
        crate::table::format_g(th.alpha_star, 12)
    );
    Ok(vec![(table, grid)])
}

const FIG8_ETAS: [f64; 7] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
const FIG9_ETAS: [f64; 4] = [1.0, 5.0, 10.0, 50.0];

fn eta_sweep(t: &mut Tracker) -> Result<Vec<(Table, String)>> {
    let s = OptionSetup::new()?;
    let uniform = t.solve(&s.uniform())?.bound;
    let etas = t.opts.etas.clone().unwrap_or(FIG8_ETAS.to_vec());
    let mut table = Table::new("fig8", &["eta", "smoothed_bound", "uniform_bound", "pct_difference"]);
    for &eta in &etas {
        let spec = s.spec.clone().with_family(MixtureFamily::SmoothedUniform { mode: s.mu, eta });
        let b = t.solve(&spec)?.bound;
        info!("eta = {eta}: {b}");
        table.push(vec![eta.into(), b.into(), uniform.into(), (100.0 * (b - uniform) / uniform).into()]);
    }
    Ok(vec![(table, format!("eta={etas:?}"))])
}

fn smoothed_densities(t: &mut Tracker) -> Result<Vec<(Table, String)>> {
    let (a, b) = (20.0, 30.0);
    let etas = t.opts.etas.clone().unwrap_or(FIG9_ETAS.to_vec());
    let mut header = vec!["u".to_string()];
    header.extend(etas.iter().map(|e| format!("f_eta{}", crate::table::format_g(*e, 12))));
    header.push("uniform".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new("fig9", &header);
    let n = t.opts.points.max(2);
    for i in 0..n {
        let u = 15.0 + 20.0 * i as f64 / (n - 1) as f64;
        let mut row = vec![Cell::Num(u)];
        row.extend(etas.iter().map(|&eta| Cell::Num(smoothed_uniform_pdf(a, b, eta, u))));
        row.push(if (a..=b).contains(&u) { 0.1 } else { 0.0 }.into());
        table.push(row);
    }
    Ok(vec![(table, format!("u=15..35 points={n} eta={etas:?}"))])
}
