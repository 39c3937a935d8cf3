use std::collections::BTreeMap;

use anyhow::{bail, Result};
use semibound::cg::{run_cg, BoundResult};
use semibound::model::ProblemSpec;
use semibound::shape::{export_distribution, ExportTable, MixtureDistribution};
use serde::Serialize;

use crate::table::Table;

/// Overrides shared by `bound` and `export`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub epsilon: Option<f64>,
    pub cap: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut spec: ProblemSpec) -> Result<ProblemSpec> {
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                bail!("--epsilon must be positive and finite, got {e}");
            }
            spec = spec.with_epsilon(e);
        }
        if let Some(c) = self.cap {
            if !(c > spec.support.lower()) {
                bail!("--cap must exceed the support's lower end {}, got {c}", spec.support.lower());
            }
            spec = spec.with_search_cap(c);
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound: f64,
    pub gap: f64,
    pub converged: bool,
    pub stalled: bool,
    pub unbounded_growth: bool,
    pub iterations: usize,
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
    pub family: &'static str,
    pub sense: &'static str,
    pub cg_epsilon: f64,
    pub search_cap: f64,
    /// Iterations per subproblem path.
    pub subproblem_paths: BTreeMap<&'static str, usize>,
}

impl From<&BoundResult> for BoundReport {
    fn from(r: &BoundResult) -> Self {
        let mut paths = BTreeMap::new();
        for rec in &r.trace {
            *paths.entry(rec.path.name()).or_insert(0) += 1;
        }
        BoundReport {
            bound: r.bound,
            gap: r.gap,
            converged: r.converged,
            stalled: r.stalled,
            unbounded_growth: r.unbounded_growth,
            iterations: r.iterations,
            atoms: r.atoms.clone(),
            weights: r.weights.clone(),
            family: r.family.name(),
            sense: r.sense.name(),
            cg_epsilon: r.cg_epsilon,
            search_cap: r.search_cap,
            subproblem_paths: paths,
        }
    }
}

pub fn bound(spec: &ProblemSpec) -> Result<BoundReport> {
    Ok(BoundReport::from(&run_cg(spec)?))
}

/// Table of the extremal distribution, and whether its solve converged.
pub fn export(spec: &ProblemSpec, points: usize) -> Result<(Table, bool)> {
    if points < 2 {
        bail!("--points must be at least 2, got {points}");
    }
    let r = run_cg(spec)?;
    let dist = MixtureDistribution::from_result(&r)?;
    let table = match export_distribution(&dist, points)? {
        ExportTable::Density(rows) => {
            let mut t = Table::new("export", &["u", "pdf", "cdf"]);
            for (u, p, c) in rows {
                t.push(vec![u.into(), p.into(), c.into()]);
            }
            t
        }
        ExportTable::Atoms(rows) => {
            let mut t = Table::new("export", &["atom", "weight"]);
            for (x, w) in rows {
                t.push(vec![x.into(), w.into()]);
            }
            t
        }
    };
    Ok((table, r.converged))
}
