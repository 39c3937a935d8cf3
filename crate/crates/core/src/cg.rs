//! Column generation for semiparametric bounds.
//!
//! The master problem is an LP over a finite set of atoms `J`: choose
//! weights `p_x >= 0` summing to one that maximize `sum p_x f(x)` while
//! keeping every `sum p_x g_j(x)` inside its interval. The pricing problem
//! maximizes the reduced cost
//!
//! ```text
//! r(x) = f(x) - tau - sum_j lambda_j g_j(x)
//! ```
//!
//! over the support, where `tau` is the dual of the probability row and
//! `lambda_j` the net dual of constraint `j`. If `S = max r` then
//! `M_J <= B <= M_J + S`, so the loop stops once `S <= epsilon`.
//!
//! Lower bounds maximize `-f` and negate on return. Mixture families are
//! handled by transforming every function once up front, so the loop itself
//! only ever sees point masses.

use log::{debug, warn};
use thiserror::Error;

use crate::lpcore::{solve_lp, LpProblem, LpSolution, LpStatus, RowKind};
use crate::mixtures::{transform, MixtureError, TransformedFunction};
use crate::model::{MixtureFamily, ModelError, MomentConstraint, ProblemSpec, Sense};
use crate::numeric::golden_max;
use crate::polyalg::{Denominator, Domain, PiecewiseFunction, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CgError {
    #[error("no distribution satisfies the moment constraints (residual violation {residual:e})")]
    Infeasible { residual: f64 },
    #[error("LP solver failed: {0}")]
    Lp(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mixture(#[from] MixtureError),
}

/// How the pricing problem was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubproblemPath {
    /// Global maximization of a piecewise rational function.
    ExactPolynomial,
    /// Grid scan plus golden-section refinement.
    NumericSearch,
}

impl SubproblemPath {
    pub fn name(&self) -> &'static str {
        match self {
            SubproblemPath::ExactPolynomial => "exact-polynomial",
            SubproblemPath::NumericSearch => "numeric-search",
        }
    }
}

/// Master-problem column for one atom.
#[derive(Debug, Clone, PartialEq)]
struct Column {
    x: f64,
    /// Objective in the maximization sense.
    obj: f64,
    g: Vec<f64>,
}

/// Atoms of the master problem, kept sorted and pairwise separated by the
/// dedup tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSet {
    cols: Vec<Column>,
    tol: f64,
}

impl AtomSet {
    fn new(tol: f64) -> Self {
        AtomSet { cols: Vec::new(), tol }
    }

    pub fn atoms(&self) -> Vec<f64> {
        self.cols.iter().map(|c| c.x).collect()
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Index of an atom within the tolerance of `x`.
    pub fn find_near(&self, x: f64) -> Option<usize> {
        let k = self.cols.partition_point(|c| c.x < x);
        [k.wrapping_sub(1), k]
            .into_iter()
            .filter(|&i| i < self.cols.len())
            .find(|&i| (self.cols[i].x - x).abs() <= self.tol)
    }

    fn insert(&mut self, col: Column) -> bool {
        if self.find_near(col.x).is_some() {
            return false;
        }
        let k = self.cols.partition_point(|c| c.x < col.x);
        self.cols.insert(k, col);
        true
    }

    fn retain_indices(&mut self, keep: &[bool]) {
        let mut i = 0;
        self.cols.retain(|_| {
            i += 1;
            keep[i - 1]
        });
    }
}

/// Optimal master solution.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterSolution {
    /// One weight per atom, in atom order.
    pub weights: Vec<f64>,
    /// Master objective in the sense of the problem.
    pub objective: f64,
    /// Net dual per constraint, in the maximization sense used internally
    /// (the target is negated for lower bounds).
    pub duals: Vec<f64>,
    /// Dual of the `>= lo` row of each constraint (zero when absent).
    pub rho_lo: Vec<f64>,
    /// Dual of the `<= hi` row of each constraint (zero when absent).
    pub rho_hi: Vec<f64>,
    /// Dual of the probability row.
    pub tau: f64,
    /// Whether each atom is basic.
    pub basic: Vec<bool>,
}

/// One column-generation iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// Master objective in the sense of the problem.
    pub master_objective: f64,
    /// Largest reduced cost found.
    pub reduced_cost: f64,
    pub atom: f64,
    pub path: SubproblemPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub bound: f64,
    /// Final largest reduced cost; the true bound lies within this much.
    pub gap: f64,
    pub sense: Sense,
    pub family: MixtureFamily,
    /// Atoms with positive weight, ascending.
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
    /// The pricing step kept returning existing atoms.
    pub stalled: bool,
    /// At the last iteration the reduced cost grew without bound on an
    /// unbounded support, so the bound only covers atoms up to the cap.
    pub unbounded_growth: bool,
    pub cg_epsilon: f64,
    pub search_cap: f64,
}

impl BoundResult {
    /// Largest violation of `0 <= B - M_J <= S_J` over the trace, measured
    /// in the maximization sense, with `B` the final bound.
    pub fn certificate_violation(&self) -> f64 {
        let s = sense_sign(self.sense);
        let b = s * self.bound;
        self.trace
            .iter()
            .map(|r| {
                let d = b - s * r.master_objective;
                (-d).max(d - r.reduced_cost).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub max_iterations: usize,
    /// Zero-weight, non-basic atoms are dropped this often.
    pub prune_every: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            max_iterations: 10_000,
            prune_every: 50,
        }
    }
}

fn sense_sign(sense: Sense) -> f64 {
    match sense {
        Sense::Upper => 1.0,
        Sense::Lower => -1.0,
    }
}

const GRID_POINTS: usize = 2048;
const REFINE_CANDIDATES: usize = 8;
const SEED_GRID: usize = 33;

/// A spec with its functions transformed for the mixture family, plus the
/// search window and cached grid columns.
#[derive(Debug, Clone)]
pub struct PreparedProblem {
    spec: ProblemSpec,
    target: TransformedFunction,
    constraints: Vec<TransformedFunction>,
    sign: f64,
    lo: f64,
    hi: f64,
    scale: f64,
    exact: bool,
    grid: Vec<Column>,
}

impl PreparedProblem {
    pub fn new(spec: &ProblemSpec) -> Result<Self, CgError> {
        spec.validate()?;
        let sign = sense_sign(spec.sense);
        let target = transform(&spec.target.scale(sign), spec.family);
        let constraints: Vec<_> = spec.constraints.iter().map(|c| transform(&c.g, spec.family)).collect();
        let mut lo = spec.search_lower();
        let hi = spec.search_upper();
        if let MixtureFamily::Lognormal { .. } = spec.family {
            lo = lo.max(1e-6 * hi.abs().max(1.0));
        }
        let scale = lo.abs().max(hi.abs()).max(1.0);
        let exact = target.exact().is_some() && constraints.iter().all(|c| c.exact().is_some());
        let mut prep = PreparedProblem {
            spec: spec.clone(),
            target,
            constraints,
            sign,
            lo,
            hi,
            scale,
            exact,
            grid: Vec::new(),
        };
        if !prep.exact {
            prep.grid = (0..=GRID_POINTS)
                .map(|i| prep.column(prep.grid_point(i)))
                .collect::<Result<_, _>>()?;
        }
        Ok(prep)
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    /// Search window `[lo, hi]` for atoms.
    pub fn window(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn uses_exact_path(&self) -> bool {
        self.exact
    }

    fn grid_point(&self, i: usize) -> f64 {
        if i == GRID_POINTS {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / GRID_POINTS as f64
        }
    }

    fn column(&self, x: f64) -> Result<Column, CgError> {
        let obj = self.target.eval(x)?;
        let g = self
            .constraints
            .iter()
            .map(|c| c.eval(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Column { x, obj, g })
    }

    fn bounds(&self) -> impl Iterator<Item = &MomentConstraint> {
        self.spec.constraints.iter()
    }

    fn dedup_tol(&self) -> f64 {
        1e-10 * self.scale
    }
}

struct RowMap {
    lo: Vec<Option<usize>>,
    hi: Vec<Option<usize>>,
    total: usize,
}

/// Builds the master LP over `atoms`. In phase one the objective is zero on
/// atoms and each constraint row gets a violation column costing one.
fn build_master(prep: &PreparedProblem, atoms: &AtomSet, phase_one: bool) -> (LpProblem, RowMap) {
    let n = atoms.len();
    let obj: Vec<f64> = atoms
        .cols
        .iter()
        .map(|c| if phase_one { 0.0 } else { c.obj })
        .collect();
    let mut lp = LpProblem::new(obj);
    let mut map = RowMap {
        lo: Vec::new(),
        hi: Vec::new(),
        total: 0,
    };
    let mut row = 0;
    for (j, c) in prep.bounds().enumerate() {
        let coeffs: Vec<f64> = atoms.cols.iter().map(|col| col.g[j]).collect();
        map.lo.push(if c.sigma_lo.is_finite() {
            lp.add_row(coeffs.clone(), RowKind::Ge, c.sigma_lo).expect("row sized to atoms");
            row += 1;
            Some(row - 1)
        } else {
            None
        });
        map.hi.push(if c.sigma_hi.is_finite() {
            lp.add_row(coeffs, RowKind::Le, c.sigma_hi).expect("row sized to atoms");
            row += 1;
            Some(row - 1)
        } else {
            None
        });
    }
    lp.add_row(vec![1.0; n], RowKind::Eq, 1.0).expect("row sized to atoms");
    map.total = row;
    if phase_one {
        for j in 0..prep.spec.constraints.len() {
            if let Some(r) = map.lo[j] {
                let mut e = vec![0.0; row + 1];
                e[r] = 1.0;
                lp.add_column(-1.0, &e).expect("column sized to rows");
            }
            if let Some(r) = map.hi[j] {
                let mut e = vec![0.0; row + 1];
                e[r] = -1.0;
                lp.add_column(-1.0, &e).expect("column sized to rows");
            }
        }
    }
    (lp, map)
}

fn master_from_lp(prep: &PreparedProblem, atoms: &AtomSet, sol: &LpSolution, map: &RowMap) -> MasterSolution {
    let n = atoms.len();
    let pick = |r: Option<usize>| r.map_or(0.0, |r| sol.duals[r]);
    let rho_lo: Vec<f64> = map.lo.iter().map(|&r| pick(r)).collect();
    let rho_hi: Vec<f64> = map.hi.iter().map(|&r| pick(r)).collect();
    let duals = rho_lo.iter().zip(&rho_hi).map(|(a, b)| a + b).collect();
    let weights = sol.primal[..n].to_vec();
    let internal: f64 = atoms.cols.iter().zip(&weights).map(|(c, p)| c.obj * p).sum();
    MasterSolution {
        weights,
        objective: prep.sign * internal,
        duals,
        rho_lo,
        rho_hi,
        tau: sol.duals[map.total],
        basic: sol.basic[..n].to_vec(),
    }
}

fn solve_master_prepared(prep: &PreparedProblem, atoms: &AtomSet) -> Result<MasterSolution, CgError> {
    let (lp, map) = build_master(prep, atoms, false);
    let sol = solve_lp(&lp);
    match sol.status {
        LpStatus::Optimal => Ok(master_from_lp(prep, atoms, &sol, &map)),
        LpStatus::Infeasible => Err(CgError::Infeasible {
            residual: sol.infeasibility,
        }),
        status => Err(CgError::Lp(format!("master problem ended with status {status:?}"))),
    }
}

/// Solves the master problem over the given atoms.
pub fn solve_master(atoms: &[f64], spec: &ProblemSpec) -> Result<MasterSolution, CgError> {
    let prep = PreparedProblem::new(spec)?;
    let mut set = AtomSet::new(prep.dedup_tol());
    for &x in atoms {
        set.insert(prep.column(x)?);
    }
    solve_master_prepared(&prep, &set)
}

/// Pricing result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subproblem {
    pub x: f64,
    pub reduced_cost: f64,
    pub path: SubproblemPath,
    pub unbounded_growth: bool,
}

struct Duals<'a> {
    lambda: &'a [f64],
    tau: f64,
    /// Weight on the target; zero in phase one.
    target_weight: f64,
}

impl Duals<'_> {
    fn reduced_cost(&self, c: &Column) -> f64 {
        self.target_weight * c.obj - self.tau - self.lambda.iter().zip(&c.g).map(|(l, g)| l * g).sum::<f64>()
    }
}

fn price(prep: &PreparedProblem, duals: &Duals) -> Result<Subproblem, CgError> {
    if prep.exact {
        if let Some(sub) = price_exact(prep, duals)? {
            return Ok(sub);
        }
    }
    price_numeric(prep, duals, prep.lo, prep.hi)
}

fn price_exact(prep: &PreparedProblem, duals: &Duals) -> Result<Option<Subproblem>, CgError> {
    let dom = Domain::new(prep.lo, prep.spec.support.upper()).map_err(ModelError::from)?;
    let constant = PiecewiseFunction::polynomial(dom, Polynomial::constant(-duals.tau));
    let target = prep.target.exact().expect("exact path requires closed forms");
    let mut terms: Vec<(f64, &PiecewiseFunction)> = vec![(duals.target_weight, target), (1.0, &constant)];
    for (l, c) in duals.lambda.iter().zip(&prep.constraints) {
        terms.push((-l, c.exact().expect("exact path requires closed forms")));
    }
    let Some(r) = PiecewiseFunction::linear_combination(&terms) else {
        return Ok(None);
    };
    let full = r.global_max(dom);
    // Unbounded growth: fall back to the capped window. Growth whose leading
    // term stays below epsilon at the cap is dual round-off and not flagged.
    let (m, grew) = if full.unbounded {
        let capped = Domain::new(prep.lo, prep.hi).map_err(ModelError::from)?;
        (r.global_max(capped), leading_term(&r, prep.hi) > prep.spec.cg_epsilon)
    } else {
        (full, false)
    };
    if !m.value.is_finite() {
        return Ok(None);
    }
    // Recompute from the column so the value matches what the master sees.
    let col = prep.column(m.argmax)?;
    Ok(Some(Subproblem {
        x: m.argmax,
        reduced_cost: duals.reduced_cost(&col).max(m.value),
        path: SubproblemPath::ExactPolynomial,
        unbounded_growth: grew,
    }))
}

/// Leading term of the last piece of `r` evaluated at `x`.
fn leading_term(r: &PiecewiseFunction, x: f64) -> f64 {
    let Some(p) = r.pieces().last() else { return 0.0 };
    let n = &p.numerator;
    let lead = n.leading() * x.powi(n.degree().unwrap_or(0) as i32);
    match p.denominator {
        Denominator::One => lead,
        Denominator::Linear { root, .. } => lead / (x - root),
    }
}

fn price_numeric(prep: &PreparedProblem, duals: &Duals, lo: f64, hi: f64) -> Result<Subproblem, CgError> {
    let eval = |x: f64| -> f64 {
        match prep.column(x) {
            Ok(c) => duals.reduced_cost(&c),
            Err(e) => {
                warn!("reduced cost at {x} not evaluable: {e}");
                f64::NEG_INFINITY
            }
        }
    };
    let (xs, rs): (Vec<f64>, Vec<f64>) = if lo == prep.lo && hi == prep.hi && !prep.grid.is_empty() {
        prep.grid.iter().map(|c| (c.x, duals.reduced_cost(c))).unzip()
    } else {
        let n = 256;
        (0..=n)
            .map(|i| {
                let x = if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 };
                (x, eval(x))
            })
            .unzip()
    };
    let n = xs.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| (i == 0 || rs[i] >= rs[i - 1]) && (i + 1 == n || rs[i] >= rs[i + 1]))
        .collect();
    peaks.sort_by(|&a, &b| rs[b].total_cmp(&rs[a]).then(a.cmp(&b)));
    peaks.truncate(REFINE_CANDIDATES);

    let mut best = (xs[0], rs[0]);
    for (&x, &r) in xs.iter().zip(&rs) {
        if r > best.1 {
            best = (x, r);
        }
    }
    let tol = 1e-10 * prep.scale;
    for &i in &peaks {
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(n - 1)];
        let (x, r) = golden_max(eval, a, b, tol);
        if r > best.1 || (r == best.1 && x < best.0) {
            best = (x, r);
        }
    }
    let at_cap = best.0 >= prep.hi && !prep.spec.support.upper().is_finite();
    Ok(Subproblem {
        x: best.0,
        reduced_cost: best.1,
        path: SubproblemPath::NumericSearch,
        unbounded_growth: at_cap,
    })
}

/// Maximizes the reduced cost for the duals of `master`.
pub fn solve_subproblem(master: &MasterSolution, spec: &ProblemSpec) -> Result<Subproblem, CgError> {
    let prep = PreparedProblem::new(spec)?;
    price(
        &prep,
        &Duals {
            lambda: &master.duals,
            tau: master.tau,
            target_weight: 1.0,
        },
    )
}

/// Seed atoms: constraint midpoints for mean-type constraints, finite
/// support ends and a uniform grid over the search window.
fn seed_points(prep: &PreparedProblem) -> Vec<f64> {
    let (lo, hi) = (prep.lo, prep.hi);
    let mut pts: Vec<f64> = (0..SEED_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (SEED_GRID - 1) as f64)
        .collect();
    for c in prep.bounds() {
        if c.g.is_monomial(1) {
            let mid = match (c.sigma_lo.is_finite(), c.sigma_hi.is_finite()) {
                (true, true) => 0.5 * (c.sigma_lo + c.sigma_hi),
                (true, false) => c.sigma_lo,
                (false, true) => c.sigma_hi,
                _ => continue,
            };
            pts.push(mid.clamp(lo, hi));
        }
    }
    pts.extend([prep.spec.support.lower(), prep.spec.support.upper()].into_iter().filter(|v| v.is_finite()));
    pts.retain(|x| *x >= lo && *x <= hi);
    pts
}

/// Phase one: grows the seed set until the master problem is feasible.
fn initialize(prep: &PreparedProblem, opts: &CgOptions) -> Result<AtomSet, CgError> {
    let mut atoms = AtomSet::new(prep.dedup_tol());
    for x in seed_points(prep) {
        atoms.insert(prep.column(x)?);
    }
    let bound_scale = prep
        .bounds()
        .flat_map(|c| [c.sigma_lo, c.sigma_hi])
        .filter(|v| v.is_finite())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let feas_tol = 1e-9 * bound_scale;
    for it in 0..opts.max_iterations {
        let (lp, map) = build_master(prep, &atoms, true);
        let sol = solve_lp(&lp);
        if sol.status != LpStatus::Optimal {
            return Err(CgError::Lp(format!("phase-one master ended with status {:?}", sol.status)));
        }
        let violation = -sol.objective;
        if violation <= feas_tol {
            debug!("phase one feasible after {it} iterations with {} atoms", atoms.len());
            return Ok(atoms);
        }
        let master = master_from_lp(prep, &atoms, &sol, &map);
        let sub = price(
            prep,
            &Duals {
                lambda: &master.duals,
                tau: master.tau,
                target_weight: 0.0,
            },
        )?;
        if sub.reduced_cost <= prep.spec.cg_epsilon.min(feas_tol) || !atoms.insert(prep.column(sub.x)?) {
            return Err(CgError::Infeasible { residual: violation });
        }
    }
    Err(CgError::Infeasible { residual: f64::NAN })
}

/// Returns a set of atoms for which the master problem is feasible.
pub fn initialize_atoms(spec: &ProblemSpec) -> Result<AtomSet, CgError> {
    let prep = PreparedProblem::new(spec)?;
    initialize(&prep, &CgOptions::default())
}

pub fn run_cg(spec: &ProblemSpec) -> Result<BoundResult, CgError> {
    run_cg_with(spec, &CgOptions::default())
}

pub fn run_cg_with(spec: &ProblemSpec, opts: &CgOptions) -> Result<BoundResult, CgError> {
    let prep = PreparedProblem::new(spec)?;
    run_prepared(&prep, opts)
}

/// Column generation on an already prepared problem.
pub fn run_prepared(prep: &PreparedProblem, opts: &CgOptions) -> Result<BoundResult, CgError> {
    let spec = &prep.spec;
    let eps = spec.cg_epsilon;
    let mut atoms = initialize(prep, opts)?;
    let mut trace = Vec::new();
    let (mut converged, mut stalled, mut unbounded) = (false, false, false);
    let mut master = solve_master_prepared(prep, &atoms)?;
    let mut gap = f64::INFINITY;

    for it in 0..opts.max_iterations {
        if it > 0 && it % opts.prune_every == 0 {
            let keep: Vec<bool> = master
                .weights
                .iter()
                .zip(&master.basic)
                .map(|(&w, &b)| w > 0.0 || b)
                .collect();
            atoms.retain_indices(&keep);
            master = solve_master_prepared(prep, &atoms)?;
        }
        let duals = Duals {
            lambda: &master.duals,
            tau: master.tau,
            target_weight: 1.0,
        };
        let mut sub = price(prep, &duals)?;
        gap = sub.reduced_cost;
        trace.push(IterationRecord {
            master_objective: master.objective,
            reduced_cost: sub.reduced_cost,
            atom: sub.x,
            path: sub.path,
        });
        debug!(
            "iteration {it}: objective {:.12e}, reduced cost {:.3e} at {} ({})",
            master.objective,
            sub.reduced_cost,
            sub.x,
            sub.path.name()
        );
        unbounded = sub.unbounded_growth;
        if sub.reduced_cost <= eps {
            converged = true;
            break;
        }
        if atoms.find_near(sub.x).is_some() {
            let width = (prep.hi - prep.lo) / GRID_POINTS as f64;
            let local = price_numeric(prep, &duals, (sub.x - width).max(prep.lo), (sub.x + width).min(prep.hi))?;
            if local.reduced_cost > eps && atoms.find_near(local.x).is_none() {
                sub = local;
            } else {
                warn!("pricing returned existing atom {} with reduced cost {:.3e}", sub.x, sub.reduced_cost);
                stalled = true;
                break;
            }
        }
        atoms.insert(prep.column(sub.x)?);
        master = solve_master_prepared(prep, &atoms)?;
    }

    let mut support: Vec<(f64, f64)> = atoms
        .atoms()
        .into_iter()
        .zip(master.weights.iter().copied())
        .filter(|&(_, w)| w > 0.0)
        .collect();
    support.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = support.iter().map(|s| s.1).sum();
    Ok(BoundResult {
        bound: master.objective,
        gap,
        sense: spec.sense,
        family: spec.family,
        atoms: support.iter().map(|s| s.0).collect(),
        weights: support.iter().map(|s| s.1 / total).collect(),
        iterations: trace.len(),
        trace,
        converged,
        stalled,
        unbounded_growth: unbounded,
        cg_epsilon: eps,
        search_cap: spec.search_cap,
    })
}

/// Extremes of the mean and the largest variance over all distributions
/// satisfying the constraints. Unbounded components are infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEnvelope {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub var_hi: f64,
}

pub fn moment_envelope(spec: &ProblemSpec) -> Result<MomentEnvelope, CgError> {
    let base = spec.clone().with_family(MixtureFamily::Dirac);
    let x = PiecewiseFunction::monomial(spec.support, 1);
    let x2 = PiecewiseFunction::monomial(spec.support, 2);
    let mean_spec = base.clone().with_target(x.clone())?;
    let extreme = |sense: Sense| -> Result<f64, CgError> {
        let r = run_cg(&mean_spec.clone().with_sense(sense))?;
        Ok(if r.unbounded_growth {
            sense_sign(sense) * f64::INFINITY
        } else {
            r.bound
        })
    };
    let mu_lo = extreme(Sense::Lower)?;
    let mu_hi = extreme(Sense::Upper)?;

    let second_spec = base.with_target(x2)?.with_sense(Sense::Upper);
    // sup E[X^2] - m^2 with E[X] pinned to m.
    let var_at = |m: f64| -> Result<f64, CgError> {
        let mut s = second_spec.clone();
        s.constraints.push(MomentConstraint::pinned(x.clone(), m));
        let r = run_cg(&s)?;
        Ok(if r.unbounded_growth {
            f64::INFINITY
        } else {
            r.bound - m * m
        })
    };
    if !mu_lo.is_finite() || !mu_hi.is_finite() {
        let probe = if mu_lo.is_finite() { mu_lo } else if mu_hi.is_finite() { mu_hi } else { 0.0 };
        let v = var_at(probe)?;
        let var_hi = if v.is_infinite() { v } else { f64::INFINITY };
        return Ok(MomentEnvelope { mu_lo, mu_hi, var_hi });
    }
    let width = mu_hi - mu_lo;
    if width <= 1e-12 * mu_lo.abs().max(mu_hi.abs()).max(1.0) {
        let m = 0.5 * (mu_lo + mu_hi);
        return Ok(MomentEnvelope {
            mu_lo,
            mu_hi,
            var_hi: var_at(m)?,
        });
    }
    let n = 16;
    let ms: Vec<f64> = (0..=n).map(|i| mu_lo + width * i as f64 / n as f64).collect();
    let vs = ms.iter().map(|&m| var_at(m)).collect::<Result<Vec<_>, _>>()?;
    if vs.iter().any(|v| v.is_infinite()) {
        return Ok(MomentEnvelope {
            mu_lo,
            mu_hi,
            var_hi: f64::INFINITY,
        });
    }
    let k = (0..vs.len()).fold(0, |b, i| if vs[i] > vs[b] { i } else { b });
    let (a, b) = (ms[k.saturating_sub(1)], ms[(k + 1).min(n)]);
    let (_, refined) = golden_max(|m| var_at(m).unwrap_or(f64::NEG_INFINITY), a, b, 1e-9 * width);
    Ok(MomentEnvelope {
        mu_lo,
        mu_hi,
        var_hi: vs[k].max(refined),
    })
}
