//! Dense two-phase primal simplex with dual values.
//!
//! Problems here are small (a handful of rows, up to tens of thousands of
//! columns), so the solver is a revised simplex that refactors the dense basis
//! from the original data at every pivot. That costs `O(m^3)` per iteration
//! for `m` rows and keeps primal values and duals free of accumulated
//! tableau round-off.
//!
//! Sign convention for the duals of a maximization: a `<=` row has a
//! nonnegative dual, a `>=` row a nonpositive one, an `=` row is free. The
//! reduced cost of column `j` is `c_j - sum_i y_i a_ij`, nonpositive for every
//! column at optimality.

use thiserror::Error;

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("row has {got} coefficients, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite coefficient in LP data")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub kind: RowKind,
    pub rhs: f64,
}

/// `max c^T x` subject to the rows and `x >= 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        LpProblem {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, kind: RowKind, rhs: f64) -> Result<usize, LpError> {
        if coeffs.len() != self.objective.len() {
            return Err(LpError::Dimension {
                expected: self.objective.len(),
                got: coeffs.len(),
            });
        }
        if !rhs.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite);
        }
        self.rows.push(LpRow { coeffs, kind, rhs });
        Ok(self.rows.len() - 1)
    }

    /// Appends a column with objective `obj` and one entry per row.
    pub fn add_column(&mut self, obj: f64, entries: &[f64]) -> Result<usize, LpError> {
        if entries.len() != self.rows.len() {
            return Err(LpError::Dimension {
                expected: self.rows.len(),
                got: entries.len(),
            });
        }
        if !obj.is_finite() || entries.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite);
        }
        self.objective.push(obj);
        for (row, &v) in self.rows.iter_mut().zip(entries) {
            row.coeffs.push(v);
        }
        Ok(self.objective.len() - 1)
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot budget exhausted; reported values are from the last basis.
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub objective: f64,
    /// One per row, in the sign convention described in the module docs.
    pub duals: Vec<f64>,
    /// Whether each structural column is in the final basis.
    pub basic: Vec<bool>,
    /// Phase I artificial sum; zero for feasible problems.
    pub infeasibility: f64,
}

/// Outcome of [`phase_one`].
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseOne {
    Feasible { point: Vec<f64> },
    Infeasible { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Structural,
    Slack,
    Artificial,
}

/// Standard-form working copy: `A x = b`, `x >= 0`, rows scaled so that
/// `b >= 0` and `max_j |a_ij| = 1`.
struct Standard {
    cols: Vec<Vec<f64>>,
    kinds: Vec<Var>,
    b: Vec<f64>,
    /// Original row index of each active row.
    rows: Vec<usize>,
    /// Multiplier taking a scaled-row dual back to the original row.
    dual_factor: Vec<f64>,
    basis: Vec<usize>,
    n_struct: usize,
    bland: bool,
    degenerate: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Standard {
    fn build(lp: &LpProblem) -> Self {
        let m = lp.rows.len();
        let n = lp.objective.len();
        let mut cols = vec![vec![0.0; m]; n];
        let mut kinds = vec![Var::Structural; n];
        let mut b = vec![0.0; m];
        let mut dual_factor = vec![1.0; m];
        let mut basis = vec![0; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let scale = row.coeffs.iter().fold(0.0f64, |s, a| s.max(a.abs()));
            let scale = if scale > 0.0 { scale } else { 1.0 };
            let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
            let k = sign / scale;
            for (j, &a) in row.coeffs.iter().enumerate() {
                cols[j][i] = a * k;
            }
            b[i] = row.rhs * k;
            dual_factor[i] = k;
            let kind = match (row.kind, sign < 0.0) {
                (RowKind::Le, true) => RowKind::Ge,
                (RowKind::Ge, true) => RowKind::Le,
                (kind, _) => kind,
            };
            let mut unit = |v: f64, var: Var| {
                let mut c = vec![0.0; m];
                c[i] = v;
                cols.push(c);
                kinds.push(var);
                cols.len() - 1
            };
            basis[i] = match kind {
                RowKind::Le => unit(1.0, Var::Slack),
                RowKind::Ge => {
                    unit(-1.0, Var::Slack);
                    unit(1.0, Var::Artificial)
                }
                RowKind::Eq => unit(1.0, Var::Artificial),
            };
        }
        Standard {
            cols,
            kinds,
            b,
            rows: (0..m).collect(),
            dual_factor,
            basis,
            n_struct: n,
            bland: false,
            degenerate: 0,
        }
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    fn basis_lu(&self) -> Lu {
        let m = self.m();
        let mut a = vec![0.0; m * m];
        for (c, &j) in self.basis.iter().enumerate() {
            for r in 0..m {
                a[r * m + c] = self.cols[j][r];
            }
        }
        Lu::factor(a, m)
    }

    fn primal(&self, lu: &Lu) -> Vec<f64> {
        lu.solve(&self.b)
    }

    fn run(&mut self, cost: &[f64], allowed: impl Fn(Var) -> bool) -> Outcome {
        let m = self.m();
        let ncols = self.cols.len();
        let limit = 50 * (m + ncols) + 1000;
        let bland_after = 100 * ncols.max(1);
        let mut in_basis = vec![false; ncols];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        for _ in 0..limit {
            let lu = self.basis_lu();
            let xb = self.primal(&lu);
            let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
            let y = lu.solve_transpose(&cb);

            let mut enter = None;
            let mut best = 0.0;
            for j in 0..ncols {
                if in_basis[j] || !allowed(self.kinds[j]) {
                    continue;
                }
                let d = cost[j] - dot(&y, &self.cols[j]);
                if d > OPT_TOL * (1.0 + cost[j].abs()) {
                    if self.bland {
                        enter = Some(j);
                        break;
                    }
                    if d > best {
                        best = d;
                        enter = Some(j);
                    }
                }
            }
            let Some(q) = enter else {
                return Outcome::Optimal;
            };

            let w = lu.solve(&self.cols[q]);
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                if w[r] <= PIVOT_TOL {
                    continue;
                }
                let ratio = xb[r].max(0.0) / w[r];
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((s, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best);
                        let better = if tie {
                            if self.bland {
                                self.basis[r] < self.basis[s]
                            } else {
                                w[r] > w[s]
                            }
                        } else {
                            ratio < best
                        };
                        if better {
                            Some((r, ratio))
                        } else {
                            Some((s, best))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Outcome::Unbounded;
            };
            if ratio <= 1e-12 {
                self.degenerate += 1;
                if self.degenerate > bland_after {
                    self.bland = true;
                }
            }
            in_basis[self.basis[r]] = false;
            in_basis[q] = true;
            self.basis[r] = q;
        }
        Outcome::IterationLimit
    }

    /// Pivots zero-level artificials out of the basis, dropping rows that
    /// turn out to be redundant.
    fn expel_artificials(&mut self) {
        let mut r = 0;
        while r < self.m() {
            if self.kinds[self.basis[r]] != Var::Artificial {
                r += 1;
                continue;
            }
            let lu = self.basis_lu();
            let mut e = vec![0.0; self.m()];
            e[r] = 1.0;
            let rho = lu.solve_transpose(&e);
            let mut pick = None;
            let mut best = PIVOT_TOL;
            for j in 0..self.cols.len() {
                if self.kinds[j] == Var::Artificial || self.basis.contains(&j) {
                    continue;
                }
                let a = dot(&rho, &self.cols[j]).abs();
                if a > best {
                    best = a;
                    pick = Some(j);
                }
            }
            match pick {
                Some(j) => {
                    self.basis[r] = j;
                    r += 1;
                }
                None => {
                    for c in &mut self.cols {
                        c.remove(r);
                    }
                    self.b.remove(r);
                    self.rows.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense LU with partial pivoting, row-major storage.
struct Lu {
    a: Vec<f64>,
    perm: Vec<usize>,
    n: usize,
}

impl Lu {
    fn factor(mut a: Vec<f64>, n: usize) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap_or(k);
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let piv = a[k * n + k];
            if piv == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                a[i * n + k] = f;
                if f != 0.0 {
                    for c in k + 1..n {
                        a[i * n + c] -= f * a[k * n + c];
                    }
                }
            }
        }
        Lu { a, perm, n }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.a[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.a[i * n + k] * x[k];
            }
            x[i] /= self.a[i * n + i];
        }
        x
    }

    /// Solves `B^T y = c`.
    fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = c.to_vec();
        for i in 0..n {
            for k in 0..i {
                z[i] -= self.a[k * n + i] * z[k];
            }
            z[i] /= self.a[i * n + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                z[i] -= self.a[k * n + i] * z[k];
            }
        }
        let mut y = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = z[i];
        }
        y
    }
}

/// Phase I: minimizes the sum of artificials. Leaves `std` at a feasible
/// basis (artificials expelled) or returns the residual infeasibility.
fn run_phase_one(std: &mut Standard) -> Result<(), f64> {
    let cost: Vec<f64> = std
        .kinds
        .iter()
        .map(|k| if *k == Var::Artificial { -1.0 } else { 0.0 })
        .collect();
    if cost.iter().any(|&c| c != 0.0) {
        std.run(&cost, |_| true);
        let lu = std.basis_lu();
        let xb = std.primal(&lu);
        let residual: f64 = std
            .basis
            .iter()
            .zip(&xb)
            .filter(|(j, _)| std.kinds[**j] == Var::Artificial)
            .map(|(_, v)| v.max(0.0))
            .sum();
        let bmax = std.b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if residual > FEAS_TOL * bmax {
            return Err(residual);
        }
        std.expel_artificials();
    }
    std.bland = false;
    std.degenerate = 0;
    Ok(())
}

pub fn phase_one(lp: &LpProblem) -> PhaseOne {
    let mut std = Standard::build(lp);
    match run_phase_one(&mut std) {
        Err(residual) => PhaseOne::Infeasible { residual },
        Ok(()) => {
            let xb = std.primal(&std.basis_lu());
            let mut point = vec![0.0; std.n_struct];
            for (&j, &v) in std.basis.iter().zip(&xb) {
                if j < std.n_struct {
                    point[j] = v.max(0.0);
                }
            }
            PhaseOne::Feasible { point }
        }
    }
}

pub fn solve_lp(lp: &LpProblem) -> LpSolution {
    let n = lp.num_cols();
    let m = lp.num_rows();
    let mut std = Standard::build(lp);
    if let Err(residual) = run_phase_one(&mut std) {
        return LpSolution {
            status: LpStatus::Infeasible,
            primal: vec![0.0; n],
            objective: f64::NAN,
            duals: vec![0.0; m],
            basic: vec![false; n],
            infeasibility: residual,
        };
    }
    let mut cost = vec![0.0; std.cols.len()];
    cost[..n].copy_from_slice(&lp.objective);
    let outcome = std.run(&cost, |k| k != Var::Artificial);

    let lu = std.basis_lu();
    let xb = std.primal(&lu);
    let cb: Vec<f64> = std.basis.iter().map(|&j| cost[j]).collect();
    let y = lu.solve_transpose(&cb);

    let mut primal = vec![0.0; n];
    let mut basic = vec![false; n];
    for (&j, &v) in std.basis.iter().zip(&xb) {
        if j < n {
            primal[j] = v.max(0.0);
            basic[j] = true;
        }
    }
    let mut duals = vec![0.0; m];
    for (pos, &row) in std.rows.iter().enumerate() {
        duals[row] = y[pos] * std.dual_factor[row];
    }
    let objective = dot(&lp.objective, &primal);
    let status = match outcome {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Unbounded => LpStatus::Unbounded,
        Outcome::IterationLimit => LpStatus::IterationLimit,
    };
    LpSolution {
        status,
        primal,
        objective,
        duals,
        basic,
        infeasibility: 0.0,
    }
}
