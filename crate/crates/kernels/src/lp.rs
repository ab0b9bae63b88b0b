//! Two-phase primal simplex on a dense tableau.
//!
//! Problems are in standard equality form
//!
//! ```text
//! minimize cᵀx  subject to  Ax = b,  x ≥ 0
//! ```
//!
//! Rows are sign-normalized so that `b ≥ 0` and phase one starts from an
//! identity basis of artificial variables. Artificial columns are kept in the
//! tableau after phase one: they hold `B⁻¹` and give the dual multipliers for
//! free. Rows whose artificial cannot be pivoted out are linearly dependent
//! and are frozen for the rest of the solve.
//!
//! Pricing is Dantzig's largest-coefficient rule. After a run of degenerate
//! pivots the solver switches to Bland's rule until the objective moves again,
//! which rules out cycling. The ratio test is Harris's two-pass rule, and a
//! pivot that is tiny next to the largest entry of its column is refused in
//! favour of another entering column. Every [`CHECK_PERIOD`] pivots the
//! tableau is rebuilt from an LU factorization of the basis.
//!
//! A [`Simplex`] keeps its tableau after phase one, so a sequence of problems
//! that share `A` and `b` but differ in `c` can be re-optimized from the
//! previous optimal basis.

use nalgebra::DMatrix;

use crate::report::{Residuals, SolveReport, SolveStatus};
use crate::{KernelError, Result};

pub const CHECK_PERIOD: usize = 50;
const DEGENERATE_RUN: usize = 50;
const PIVOT_TOL: f64 = 1e-9;
/// Pivots smaller than this fraction of the column's largest entry are refused.
/// Refactorize, repair and reoptimize rounds at the end of a solve.
const POLISH_ROUNDS: usize = 3;
const REL_PIVOT_TOL: f64 = 1e-5;
const DRIVE_OUT_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub equality_matrix: DMatrix<f64>,
    pub equality_rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(
        objective: Vec<f64>,
        equality_matrix: DMatrix<f64>,
        equality_rhs: Vec<f64>,
    ) -> Result<Self> {
        let lp = Self {
            objective,
            equality_matrix,
            equality_rhs,
        };
        lp.check()?;
        Ok(lp)
    }

    pub fn num_vars(&self) -> usize {
        self.equality_matrix.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.equality_matrix.nrows()
    }

    fn check(&self) -> Result<()> {
        if self.objective.len() != self.equality_matrix.ncols() {
            return Err(KernelError::Dimension(format!(
                "objective has {} entries for {} columns",
                self.objective.len(),
                self.equality_matrix.ncols()
            )));
        }
        if self.equality_rhs.len() != self.equality_matrix.nrows() {
            return Err(KernelError::Dimension(format!(
                "rhs has {} entries for {} rows",
                self.equality_rhs.len(),
                self.equality_matrix.nrows()
            )));
        }
        let finite = self
            .objective
            .iter()
            .chain(self.equality_rhs.iter())
            .all(|x| x.is_finite())
            && self.equality_matrix.iter().all(|x| x.is_finite());
        if !finite {
            return Err(KernelError::NonFinite("linear program data".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Equality multipliers; at optimality `c - Aᵀy ≥ 0` and `bᵀy = cᵀx`.
    pub y: Vec<f64>,
}

/// Solves `lp` from scratch. `tol` bounds the relative primal residual and
/// the reduced-cost optimality test.
pub fn solve_lp(lp: &LinearProgram, tol: f64) -> Result<SolveReport<LpSolution>> {
    lp.check()?;
    let mut simplex = Simplex::new(&lp.equality_matrix, &lp.equality_rhs, tol)?;
    let status = simplex.phase_one();
    if status != SolveStatus::Optimal {
        return Ok(simplex.report(&lp.objective, status));
    }
    Ok(simplex.optimize(&lp.objective))
}

#[derive(Debug, Clone)]
pub struct Simplex {
    m: usize,
    n: usize,
    width: usize,
    tab: Vec<f64>,
    /// Reduced costs over all `n + m` columns.
    reduced: Vec<f64>,
    costs: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    redundant: Vec<bool>,
    sign: Vec<f64>,
    a: DMatrix<f64>,
    b: Vec<f64>,
    tol: f64,
    pivots: usize,
    since_check: usize,
    max_pivots: usize,
    feasible: bool,
}

impl Simplex {
    pub fn new(a: &DMatrix<f64>, b: &[f64], tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(KernelError::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        if b.len() != a.nrows() {
            return Err(KernelError::Dimension(format!(
                "rhs has {} entries for {} rows",
                b.len(),
                a.nrows()
            )));
        }
        let m = a.nrows();
        let n = a.ncols();
        let width = n + m + 1;
        let mut tab = vec![0.0; m * width];
        let mut sign = vec![1.0; m];
        for i in 0..m {
            let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
            sign[i] = s;
            let row = &mut tab[i * width..(i + 1) * width];
            for j in 0..n {
                row[j] = s * a[(i, j)];
            }
            row[n + i] = 1.0;
            row[width - 1] = s * b[i];
        }
        let basis: Vec<usize> = (0..m).map(|i| n + i).collect();
        let mut is_basic = vec![false; n + m];
        for &j in &basis {
            is_basic[j] = true;
        }
        Ok(Self {
            m,
            n,
            width,
            tab,
            reduced: vec![0.0; n + m],
            costs: vec![0.0; n + m],
            basis,
            is_basic,
            redundant: vec![false; m],
            sign,
            a: a.clone(),
            b: b.to_vec(),
            tol,
            pivots: 0,
            since_check: 0,
            max_pivots: 50 * (m + n) + 1000,
            feasible: false,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// Total pivots performed so far, both phases.
    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn rhs(&self, r: usize) -> f64 {
        self.tab[r * self.width + self.width - 1]
    }

    fn b_norm(&self) -> f64 {
        self.b.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    /// Finds a basic feasible solution. Returns `Optimal` when one exists.
    pub fn phase_one(&mut self) -> SolveStatus {
        let mut costs = vec![0.0; self.n + self.m];
        for c in costs[self.n..].iter_mut() {
            *c = 1.0;
        }
        self.set_costs(costs);
        let status = self.run();
        if status != SolveStatus::Optimal {
            return status;
        }
        self.refactor();
        self.since_check = 0;
        let status = self.run();
        if status != SolveStatus::Optimal {
            return status;
        }
        let infeasibility: f64 = (0..self.m)
            .filter(|&r| self.basis[r] >= self.n)
            .map(|r| self.rhs(r).max(0.0))
            .sum();
        if infeasibility > self.tol * (1.0 + self.b_norm()) {
            return SolveStatus::Infeasible;
        }
        self.drive_out_artificials();
        self.feasible = true;
        SolveStatus::Optimal
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let row = &self.tab[r * self.width..r * self.width + self.n];
            let mut best = None;
            let mut best_abs = DRIVE_OUT_TOL;
            for (j, &v) in row.iter().enumerate() {
                if !self.is_basic[j] && v.abs() > best_abs {
                    best_abs = v.abs();
                    best = Some(j);
                }
            }
            match best {
                Some(j) => self.pivot(r, j),
                None => {
                    self.redundant[r] = true;
                    let w = self.width;
                    for v in self.tab[r * w..r * w + self.n].iter_mut() {
                        *v = 0.0;
                    }
                    self.tab[r * w + w - 1] = 0.0;
                }
            }
        }
    }

    /// Minimizes `cᵀx` over the feasible region found by [`Simplex::phase_one`],
    /// starting from the current basis.
    pub fn optimize(&mut self, objective: &[f64]) -> SolveReport<LpSolution> {
        assert_eq!(
            objective.len(),
            self.n,
            "objective length must match column count"
        );
        if !self.feasible {
            let status = self.phase_one();
            if status != SolveStatus::Optimal {
                return self.report(objective, status);
            }
        }
        let mut costs = objective.to_vec();
        costs.extend(std::iter::repeat(0.0).take(self.m));
        self.set_costs(costs);
        let mut status = self.run();
        for _ in 0..POLISH_ROUNDS {
            if status != SolveStatus::Optimal {
                break;
            }
            self.refactor();
            self.since_check = 0;
            if !self.restore_feasibility() {
                break;
            }
            status = self.run();
        }
        let mut report = self.report(objective, status);
        let limit = self.tol * (1.0 + self.b_norm());
        if report.status == SolveStatus::Optimal && report.residuals.primal > limit {
            self.refactor();
            let status = self.run();
            report = self.report(objective, status);
            if report.residuals.primal > limit {
                report.status = SolveStatus::NumericalFailure;
                report.message = Some(format!(
                    "primal residual {:.3e} after refactorization",
                    report.residuals.primal
                ));
            }
        }
        report
    }

    fn set_costs(&mut self, costs: Vec<f64>) {
        self.costs = costs;
        self.recompute_reduced();
    }

    fn recompute_reduced(&mut self) {
        let w = self.width;
        let mut d = self.costs.clone();
        for r in 0..self.m {
            let cb = self.costs[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.tab[r * w..r * w + self.n + self.m];
            for (dj, &t) in d.iter_mut().zip(row) {
                *dj -= cb * t;
            }
        }
        for &j in &self.basis {
            d[j] = 0.0;
        }
        self.reduced = d;
    }

    fn run(&mut self) -> SolveStatus {
        let cmax = self.costs.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        let dtol = 1e-9 * cmax;
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut rejected = vec![false; self.n];
        let mut refreshed = false;
        loop {
            if self.pivots >= self.max_pivots {
                return SolveStatus::MaxIter;
            }
            if self.since_check >= CHECK_PERIOD {
                self.since_check = 0;
                self.refactor();
            }
            let eligible = |j: usize| !self.is_basic[j] && !rejected[j] && self.reduced[j] < -dtol;
            let entering = if bland {
                (0..self.n).find(|&j| eligible(j))
            } else {
                let mut best = None;
                let mut best_d = 0.0;
                for j in (0..self.n).filter(|&j| eligible(j)) {
                    if self.reduced[j] < best_d {
                        best_d = self.reduced[j];
                        best = Some(j);
                    }
                }
                best
            };
            let Some(j) = entering else {
                if rejected.iter().any(|&r| r) {
                    if refreshed {
                        return SolveStatus::NumericalFailure;
                    }
                    // retry the rejected columns on a freshly factorized tableau
                    self.refactor();
                    self.since_check = 0;
                    rejected.iter_mut().for_each(|r| *r = false);
                    refreshed = true;
                    continue;
                }
                return SolveStatus::Optimal;
            };

            let w = self.width;
            // Harris ratio test: bound the step with slightly relaxed rows,
            // then take the largest pivot among rows blocking within it
            let feas = 0.1 * self.tol;
            let mut bound = f64::INFINITY;
            for r in 0..self.m {
                let a = self.tab[r * w + j];
                if !self.redundant[r] && a > PIVOT_TOL {
                    bound = bound.min((self.rhs(r).max(-feas) + feas) / a);
                }
            }
            let mut leave: Option<(usize, f64, f64)> = None;
            for r in 0..self.m {
                let a = self.tab[r * w + j];
                if self.redundant[r] || a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                if ratio > bound {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((br, _, ba)) => {
                        if bland {
                            self.basis[r] < self.basis[br]
                        } else {
                            a > ba
                        }
                    }
                };
                if better {
                    leave = Some((r, ratio, a));
                }
            }
            let Some((r, ratio, a)) = leave else {
                return SolveStatus::NumericalFailure;
            };
            let colmax = (0..self.m)
                .map(|k| self.tab[k * w + j].abs())
                .fold(0.0, f64::max);
            if a < REL_PIVOT_TOL * colmax {
                rejected[j] = true;
                continue;
            }
            let progress = -self.reduced[j] * ratio;
            if progress <= 1e-12 * cmax {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            if self.rhs(r) < 0.0 {
                // absorb the small infeasibility allowed by the relaxed bound
                self.tab[r * w + w - 1] = 0.0;
            }
            self.pivot(r, j);
            if refreshed || rejected.iter().any(|&r| r) {
                rejected.iter_mut().for_each(|r| *r = false);
                refreshed = false;
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width;
        let piv = self.tab[r * w + j];
        let inv = 1.0 / piv;
        let mut prow: Vec<f64> = self.tab[r * w..(r + 1) * w]
            .iter()
            .map(|x| x * inv)
            .collect();
        prow[j] = 1.0;
        for k in 0..self.m {
            if k == r {
                continue;
            }
            let f = self.tab[k * w + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[k * w..(k + 1) * w];
            for (t, &p) in row.iter_mut().zip(&prow) {
                *t -= f * p;
            }
            row[j] = 0.0;
        }
        let f = self.reduced[j];
        if f != 0.0 {
            for (d, &p) in self.reduced.iter_mut().zip(&prow[..w - 1]) {
                *d -= f * p;
            }
            self.reduced[j] = 0.0;
        }
        self.tab[r * w..(r + 1) * w].copy_from_slice(&prow);
        let old = self.basis[r];
        self.is_basic[old] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
        self.pivots += 1;
        self.since_check += 1;
    }

    /// Rebuilds the tableau as `B⁻¹ [DA | I | Db]` from the original data.
    fn refactor(&mut self) {
        let (m, n, w) = (self.m, self.n, self.width);
        if m == 0 {
            return;
        }
        let column = |j: usize, i: usize| -> f64 {
            if j < n {
                self.sign[i] * self.a[(i, j)]
            } else if j - n == i {
                1.0
            } else {
                0.0
            }
        };
        let bmat = DMatrix::from_fn(m, m, |i, r| column(self.basis[r], i));
        let full = DMatrix::from_fn(m, w, |i, j| {
            if j == w - 1 {
                self.sign[i] * self.b[i]
            } else {
                column(j, i)
            }
        });
        let lu = bmat.lu();
        let Some(sol) = lu.solve(&full) else {
            return;
        };
        for r in 0..m {
            for j in 0..w {
                self.tab[r * w + j] = sol[(r, j)];
            }
            if self.redundant[r] {
                for v in self.tab[r * w..r * w + n].iter_mut() {
                    *v = 0.0;
                }
            }
        }
        for r in 0..m {
            let jb = self.basis[r];
            for k in 0..m {
                self.tab[k * w + jb] = if k == r { 1.0 } else { 0.0 };
            }
        }
        self.recompute_reduced();
    }

    /// Dual simplex pivots that clear basic values made negative by rounding
    /// error, choosing entering columns that disturb the reduced costs least.
    /// Returns whether any pivot was made.
    fn restore_feasibility(&mut self) -> bool {
        let w = self.width;
        let feas = 0.1 * self.tol;
        let mut pivoted = false;
        for _ in 0..self.m {
            let Some(r) = (0..self.m)
                .filter(|&r| !self.redundant[r] && self.rhs(r) < -feas)
                .min_by(|&a, &b| self.rhs(a).total_cmp(&self.rhs(b)))
            else {
                return pivoted;
            };
            let row = &self.tab[r * w..r * w + self.n];
            let rowmax = row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let mut best: Option<(usize, f64, f64)> = None;
            for (j, &a) in row.iter().enumerate() {
                if self.is_basic[j] || a >= -PIVOT_TOL || -a < REL_PIVOT_TOL * rowmax {
                    continue;
                }
                let ratio = self.reduced[j].max(0.0) / -a;
                let better = match best {
                    None => true,
                    Some((_, br, ba)) => ratio < br || (ratio == br && -a > ba),
                };
                if better {
                    best = Some((j, ratio, -a));
                }
            }
            let Some((j, _, _)) = best else {
                return pivoted;
            };
            self.pivot(r, j);
            pivoted = true;
        }
        pivoted
    }

    fn report(&self, objective: &[f64], status: SolveStatus) -> SolveReport<LpSolution> {
        let mut x = vec![0.0; self.n];
        for r in 0..self.m {
            let j = self.basis[r];
            if j < self.n {
                x[j] = self.rhs(r).max(0.0);
            }
        }
        let y: Vec<f64> = if status == SolveStatus::Optimal && self.feasible {
            (0..self.m)
                .map(|i| -self.sign[i] * self.reduced[self.n + i])
                .collect()
        } else {
            vec![0.0; self.m]
        };
        let obj: f64 = objective.iter().zip(&x).map(|(c, x)| c * x).sum();
        let residuals = self.residuals(objective, &x, &y);
        let message = match status {
            SolveStatus::Optimal => None,
            SolveStatus::Infeasible => {
                Some("phase one could not remove all artificial variables".into())
            }
            SolveStatus::MaxIter => Some(format!("pivot limit {} reached", self.max_pivots)),
            SolveStatus::NumericalFailure => {
                Some("unbounded direction or numerical breakdown".into())
            }
        };
        SolveReport {
            status,
            objective: obj,
            primal: LpSolution { x, y },
            residuals,
            iterations: self.pivots,
            message,
        }
    }

    fn residuals(&self, c: &[f64], x: &[f64], y: &[f64]) -> Residuals {
        let bn = self.b_norm();
        let mut primal = 0.0f64;
        for i in 0..self.m {
            let ax: f64 = (0..self.n).map(|j| self.a[(i, j)] * x[j]).sum();
            primal = primal.max((ax - self.b[i]).abs());
        }
        let cn = c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut dual = 0.0f64;
        for j in 0..self.n {
            let aty: f64 = (0..self.m).map(|i| self.a[(i, j)] * y[i]).sum();
            dual = dual.max(aty - c[j]);
        }
        let pobj: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
        let dobj: f64 = self.b.iter().zip(y).map(|(a, b)| a * b).sum();
        Residuals {
            primal: primal / (1.0 + bn),
            dual: dual.max(0.0) / (1.0 + cn),
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs()),
        }
    }
}
