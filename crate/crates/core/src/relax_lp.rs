//! Preset-location formulation: pieces are assigned to known candidate
//! locations by a selection matrix `P`, the puzzle equations become linear
//! in `P` through the Vandermonde matrix of the locations, and a sequence of
//! linear programs over doubly stochastic matrices pushes `P` towards a
//! permutation.

use std::collections::BTreeMap;
use std::fmt;

use edgematch_kernels::{max_assignment, LpSolution, Simplex, SolveReport, SolveStatus};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    assemble_complete, augment_rotations, orthonormal_features, AssembleOptions, Family, Mode,
    Monomial, PolySystem, DEFAULT_DEGREE_CAP,
};
use crate::error::{Error, Result};
use crate::generate::translate_puzzle;
use crate::geometry::{
    canonical_edge_type, validate_solution, EdgeElement, Placement, Puzzle, TypeKey,
    DEFAULT_VALIDITY_TOL,
};
use crate::polygon::{bounding_box, Vec2};
use crate::turn::Turn;

/// Improvements below this count as no progress.
const STALL_EPS: f64 = 1e-9;
/// Consecutive non-improving iterations that trigger the stall rule.
const STALL_RUN: usize = 3;
/// Size of the random objective perturbation.
const PERTURBATION: f64 = 1e-3;

/// Monomials of every candidate location: row `j` holds `m(s_j)` for each
/// monomial `m` of the family up to total degree `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetVandermonde {
    /// Normalized locations.
    pub locations: Vec<Vec2>,
    pub family: Family,
    pub degree: u32,
    pub monomials: Vec<Monomial>,
    pub matrix: DMatrix<Complex64>,
}

impl PresetVandermonde {
    pub fn column(&self, monomial: &Monomial) -> Option<usize> {
        self.monomials.iter().position(|m| m == monomial)
    }
}

/// Vandermonde matrix of normalized, pairwise distinct locations.
pub fn build_vandermonde(
    presets: &[Vec2],
    degree: u32,
    family: Family,
) -> Result<PresetVandermonde> {
    if degree == 0 {
        return Err(Error::Precondition(
            "Vandermonde degree must be positive".into(),
        ));
    }
    for i in 0..presets.len() {
        for j in (i + 1)..presets.len() {
            if (presets[i] - presets[j]).norm() <= 1e-12 {
                return Err(Error::Precondition(format!(
                    "preset locations {i} and {j} coincide"
                )));
            }
        }
    }
    let monomials = Monomial::up_to(family, degree);
    let matrix = DMatrix::from_fn(presets.len(), monomials.len(), |j, k| {
        monomials[k].eval(&presets[j])
    });
    Ok(PresetVandermonde {
        locations: presets.to_vec(),
        family,
        degree,
        monomials,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Running,
    PermutationFound,
    Stalled,
    MaxIter,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Running => "running",
            LpStatus::PermutationFound => "permutation_found",
            LpStatus::Stalled => "stalled",
            LpStatus::MaxIter => "max_iter",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxLpState {
    /// Latest iterate, `N × (r·N)`.
    pub p: DMatrix<f64>,
    pub iteration: usize,
    /// `⟨P^{(n−1)}, P^{(n)}⟩` per iteration.
    pub objective_history: Vec<f64>,
    /// Every iterate, starting with the first LP solution.
    pub trace: Vec<DMatrix<f64>>,
    pub status: LpStatus,
    /// Iteration whose objective was perturbed by the stall rule.
    pub perturbed_at: Option<usize>,
    /// Simplex pivots per iteration.
    pub pivots: Vec<usize>,
    /// Number of LP rows coming from puzzle equations.
    pub equation_rows: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub max_iter: usize,
    /// Entries within this distance of 0 or 1 are snapped.
    pub tol_round: f64,
    pub degree_cap: u32,
    pub family: Family,
    /// Seed of the stall perturbation.
    pub seed: u64,
    pub perturb: bool,
    /// Simplex feasibility tolerance.
    pub lp_tol: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol_round: 1e-6,
            degree_cap: DEFAULT_DEGREE_CAP,
            family: Family::ComplexPower,
            seed: 0,
            perturb: true,
            lp_tol: 1e-8,
        }
    }
}

/// The linear program over `P` (`N × M`, `M = r·N` candidate columns):
/// rows of `P` sum to 1, the `r` columns of each location jointly sum to 1,
/// and every puzzle equation holds at `t_i = Σ_j P_ij s_j`.
#[derive(Debug, Clone)]
pub struct RelaxLp {
    n: usize,
    cols: usize,
    copies: usize,
    a: DMatrix<f64>,
    b: Vec<f64>,
    /// Lower bounds are `−shift` instead of 0, which breaks the heavy
    /// degeneracy of the assignment polytope.
    shift: Vec<f64>,
    equation_rows: usize,
    simplex: Simplex,
    tol: f64,
}

impl RelaxLp {
    /// Builds the constraints from the monomial equations of `system`
    /// evaluated at the candidate locations: `X = P Y` literally. `copies` is
    /// the rotation order `r`; the Vandermonde rows are the `r·N` augmented
    /// locations, grouped by location.
    pub fn from_system(
        system: &PolySystem,
        y: &PresetVandermonde,
        copies: usize,
        tol: f64,
    ) -> Result<Self> {
        let n = system.num_pieces;
        let cols = y.locations.len();
        if copies == 0 || cols != n * copies {
            return Err(Error::Dimension(format!(
                "{cols} candidate locations for {n} pieces and {copies} rotations"
            )));
        }
        let nl = system.num_links();
        let mut rows = Vec::new();
        for eq in &system.equations {
            let col = y.column(&eq.monomial);
            let mut row = vec![Complex64::new(0.0, 0.0); n * cols];
            for i in 0..n {
                for l in 0..nl {
                    let alpha = eq.coeff(i, l, nl);
                    if alpha == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    // only the zero link can reuse Y directly
                    let link = system.links[l];
                    for j in 0..cols {
                        let m = match col {
                            Some(k) if link == Turn::ZERO => y.matrix[(j, k)],
                            _ => eq.monomial.eval(&link.rotate(&y.locations[j])),
                        };
                        row[i * cols + j] += alpha * m;
                    }
                }
            }
            rows.push((row, -eq.constant));
        }
        Self::from_rows(n, cols, copies, rows, tol)
    }

    /// Builds the constraints of the same equations written, type by type,
    /// in a polynomial basis orthonormal over the midpoints the type's edges
    /// can occupy. In exact arithmetic this is the same feasible set as
    /// [`RelaxLp::from_system`]; numerically it is far better conditioned,
    /// because high powers at neighbouring locations are nearly parallel.
    /// Edges are evaluated at their midpoints. `puzzle` is the (augmented)
    /// puzzle `system` was assembled from.
    pub fn orthonormal(
        puzzle: &Puzzle,
        system: &PolySystem,
        y: &PresetVandermonde,
        tol: f64,
    ) -> Result<Self> {
        let rows = orthonormal_rows(puzzle, system, y)?;
        let copies = puzzle.augmented_copies.unwrap_or(1) as usize;
        Self::from_rows(system.num_pieces, y.locations.len(), copies, rows, tol)
    }

    /// Doubly stochastic rows followed by the real and imaginary parts of
    /// each complex equation `row · x = rhs`, each scaled to unit maximum.
    fn from_rows(
        n: usize,
        cols: usize,
        copies: usize,
        equations: Vec<(Vec<Complex64>, Complex64)>,
        tol: f64,
    ) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut rhs = Vec::new();
        for (row, c) in equations {
            for part in [|z: Complex64| z.re, |z: Complex64| z.im] {
                let r: Vec<f64> = row.iter().map(|&z| part(z)).collect();
                let big = r.iter().fold(part(c).abs(), |acc, v| acc.max(v.abs()));
                if big <= 1e-12 {
                    continue;
                }
                rows.push(r.iter().map(|v| v / big).collect());
                rhs.push(part(c) / big);
            }
        }
        let (rows, rhs) = independent_rows(n, cols, copies, rows, rhs);
        let equation_rows = rows.len();
        let m = 2 * n + equation_rows;
        let mut a = DMatrix::zeros(m, n * cols);
        let mut b = vec![1.0; m];
        for i in 0..n {
            for j in 0..cols {
                a[(i, i * cols + j)] = 1.0;
                a[(n + j / copies, i * cols + j)] = 1.0;
            }
        }
        for (k, (row, c)) in rows.iter().zip(&rhs).enumerate() {
            for (v, x) in row.iter().enumerate() {
                a[(2 * n + k, v)] = *x;
            }
            b[2 * n + k] = *c;
        }
        let shift = bound_shift(n * cols);
        let shifted = shifted_rhs(&a, &b, &shift);
        let mut simplex = Simplex::new(&a, &shifted, tol)?;
        match simplex.phase_one() {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => {
                return Err(Error::Infeasible(
                    "no doubly stochastic selection satisfies the equations; the degree cap may be too low or the puzzle inconsistent"
                        .into(),
                ))
            }
            s => return Err(Error::Numerical(format!("simplex phase one ended with status {s}"))),
        }
        Ok(Self {
            n,
            cols,
            copies,
            a,
            b,
            shift,
            equation_rows,
            simplex,
            tol,
        })
    }

    pub fn num_pieces(&self) -> usize {
        self.n
    }

    pub fn num_columns(&self) -> usize {
        self.cols
    }

    pub fn equation_rows(&self) -> usize {
        self.equation_rows
    }

    /// Largest violation of the constraints at `P` (negative entries included).
    pub fn constraint_residual(&self, p: &DMatrix<f64>) -> f64 {
        let x = flatten(p);
        let ax = &self.a * nalgebra::DVector::from_column_slice(&x);
        let eq = ax
            .iter()
            .zip(&self.b)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max);
        x.iter().fold(eq, |acc, v| acc.max(-v))
    }

    /// Maximizes `⟨P_prev, P⟩` from the current simplex basis.
    pub fn iterate(&mut self, p_prev: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64, usize)> {
        self.check_shape(p_prev)?;
        let c: Vec<f64> = flatten(p_prev).iter().map(|v| -v).collect();
        let before = self.simplex.pivots();
        let report = self.simplex.optimize(&c);
        self.finish(&report, p_prev, before, None)
    }

    /// Maximizes `⟨P_prev + δ·D, P⟩` subject additionally to
    /// `⟨P_prev, P⟩ ≥ ‖P_prev‖²`, so the unperturbed objective cannot drop.
    /// Solved on a separate simplex; the regular one is left untouched.
    pub fn perturbed_iterate(
        &mut self,
        p_prev: &DMatrix<f64>,
        d: &DMatrix<f64>,
        delta: f64,
    ) -> Result<(DMatrix<f64>, f64, usize)> {
        self.check_shape(p_prev)?;
        self.check_shape(d)?;
        let nv = self.n * self.cols;
        let prev = flatten(p_prev);
        let dir = flatten(d);
        let m = self.a.nrows();
        let mut a = self.a.clone().resize(m + 1, nv + 1, 0.0);
        for (v, x) in prev.iter().enumerate() {
            a[(m, v)] = *x;
        }
        a[(m, nv)] = -1.0;
        let mut b = self.b.clone();
        b.push(prev.iter().map(|x| x * x).sum());
        let mut shift = self.shift.clone();
        shift.push(0.0);
        let mut simplex = Simplex::new(&a, &shifted_rhs(&a, &b, &shift), self.tol)?;
        let mut c: Vec<f64> = prev
            .iter()
            .zip(&dir)
            .map(|(p, q)| -(p + delta * q))
            .collect();
        c.push(0.0);
        let report = simplex.optimize(&c);
        self.finish(&report, p_prev, 0, Some(simplex.pivots()))
    }

    fn check_shape(&self, p: &DMatrix<f64>) -> Result<()> {
        if p.nrows() != self.n || p.ncols() != self.cols {
            return Err(Error::Dimension(format!(
                "P is {}×{}, expected {}×{}",
                p.nrows(),
                p.ncols(),
                self.n,
                self.cols
            )));
        }
        Ok(())
    }

    fn finish(
        &self,
        report: &SolveReport<LpSolution>,
        p_prev: &DMatrix<f64>,
        before: usize,
        pivots: Option<usize>,
    ) -> Result<(DMatrix<f64>, f64, usize)> {
        match report.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => {
                return Err(Error::Infeasible(
                    "no doubly stochastic selection satisfies the equations".into(),
                ))
            }
            s => {
                return Err(Error::Numerical(format!(
                    "simplex ended with status {s} after {} pivots (primal residual {:.2e}){}",
                    report.iterations,
                    report.residuals.primal,
                    report
                        .message
                        .as_deref()
                        .map(|m| format!(": {m}"))
                        .unwrap_or_default()
                )))
            }
        }
        let x = &report.primal.x;
        let p = DMatrix::from_fn(self.n, self.cols, |i, j| {
            (x[i * self.cols + j] - self.shift[i * self.cols + j]).max(0.0)
        });
        let objective = p_prev.dot(&p);
        Ok((
            p,
            objective,
            pivots.unwrap_or(self.simplex.pivots() - before),
        ))
    }

    /// Rotation order the columns are grouped by.
    pub fn copies(&self) -> usize {
        self.copies
    }
}

/// Largest lower-bound shift.
const DEPENDENT_ROW_TOL: f64 = 1e-12;

const BOUND_SHIFT: f64 = 1e-8;

/// Deterministic shifts in `[½, 1] · BOUND_SHIFT`.
fn bound_shift(nv: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..nv)
        .map(|_| BOUND_SHIFT * rng.gen_range(0.5..1.0))
        .collect()
}

/// Right-hand side for `x' = x + shift`.
fn shifted_rhs(a: &DMatrix<f64>, b: &[f64], shift: &[f64]) -> Vec<f64> {
    let ad = a * nalgebra::DVector::from_column_slice(shift);
    b.iter().zip(ad.iter()).map(|(x, y)| x + y).collect()
}

/// Equations of [`RelaxLp::orthonormal`] as complex rows over the flattened
/// selection matrix with their right-hand sides.
fn orthonormal_rows(
    puzzle: &Puzzle,
    system: &PolySystem,
    y: &PresetVandermonde,
) -> Result<Vec<(Vec<Complex64>, Complex64)>> {
    let n = system.num_pieces;
    let cols = y.locations.len();
    let copies = puzzle.augmented_copies.unwrap_or(1) as usize;
    if n != puzzle.num_pieces() || cols != n * copies {
        return Err(Error::Dimension(format!(
            "{cols} candidate locations for {n} pieces and {copies} rotations"
        )));
    }
    let scale = system.normalization.scale;
    let mut by_type: BTreeMap<TypeKey, Vec<(usize, f64, &EdgeElement)>> = BTreeMap::new();
    for (owner, e) in puzzle.all_edges() {
        let (key, sign) = canonical_edge_type(e);
        by_type
            .entry(key)
            .or_default()
            .push((owner, f64::from(sign), e));
    }
    let mut rows = Vec::new();
    for (key, edges) in &by_type {
        let Some(&degree) = system.degrees.get(key) else {
            continue;
        };
        let mut nodes: Vec<Vec2> = Vec::new();
        let mut index: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        let mut node = |p: Vec2| -> usize {
            let k = ((p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64);
            *index.entry(k).or_insert_with(|| {
                nodes.push(p);
                nodes.len() - 1
            })
        };
        // node of every (edge, candidate) pair; frame edges have one
        let mut slots: Vec<(usize, f64, Vec<usize>)> = Vec::with_capacity(edges.len());
        for &(owner, sign, e) in edges {
            if owner == 0 {
                slots.push((0, sign, vec![node(system.normalization.apply(&e.offset))]));
            } else {
                let b = e.offset * scale;
                let at = y
                    .locations
                    .iter()
                    .map(|s| node(e.link.rotate(s) + b))
                    .collect();
                slots.push((owner, sign, at));
            }
        }
        let q = orthonormal_features(&nodes, system.family, degree);
        for k in 0..q.ncols() {
            let mut row = vec![Complex64::new(0.0, 0.0); n * cols];
            let mut constant = Complex64::new(0.0, 0.0);
            for (owner, sign, at) in &slots {
                if *owner == 0 {
                    constant += q[(at[0], k)] * *sign;
                } else {
                    let i = owner - 1;
                    for (j, &v) in at.iter().enumerate() {
                        row[i * cols + j] += q[(v, k)] * *sign;
                    }
                }
            }
            rows.push((row, -constant));
        }
    }
    Ok(rows)
}

fn flatten(p: &DMatrix<f64>) -> Vec<f64> {
    (0..p.nrows())
        .flat_map(|i| (0..p.ncols()).map(move |j| p[(i, j)]))
        .collect()
}

/// One step from scratch: builds the LP and maximizes `⟨P_prev, P⟩`.
pub fn lp_iterate(
    system: &PolySystem,
    y: &PresetVandermonde,
    p_prev: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, f64)> {
    let copies = y.locations.len() / system.num_pieces.max(1);
    let mut lp = RelaxLp::from_system(system, y, copies, LpOptions::default().lp_tol)?;
    let (p, objective, _) = lp.iterate(p_prev)?;
    Ok((p, objective))
}

/// Column chosen for each row if `p` is within `tol` of a 0/1 selection
/// that uses each of the `cols / copies` locations once.
fn snap(p: &DMatrix<f64>, tol: f64, copies: usize) -> Option<Vec<usize>> {
    if p.iter().any(|&v| v.abs() > tol && (v - 1.0).abs() > tol) {
        return None;
    }
    let mut used = vec![false; p.ncols() / copies];
    let mut sigma = Vec::with_capacity(p.nrows());
    for i in 0..p.nrows() {
        let ones: Vec<usize> = (0..p.ncols())
            .filter(|&j| (p[(i, j)] - 1.0).abs() <= tol)
            .collect();
        if ones.len() != 1 || std::mem::replace(&mut used[ones[0] / copies], true) {
            return None;
        }
        sigma.push(ones[0]);
    }
    Some(sigma)
}

/// Rounds a selection matrix with `copies` columns per location.
///
/// A matrix within `tol` of a permutation is returned as that permutation.
/// Otherwise the `copies` columns of each location are summed, the best
/// assignment of pieces to locations is found, each piece takes its largest
/// column within the assigned location, and the result is kept only if
/// `accept` approves it.
pub fn round_selection(
    p: &DMatrix<f64>,
    tol: f64,
    copies: usize,
    accept: impl Fn(&[usize]) -> bool,
) -> Option<Vec<usize>> {
    if let Some(sigma) = snap(p, tol, copies) {
        return Some(sigma);
    }
    let n = p.nrows();
    let collapsed = DMatrix::from_fn(n, p.ncols() / copies, |i, c| {
        (0..copies).map(|r| p[(i, c * copies + r)]).sum()
    });
    let cells = max_assignment(&collapsed).ok()?;
    let sigma: Vec<usize> = cells
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            (0..copies)
                .map(|r| c * copies + r)
                .max_by(|&a, &b| p[(i, a)].total_cmp(&p[(i, b)]).then(b.cmp(&a)))
                .expect("at least one copy")
        })
        .collect();
    accept(&sigma).then_some(sigma)
}

/// [`round_selection`] for square matrices.
pub fn round_to_permutation(
    p: &DMatrix<f64>,
    tol: f64,
    accept: impl Fn(&[usize]) -> bool,
) -> Option<Vec<usize>> {
    round_selection(p, tol, 1, accept)
}

/// Mean of `n` seeded random selections: a random interior direction of the feasible set.
fn random_direction(n: usize, cols: usize, copies: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, cols);
    let mut cells: Vec<usize> = (0..cols / copies).collect();
    for _ in 0..n.max(1) {
        cells.shuffle(rng);
        for (i, &c) in cells.iter().enumerate() {
            let r = *(0..copies)
                .collect::<Vec<_>>()
                .choose(rng)
                .expect("copies ≥ 1");
            d[(i, c * copies + r)] += 1.0 / n.max(1) as f64;
        }
    }
    d
}

/// Solves a puzzle with preset locations by iterated linear programs.
///
/// Rotations (`rotation_order r > 1`) are handled through augmentation with
/// `r` candidate columns per location. Returns a placement only if it
/// passes [`validate_solution`] on the original puzzle.
pub fn solve_preset(
    puzzle: &Puzzle,
    opts: &LpOptions,
) -> Result<(Option<Placement>, RelaxLpState)> {
    let presets = puzzle.preset_locations.clone().ok_or_else(|| {
        Error::Precondition("linear-programming solve needs preset locations".into())
    })?;
    if puzzle.augmented_copies.is_some() {
        return Err(Error::Precondition(
            "pass the original puzzle; rotations are augmented internally".into(),
        ));
    }
    let n = puzzle.num_pieces();
    if presets.len() != n {
        return Err(Error::Dimension(format!(
            "{} preset locations for {n} pieces",
            presets.len()
        )));
    }
    let r = puzzle.rotation_order.max(1) as usize;

    // rotated frame copies must be disjoint, so the frame is moved off the origin
    let (work, shift) = if r > 1 {
        let (lo, hi) =
            bounding_box(puzzle.frame.region.iter().copied()).expect("frame has vertices");
        let margin = 0.5 * (hi - lo).max();
        let delta = Vec2::new(margin, margin) - lo;
        let dummy = Placement::translation_only(Vec::new());
        (translate_puzzle(puzzle, &dummy, &delta).0, delta)
    } else {
        (puzzle.clone(), Vec2::zeros())
    };
    let augmented = augment_rotations(&work, r as u32)?;
    let assemble = AssembleOptions {
        family: opts.family,
        mode: Mode::Point,
        degree_cap: opts.degree_cap,
    };
    let system = assemble_complete(&augmented, &assemble)?;
    let degree = system.degrees.values().copied().max().unwrap_or(1);
    let candidates = augmented
        .preset_locations
        .clone()
        .expect("augmentation keeps presets");
    let normalized: Vec<Vec2> = candidates
        .iter()
        .map(|s| system.normalization.apply(s))
        .collect();
    let y = build_vandermonde(&normalized, degree, opts.family)?;
    let mut lp = RelaxLp::orthonormal(&augmented, &system, &y, opts.lp_tol)?;

    let decode = |sigma: &[usize]| -> Placement {
        let work_presets = work
            .preset_locations
            .as_ref()
            .expect("presets checked above");
        Placement {
            translations: sigma.iter().map(|&j| work_presets[j / r] - shift).collect(),
            orientations: sigma
                .iter()
                .map(|&j| Turn::fraction((j % r) as i64, r as u32))
                .collect(),
        }
    };
    let valid = |placement: &Placement| {
        validate_solution(puzzle, placement, DEFAULT_VALIDITY_TOL)
            .map(|v| v.is_valid)
            .unwrap_or(false)
    };

    let mut state = RelaxLpState {
        p: DMatrix::zeros(n, n * r),
        iteration: 0,
        objective_history: Vec::new(),
        trace: Vec::new(),
        status: LpStatus::Running,
        perturbed_at: None,
        pivots: Vec::new(),
        equation_rows: lp.equation_rows(),
        warnings: system.warnings.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut flat_run = 0usize;
    let mut perturb_next = false;
    while state.iteration < opts.max_iter {
        let prev = state.p.clone();
        let (p, objective, pivots) = if perturb_next {
            perturb_next = false;
            state.perturbed_at = Some(state.iteration + 1);
            let d = random_direction(n, n * r, r, &mut rng);
            lp.perturbed_iterate(&prev, &d, PERTURBATION)?
        } else {
            lp.iterate(&prev)?
        };
        state.iteration += 1;
        let improvement = state
            .objective_history
            .last()
            .map_or(f64::INFINITY, |last| objective - last);
        state.objective_history.push(objective);
        state.pivots.push(pivots);
        state.trace.push(p.clone());
        state.p = p;

        let found = round_selection(&state.p, opts.tol_round, r, |sigma| valid(&decode(sigma)));
        if let Some(sigma) = found {
            let placement = decode(&sigma);
            if valid(&placement) {
                state.status = LpStatus::PermutationFound;
                return Ok((Some(placement), state));
            }
        }

        if improvement < STALL_EPS {
            flat_run += 1;
        } else {
            flat_run = 0;
        }
        if flat_run >= STALL_RUN {
            if opts.perturb && state.perturbed_at.is_none() {
                perturb_next = true;
                flat_run = 0;
            } else {
                state.status = LpStatus::Stalled;
                return Ok((None, state));
            }
        }
    }
    state.status = LpStatus::MaxIter;
    Ok((None, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_grid_puzzle, grid_puzzle_from_colors};

    #[test]
    fn vandermonde_examples() {
        let y = build_vandermonde(&[Vec2::zeros()], 2, Family::ComplexPower).unwrap();
        assert_eq!(y.matrix.shape(), (1, 2));
        assert!(y
            .matrix
            .iter()
            .all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));

        let y = build_vandermonde(
            &[Vec2::new(-0.25, 0.0), Vec2::new(0.25, 0.0)],
            1,
            Family::ComplexPower,
        )
        .unwrap();
        assert!((y.matrix[(0, 0)].re - (-0.25f64).exp()).abs() < 1e-15);
        assert!((y.matrix[(1, 0)].re - 0.25f64.exp()).abs() < 1e-15);
        assert!(
            (y.matrix[(0, 0)].re - 0.7788).abs() < 1e-4
                && (y.matrix[(1, 0)].re - 1.2840).abs() < 1e-4
        );

        let t = Vec2::new(0.1, -0.2);
        let y = build_vandermonde(&[t], 2, Family::RealMultiIndex).unwrap();
        let (tx, ty) = (t.x.exp(), t.y.exp());
        let expected = [tx, ty, tx * tx, tx * ty, ty * ty];
        assert_eq!(y.monomials.len(), 5);
        for (k, e) in expected.iter().enumerate() {
            assert!((y.matrix[(0, k)].re - e).abs() < 1e-14);
        }

        assert!(build_vandermonde(&[t, t], 2, Family::RealMultiIndex).is_err());
    }

    #[test]
    fn snapping_and_assignment() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(
            round_to_permutation(&id, 1e-6, |_| false),
            Some(vec![0, 1, 2])
        );
        let near = DMatrix::from_row_slice(2, 2, &[1e-7, 0.999_999_9, 0.999_999_9, 1e-7]);
        assert_eq!(
            round_to_permutation(&near, 1e-6, |_| false),
            Some(vec![1, 0])
        );
        let half = DMatrix::from_element(2, 2, 0.5);
        assert_eq!(round_to_permutation(&half, 1e-6, |_| false), None);
        assert!(round_to_permutation(&half, 1e-6, |_| true).is_some());
        let tilted = DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.7, 0.3]);
        assert_eq!(
            round_to_permutation(&tilted, 1e-6, |s| s == [1, 0]),
            Some(vec![1, 0])
        );
        assert_eq!(round_to_permutation(&tilted, 1e-6, |s| s == [0, 1]), None);
    }

    #[test]
    fn rectangular_rounding_picks_the_heaviest_copy() {
        let p = DMatrix::from_row_slice(2, 4, &[0.1, 0.5, 0.2, 0.2, 0.3, 0.1, 0.0, 0.6]);
        assert_eq!(round_selection(&p, 1e-6, 2, |_| true), Some(vec![1, 3]));
    }

    #[test]
    fn forced_pair_is_solved_in_one_step() {
        let vertical = vec![vec![0, 1, 2]];
        let horizontal = vec![vec![3, 4], vec![5, 6]];
        let (p, planted) = grid_puzzle_from_colors(1, 2, &vertical, &horizontal, &[1, 0]).unwrap();
        let (placement, state) = solve_preset(&p, &LpOptions::default()).unwrap();
        assert_eq!(state.iteration, 1);
        assert_eq!(state.status, LpStatus::PermutationFound);
        assert_eq!(placement.unwrap(), planted);
        assert!(
            (&state.trace[0] - DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).amax() < 1e-12
        );
    }

    #[test]
    fn feasible_permutation_is_a_fixed_point() {
        let (p, planted) = generate_grid_puzzle(2, 2, 5, 3).unwrap();
        let system = assemble_complete(&p, &AssembleOptions::default()).unwrap();
        let presets: Vec<Vec2> = p
            .preset_locations
            .as_ref()
            .unwrap()
            .iter()
            .map(|s| system.normalization.apply(s))
            .collect();
        let degree = *system.degrees.values().max().unwrap();
        let y = build_vandermonde(&presets, degree, Family::ComplexPower).unwrap();
        let mut perm = DMatrix::zeros(4, 4);
        for (i, t) in planted.translations.iter().enumerate() {
            let j = p
                .preset_locations
                .as_ref()
                .unwrap()
                .iter()
                .position(|s| s == t)
                .unwrap();
            perm[(i, j)] = 1.0;
        }
        let (q, objective) = lp_iterate(&system, &y, &perm).unwrap();
        assert!((objective - 4.0).abs() < 1e-9);
        assert!((q - &perm).amax() < 1e-9);
    }
}

/// Drops equation rows that are numerically in the span of the assignment
/// constraints and the rows kept before them.
fn independent_rows(
    n: usize,
    cols: usize,
    copies: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let width = n * cols;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let push = |mut v: Vec<f64>, basis: &mut Vec<Vec<f64>>| -> f64 {
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for _ in 0..2 {
            for q in basis.iter() {
                let h: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, a)| *x -= h * a);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rel = norm / norm0;
        if rel > DEPENDENT_ROW_TOL {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
        rel
    };
    for i in 0..n {
        let mut v = vec![0.0; width];
        v[i * cols..(i + 1) * cols]
            .iter_mut()
            .for_each(|x| *x = 1.0);
        push(v, &mut basis);
    }
    for c in 0..cols / copies {
        let mut v = vec![0.0; width];
        for i in 0..n {
            for j in c * copies..(c + 1) * copies {
                v[i * cols + j] = 1.0;
            }
        }
        push(v, &mut basis);
    }
    let mut kept = (Vec::new(), Vec::new());
    for (row, c) in rows.into_iter().zip(rhs) {
        let rel = push(row.clone(), &mut basis);
        if rel > DEPENDENT_ROW_TOL {
            kept.0.push(row);
            kept.1.push(c);
        }
    }
    kept
}
