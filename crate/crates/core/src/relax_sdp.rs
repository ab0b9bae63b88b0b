//! Free-location formulation: each piece carries a moment matrix `Z_i` whose
//! entries stand for monomials in `T_i = e^{t_i}`. The puzzle equations are
//! linear in the moments, and a sequence of semidefinite programs with
//! reweighted objectives pushes every `Z_i` towards rank one, where it is the
//! outer product of the piece's monomial vector and the location can be read
//! off its first-order entries.

use std::collections::BTreeMap;
use std::fmt;

use edgematch_kernels::{
    solve_block_sdp_with, sym_eig, BlockSdp, SdpConstraint, SdpOptions, SolveStatus,
};
use nalgebra::DMatrix;

use crate::algebra::{assemble_complete, AssembleOptions, Family, Mode, Monomial, PolySystem};
use crate::error::{Error, Result};
use crate::geometry::{validate_solution, Placement, Puzzle};
use crate::normalize::AffineTransform;
use crate::polygon::Vec2;

/// Default moment order.
pub const DEFAULT_MOMENT_ORDER: u32 = 3;
/// Largest `λ₂/λ₁` accepted when reading locations off the moment matrices.
pub const RANK_RATIO_TOL: f64 = 1e-4;
/// Constraints whose normalized residual against earlier ones falls below
/// this are dropped as linearly dependent.
const DEPENDENT_TOL: f64 = 1e-10;
/// Factor on the interior point tolerance within which a stalled solve is
/// still accepted.
const NEAR_OPTIMAL: f64 = 100.0;
/// Half-width of the box holding normalized locations, with a little room.
const BOX_HALF_WIDTH: f64 = 0.5 + 1e-6;
/// Cost per unit of violation of a puzzle equation.
const EQUATION_PENALTY: f64 = 1e1;

/// Exponent pair `(a, b)` of the monomial `T_x^a T_y^b`; one-dimensional
/// structures only use `b = 0`.
pub type MomentId = (u32, u32);

/// Layout of a moment matrix: which monomial every position holds.
///
/// In one dimension the matrix is the Hankel matrix of `1, T, …, T^{2K}`.
/// In two dimensions the underlying vector is `(1, T_x, …, T_x^K, T_y, …,
/// T_y^K)`, so the two diagonal blocks are Hankel and the mixed block holds
/// `T_x^a T_y^b` with `1 ≤ a, b ≤ K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentStructure {
    pub k: u32,
    pub dimension: u8,
    /// `index_map[p][q]` is the monomial at position `(p, q)`.
    pub index_map: Vec<Vec<MomentId>>,
}

pub fn build_moment_structure(k: u32, dimension: u8) -> Result<MomentStructure> {
    if k == 0 {
        return Err(Error::Precondition(
            "moment order must be at least 1".into(),
        ));
    }
    let vector: Vec<MomentId> = match dimension {
        1 => (0..=k).map(|j| (j, 0)).collect(),
        2 => std::iter::once((0, 0))
            .chain((1..=k).map(|j| (j, 0)))
            .chain((1..=k).map(|j| (0, j)))
            .collect(),
        d => {
            return Err(Error::Precondition(format!(
                "moment structures are one or two dimensional, got {d}"
            )))
        }
    };
    let index_map = vector
        .iter()
        .map(|p| vector.iter().map(|q| (p.0 + q.0, p.1 + q.1)).collect())
        .collect();
    Ok(MomentStructure {
        k,
        dimension,
        index_map,
    })
}

impl MomentStructure {
    pub fn dim(&self) -> usize {
        self.index_map.len()
    }

    /// Positions `(p, q)` with `p ≤ q` grouped by the monomial they hold,
    /// each group in row-major order.
    pub fn groups(&self) -> BTreeMap<MomentId, Vec<(usize, usize)>> {
        let mut out: BTreeMap<MomentId, Vec<(usize, usize)>> = BTreeMap::new();
        for p in 0..self.dim() {
            for q in p..self.dim() {
                out.entry(self.index_map[p][q]).or_default().push((p, q));
            }
        }
        out
    }

    /// First position holding `id`, if any.
    pub fn position(&self, id: MomentId) -> Option<(usize, usize)> {
        (0..self.dim()).find_map(|p| {
            (p..self.dim())
                .find(|&q| self.index_map[p][q] == id)
                .map(|q| (p, q))
        })
    }

    /// Position of a real multi-index monomial.
    pub fn monomial_position(&self, m: &Monomial) -> Option<(usize, usize)> {
        match *m {
            Monomial::Real(a, b) if self.dimension == 2 || b == 0 => self.position((a, b)),
            _ => None,
        }
    }

    /// Largest total degree `d` such that every monomial of degree `≤ d`
    /// appears in the matrix.
    pub fn max_degree(&self) -> u32 {
        match self.dimension {
            1 => 2 * self.k,
            _ => self.k + 1,
        }
    }

    /// Indices of `T_x` and (two dimensions) `T_y` in the monomial vector.
    fn first_order(&self) -> (usize, Option<usize>) {
        (1, (self.dimension == 2).then_some(self.k as usize + 1))
    }

    /// Outer product of the monomial vector at the normalized location `t`.
    pub fn embed(&self, t: &Vec2) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |p, q| {
            let (a, b) = self.index_map[p][q];
            (f64::from(a) * t.x + f64::from(b) * t.y).exp()
        })
    }
}

/// `E_pq` symmetrized so that `⟨A, Z⟩ = Z_pq`.
fn selector(n: usize, p: usize, q: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    if p == q {
        a[(p, p)] = 1.0;
    } else {
        a[(p, q)] = 0.5;
        a[(q, p)] = 0.5;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Running,
    Converged,
    MaxIter,
}

impl fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SdpStatus::Running => "running",
            SdpStatus::Converged => "converged",
            SdpStatus::MaxIter => "max_iter",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxSdpState {
    /// Latest moment matrices, projected onto the semidefinite cone.
    pub z: Vec<DMatrix<f64>>,
    /// Weights built from `z`.
    pub w: Vec<DMatrix<f64>>,
    pub iteration: usize,
    /// `Σ⟨W_i, Z_i⟩` with the weights updated from the same iterate, which is
    /// the sum of all eigenvalues but the largest.
    pub objective_history: Vec<f64>,
    /// Optimal value of each semidefinite program.
    pub sdp_objectives: Vec<f64>,
    /// Eigenvalues of every block, descending, per iteration.
    pub eigenvalues: Vec<Vec<Vec<f64>>>,
    /// Locations read off the first-order moments, per iteration, in the
    /// puzzle's coordinates.
    pub locations: Vec<Vec<Vec2>>,
    /// `λ₂/λ₁` per block at the last iterate.
    pub rank_ratios: Vec<f64>,
    pub status: SdpStatus,
    /// Interior point iterations per semidefinite program.
    pub solver_iterations: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpPipelineOptions {
    /// Moment order `K`.
    pub k: u32,
    /// Stopping threshold per piece; the total threshold is `N` times this.
    pub eps_per_piece: f64,
    pub max_iter: usize,
    /// Position tolerance of the final validation.
    pub tol_pos: f64,
    pub rank_ratio: f64,
    pub mode: Mode,
    pub degree_cap: u32,
    /// Interior point tolerance.
    pub sdp_tol: f64,
}

impl Default for SdpPipelineOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_MOMENT_ORDER,
            eps_per_piece: 1e-6,
            max_iter: 60,
            tol_pos: 1e-3,
            rank_ratio: RANK_RATIO_TOL,
            mode: Mode::PathIntegral,
            degree_cap: u32::MAX,
            sdp_tol: 1e-8,
        }
    }
}

/// The block semidefinite program for weights `w`: one moment block per
/// piece followed by two scalar slack blocks per non-constant moment of each
/// piece. The slacks keep every moment inside the range its monomial takes
/// on the normalized box, which implies non-negativity and keeps the
/// feasible set bounded even where the weights vanish.
fn build_program(
    system: &PolySystem,
    structure: &MomentStructure,
    w: &[DMatrix<f64>],
) -> Result<BlockSdp> {
    let n = system.num_pieces;
    let d = structure.dim();
    if system.family != Family::RealMultiIndex {
        return Err(Error::Precondition(
            "moment relaxation needs the real multi-index family".into(),
        ));
    }
    if system.num_links() != 1 {
        return Err(Error::Precondition(
            "moment relaxation handles translations only".into(),
        ));
    }
    if w.len() != n || w.iter().any(|m| m.shape() != (d, d)) {
        return Err(Error::Dimension(format!(
            "expected {n} weight matrices of size {d}x{d}"
        )));
    }
    let groups = structure.groups();
    let nonconstant: Vec<MomentId> = groups.keys().copied().filter(|&id| id != (0, 0)).collect();
    let mut dims = vec![d; n];
    dims.extend(std::iter::repeat(1).take(2 * n * nonconstant.len()));
    let mut sdp = BlockSdp::new(dims);
    for (i, wi) in w.iter().enumerate() {
        sdp.costs[i] = (wi + wi.transpose()) * 0.5;
    }
    let one = DMatrix::from_element(1, 1, 1.0);
    for i in 0..n {
        sdp.constraints.push(SdpConstraint {
            terms: vec![(i, selector(d, 0, 0))],
            rhs: 1.0,
        });
        for positions in groups.values() {
            let (p0, q0) = positions[0];
            for &(p, q) in &positions[1..] {
                let a = selector(d, p0, q0) - selector(d, p, q);
                sdp.constraints.push(SdpConstraint {
                    terms: vec![(i, a)],
                    rhs: 0.0,
                });
            }
        }
        for (s, id) in nonconstant.iter().enumerate() {
            let (p, q) = groups[id][0];
            let slack = n + 2 * (i * nonconstant.len() + s);
            let reach = BOX_HALF_WIDTH * f64::from(id.0 + id.1);
            let sel = selector(d, p, q);
            sdp.constraints.push(SdpConstraint {
                terms: vec![(i, sel.clone()), (slack, -&one)],
                rhs: (-reach).exp(),
            });
            sdp.constraints.push(SdpConstraint {
                terms: vec![(i, sel), (slack + 1, one.clone())],
                rhs: reach.exp(),
            });
        }
    }
    // puzzle equations get penalized slacks on both sides: when the
    // equations pin every moment, the moment blocks alone have no strictly
    // feasible point and the interior point method drifts along an
    // unbounded dual ray
    let mut equations: Vec<(Vec<(usize, DMatrix<f64>)>, f64)> = Vec::new();
    for eq in &system.equations {
        let Some((p, q)) = structure.monomial_position(&eq.monomial) else {
            return Err(Error::Precondition(format!(
                "monomial {:?} is not represented by a moment matrix of order {}",
                eq.monomial, structure.k
            )));
        };
        for part in [
            |z: num_complex::Complex64| z.re,
            |z: num_complex::Complex64| z.im,
        ] {
            let terms: Vec<(usize, DMatrix<f64>)> = (0..n)
                .filter(|&i| part(eq.coeff(i, 0, 1)) != 0.0)
                .map(|i| (i, selector(d, p, q) * part(eq.coeff(i, 0, 1))))
                .collect();
            let rhs = -part(eq.constant);
            if terms.is_empty() && rhs == 0.0 {
                continue;
            }
            equations.push((terms, rhs));
        }
    }
    let structural = std::mem::take(&mut sdp.constraints);
    let mut candidates = structural;
    let first_equation = candidates.len();
    candidates.extend(
        equations
            .into_iter()
            .map(|(terms, rhs)| SdpConstraint { terms, rhs }),
    );
    let kept = independent_constraints(&sdp.block_dims, candidates);
    for (idx, mut c) in kept {
        if idx >= first_equation {
            let plus = sdp.block_dims.len();
            sdp.block_dims.extend([1, 1]);
            sdp.costs
                .push(DMatrix::from_element(1, 1, EQUATION_PENALTY));
            sdp.costs
                .push(DMatrix::from_element(1, 1, EQUATION_PENALTY));
            c.terms.push((plus, one.clone()));
            c.terms.push((plus + 1, -&one));
        }
        sdp.constraints.push(c);
    }
    Ok(sdp)
}

/// Keeps constraints that are not numerically in the span of earlier ones.
fn independent_constraints(
    dims: &[usize],
    constraints: Vec<SdpConstraint>,
) -> Vec<(usize, SdpConstraint)> {
    let mut offsets = Vec::with_capacity(dims.len());
    let mut total = 0;
    for &d in dims {
        offsets.push(total);
        total += d * (d + 1) / 2;
    }
    // coordinates: upper triangle of each block, off-diagonal entries doubled
    let vectorize = |c: &SdpConstraint| -> Vec<(usize, f64)> {
        let mut v = Vec::new();
        for (blk, a) in &c.terms {
            let d = dims[*blk];
            let mut k = offsets[*blk];
            for p in 0..d {
                for q in p..d {
                    let x = if p == q {
                        a[(p, p)]
                    } else {
                        a[(p, q)] + a[(q, p)]
                    };
                    if x != 0.0 {
                        v.push((k, x));
                    }
                    k += 1;
                }
            }
        }
        v
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for (idx, c) in constraints.into_iter().enumerate() {
        let mut v = vec![0.0; total];
        for (k, x) in vectorize(&c) {
            v[k] += x;
        }
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let h: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                if h != 0.0 {
                    v.iter_mut().zip(q).for_each(|(x, a)| *x -= h * a);
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > DEPENDENT_TOL * norm0 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
            kept.push((idx, c));
        }
    }
    kept
}

/// Solves `min Σ⟨W_i, Z_i⟩` over moment matrices satisfying the moment
/// equalities, `Z_i[0,0] = 1`, box bounds on every moment and `Z_i ⪰ 0`.
/// The puzzle equations enter through penalized slacks so that the program
/// keeps a strict interior. Returns the moment blocks, the optimal value and
/// the interior point iteration count.
pub fn sdp_iterate(
    system: &PolySystem,
    structure: &MomentStructure,
    w: &[DMatrix<f64>],
    tol: f64,
) -> Result<(Vec<DMatrix<f64>>, f64, usize)> {
    let sdp = build_program(system, structure, w)?;
    let report = solve_block_sdp_with(&sdp, &SdpOptions { tol, max_iter: 200 })?;
    // a thin feasible set can stall the interior point method just short of
    // the target; its best iterate is kept when it is close
    if report.status != SolveStatus::Optimal && !(report.residuals.max() <= NEAR_OPTIMAL * tol) {
        return Err(Error::Numerical(format!(
            "semidefinite program ended with status {} (residual {:.2e}){}",
            report.status,
            report.residuals.max(),
            report.message.map(|m| format!(": {m}")).unwrap_or_default()
        )));
    }
    let z: Vec<DMatrix<f64>> = report
        .primal
        .x
        .into_iter()
        .take(system.num_pieces)
        .collect();
    Ok((z, report.objective, report.iterations))
}

/// `W_i = V_i diag(0, 1, …, 1) V_iᵀ` from the eigendecomposition of `Z_i`
/// with eigenvalues in descending order; ties keep the eigenvector order and
/// sign convention of [`sym_eig`].
pub fn update_weights(z: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    z.iter()
        .map(|zi| {
            let e = sym_eig(zi);
            let n = zi.nrows();
            let v = e.vectors.column(0);
            DMatrix::identity(n, n) - v * v.transpose()
        })
        .collect()
}

/// Projects a symmetric matrix onto the semidefinite cone.
fn psd_part(z: &DMatrix<f64>) -> DMatrix<f64> {
    sym_eig(z).map(|l| l.max(0.0))
}

/// `λ₂/λ₁` of a block; 0 for a zero matrix.
pub fn rank_ratio(z: &DMatrix<f64>) -> f64 {
    let e = sym_eig(z);
    match e.values.as_slice() {
        [l1, l2, ..] if *l1 > 0.0 => l2.max(0.0) / l1,
        _ => 0.0,
    }
}

/// First-order moments as normalized locations, without any rank check.
fn read_locations(z: &[DMatrix<f64>], structure: &MomentStructure) -> Vec<Vec2> {
    let (ix, iy) = structure.first_order();
    z.iter()
        .map(|zi| {
            let x = zi[(0, ix)].max(f64::MIN_POSITIVE).ln();
            let y = iy.map_or(0.0, |iy| zi[(0, iy)].max(f64::MIN_POSITIVE).ln());
            Vec2::new(x, y)
        })
        .collect()
}

/// Reads `T_i` off the first-order moments of numerically rank-one blocks
/// and maps `t_i = log T_i` back to the puzzle's coordinates. One
/// dimensional structures give `t_y = 0` in normalized coordinates.
pub fn extract_locations(
    z: &[DMatrix<f64>],
    structure: &MomentStructure,
    normalization: &AffineTransform,
    max_ratio: f64,
) -> Result<Placement> {
    let d = structure.dim();
    if z.iter().any(|zi| zi.shape() != (d, d)) {
        return Err(Error::Dimension(format!("moment matrices must be {d}x{d}")));
    }
    let ratios: Vec<f64> = z.iter().map(rank_ratio).collect();
    if let Some(i) = ratios.iter().position(|&r| !(r <= max_ratio)) {
        return Err(Error::Extraction {
            message: format!(
                "block {i} has rank ratio {:.3e} above {max_ratio:e}",
                ratios[i]
            ),
            rank_ratios: ratios,
        });
    }
    let (ix, iy) = structure.first_order();
    for (i, zi) in z.iter().enumerate() {
        if zi[(0, ix)] <= 0.0 || iy.is_some_and(|iy| zi[(0, iy)] <= 0.0) {
            return Err(Error::Extraction {
                message: format!("block {i} has a non-positive first-order moment"),
                rank_ratios: ratios,
            });
        }
        // rank one with a unit corner forces z₂ = z₁²; the Schur complement
        // of the corner is bounded by λ₂ (1 + z₁²) for a nearly rank-one block
        let l2 = sym_eig(zi).values.get(1).copied().unwrap_or(0.0).max(0.0);
        for v in std::iter::once(ix).chain(iy) {
            let z1 = zi[(0, v)] / zi[(0, 0)];
            let schur = zi[(v, v)] - zi[(0, v)] * z1;
            let bound = 2.0 * l2 * (1.0 + z1 * z1) + 1e-12 * (1.0 + zi[(v, v)].abs());
            if schur.abs() > bound {
                return Err(Error::Extraction {
                    message: format!("block {i}: second moment differs from the squared first moment by {schur:.3e}"),
                    rank_ratios: ratios,
                });
            }
        }
    }
    let translations = read_locations(z, structure)
        .iter()
        .map(|t| normalization.invert(t))
        .collect();
    Ok(Placement::translation_only(translations))
}

/// Runs the reweighted semidefinite iteration from zero weights until the
/// sum of the non-leading eigenvalues drops below `N · eps_per_piece`, then
/// extracts and validates the locations.
pub fn solve_sdp_pipeline(
    puzzle: &Puzzle,
    opts: &SdpPipelineOptions,
) -> Result<(Option<Placement>, RelaxSdpState)> {
    if puzzle.rotation_order > 1 || puzzle.augmented_copies.is_some() {
        return Err(Error::Precondition(
            "the moment relaxation solves for translations only".into(),
        ));
    }
    let structure = build_moment_structure(opts.k, 2)?;
    let assemble = AssembleOptions {
        family: Family::RealMultiIndex,
        mode: opts.mode,
        degree_cap: opts.degree_cap.min(structure.max_degree()),
    };
    let system = assemble_complete(puzzle, &assemble)?;
    let n = system.num_pieces;
    let d = structure.dim();
    let eps = opts.eps_per_piece * n as f64;

    let mut state = RelaxSdpState {
        z: Vec::new(),
        w: vec![DMatrix::zeros(d, d); n],
        iteration: 0,
        objective_history: Vec::new(),
        sdp_objectives: Vec::new(),
        eigenvalues: Vec::new(),
        locations: Vec::new(),
        rank_ratios: Vec::new(),
        status: SdpStatus::Running,
        solver_iterations: Vec::new(),
        warnings: system.warnings.clone(),
    };
    while state.iteration < opts.max_iter {
        let (z, sdp_objective, solver_iterations) =
            sdp_iterate(&system, &structure, &state.w, opts.sdp_tol)?;
        let z: Vec<DMatrix<f64>> = z.iter().map(psd_part).collect();
        let w = update_weights(&z);
        let objective: f64 = z
            .iter()
            .zip(&w)
            .map(|(zi, wi)| zi.dot(wi))
            .sum::<f64>()
            .max(0.0);
        state.iteration += 1;
        state.sdp_objectives.push(sdp_objective);
        state.solver_iterations.push(solver_iterations);
        state.objective_history.push(objective);
        state
            .eigenvalues
            .push(z.iter().map(|zi| sym_eig(zi).values).collect());
        state.locations.push(
            read_locations(&z, &structure)
                .iter()
                .map(|t| system.normalization.invert(t))
                .collect(),
        );
        state.rank_ratios = z.iter().map(rank_ratio).collect();
        state.z = z;
        state.w = w;
        log::debug!(
            "sdp iteration {}: objective {objective:.3e}",
            state.iteration
        );
        if objective <= eps {
            state.status = SdpStatus::Converged;
            break;
        }
    }
    if state.status != SdpStatus::Converged {
        state.status = SdpStatus::MaxIter;
        return Ok((None, state));
    }
    let placement =
        match extract_locations(&state.z, &structure, &system.normalization, opts.rank_ratio) {
            Ok(p) => p,
            Err(Error::Extraction { message, .. }) => {
                state.warnings.push(message);
                return Ok((None, state));
            }
            Err(e) => return Err(e),
        };
    let report = validate_solution(puzzle, &placement, opts.tol_pos)?;
    if !report.is_valid {
        state.warnings.push(format!(
            "extracted placement fails validation at tolerance {:e}",
            opts.tol_pos
        ));
        return Ok((None, state));
    }
    Ok((Some(placement), state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PolyEquation;
    use crate::generate::dissection_puzzle;
    use crate::geometry::TypeKey;
    use crate::turn::Turn;

    fn constraint_residual(sdp: &BlockSdp, x: &[DMatrix<f64>]) -> f64 {
        sdp.constraints
            .iter()
            .map(|c| (c.terms.iter().map(|(b, a)| a.dot(&x[*b])).sum::<f64>() - c.rhs).abs())
            .fold(0.0, f64::max)
    }

    /// Moment blocks and slack values of a placement given in normalized
    /// coordinates.
    fn planted_point(structure: &MomentStructure, ts: &[Vec2], blocks: usize) -> Vec<DMatrix<f64>> {
        let mut x: Vec<DMatrix<f64>> = ts.iter().map(|t| structure.embed(t)).collect();
        let ids: Vec<MomentId> = structure
            .groups()
            .keys()
            .copied()
            .filter(|&id| id != (0, 0))
            .collect();
        for zi in x.clone() {
            for id in &ids {
                let (p, q) = structure.position(*id).unwrap();
                let reach = BOX_HALF_WIDTH * f64::from(id.0 + id.1);
                x.push(DMatrix::from_element(1, 1, zi[(p, q)] - (-reach).exp()));
                x.push(DMatrix::from_element(1, 1, reach.exp() - zi[(p, q)]));
            }
        }
        x.resize(blocks, DMatrix::zeros(1, 1));
        x
    }

    fn dissection_system() -> (PolySystem, Vec<Vec2>) {
        let (puzzle, planted) = dissection_puzzle().unwrap();
        let opts = AssembleOptions {
            family: Family::RealMultiIndex,
            mode: Mode::PathIntegral,
            degree_cap: 4,
        };
        let system = assemble_complete(&puzzle, &opts).unwrap();
        let ts = planted
            .translations
            .iter()
            .map(|t| system.normalization.apply(t))
            .collect();
        (system, ts)
    }

    #[test]
    fn structure_examples() {
        let s = build_moment_structure(1, 1).unwrap();
        assert_eq!(
            s.index_map,
            vec![vec![(0, 0), (1, 0)], vec![(1, 0), (2, 0)]]
        );
        assert_eq!(
            s.groups()[&(1, 0)].len(),
            1,
            "the anti-diagonal pair is one upper position"
        );

        let s = build_moment_structure(2, 1).unwrap();
        assert_eq!(s.dim(), 3);
        assert_eq!(s.groups()[&(2, 0)], vec![(0, 2), (1, 1)]);
        assert_eq!(s.groups().len(), 5);

        let s = build_moment_structure(1, 2).unwrap();
        let expected = vec![
            vec![(0, 0), (1, 0), (0, 1)],
            vec![(1, 0), (2, 0), (1, 1)],
            vec![(0, 1), (1, 1), (0, 2)],
        ];
        assert_eq!(s.index_map, expected);
        assert_eq!(build_moment_structure(3, 2).unwrap().dim(), 7);
        assert!(build_moment_structure(0, 1).is_err());
        assert!(build_moment_structure(2, 3).is_err());
    }

    #[test]
    fn embedding_is_rank_one_and_consistent() {
        let s = build_moment_structure(3, 2).unwrap();
        let z = s.embed(&Vec2::new(0.3, -0.2));
        assert!(rank_ratio(&z) < 1e-12);
        for (id, positions) in s.groups() {
            let v = z[positions[0]];
            assert!(
                positions.iter().all(|&pq| (z[pq] - v).abs() < 1e-12),
                "{id:?}"
            );
        }
    }

    #[test]
    fn weights_examples() {
        let v = nalgebra::DVector::from_vec(vec![1.0, 2.0, -0.5]);
        let z = &v * v.transpose();
        let w = update_weights(std::slice::from_ref(&z));
        assert!(w[0].dot(&z).abs() < 1e-12);

        let w = update_weights(&[DMatrix::identity(4, 4)]);
        assert!((w[0].dot(&DMatrix::identity(4, 4)) - 3.0).abs() < 1e-12);

        // ties follow the eigenvector order of sym_eig: the first basis
        // vector is the leading one
        let z = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.0]));
        let w = update_weights(std::slice::from_ref(&z));
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 1.0, 1.0]));
        assert!((&w[0] - expected).amax() < 1e-12, "{}", w[0]);
        assert_eq!(update_weights(std::slice::from_ref(&z)), w, "deterministic");
        let e = sym_eig(&w[0]).values;
        assert!(e.iter().all(|l| l.abs() < 1e-12 || (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn extraction_examples() {
        let s = build_moment_structure(2, 2).unwrap();
        let id = AffineTransform::identity();
        let p =
            extract_locations(&[s.embed(&Vec2::new(0.0, 0.0))], &s, &id, RANK_RATIO_TOL).unwrap();
        assert!(p.translations[0].x.abs() < 1e-12 && p.translations[0].y.abs() < 1e-12);

        let z = s.embed(&Vec2::new(0.25, 0.0));
        assert!((z[(0, 1)] - 1.2840254166877414).abs() < 1e-12);
        let p = extract_locations(&[z], &s, &id, RANK_RATIO_TOL).unwrap();
        assert!((p.translations[0].x - 0.25).abs() < 1e-10 && p.translations[0].y.abs() < 1e-10);

        let s1 = build_moment_structure(1, 1).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.1]);
        match extract_locations(&[bad], &s1, &id, RANK_RATIO_TOL) {
            Err(Error::Extraction { rank_ratios, .. }) => {
                assert!((rank_ratios[0] - 0.1).abs() < 1e-12)
            }
            other => panic!("expected an extraction failure, got {other:?}"),
        }
    }

    #[test]
    fn extraction_checks_the_power_structure() {
        // rank one but not an outer product of (1, T, T²)
        let s = build_moment_structure(1, 1).unwrap();
        let v = nalgebra::DVector::from_vec(vec![1.0, 1.5]);
        let mut z = &v * v.transpose();
        assert!(extract_locations(
            &[z.clone()],
            &s,
            &AffineTransform::identity(),
            RANK_RATIO_TOL
        )
        .is_ok());
        z[(1, 1)] += 0.2;
        assert!(extract_locations(&[z], &s, &AffineTransform::identity(), RANK_RATIO_TOL).is_err());
    }

    #[test]
    fn planted_dissection_is_a_fixed_point() {
        let (system, ts) = dissection_system();
        let structure = build_moment_structure(3, 2).unwrap();
        let z: Vec<DMatrix<f64>> = ts.iter().map(|t| structure.embed(t)).collect();
        let w = update_weights(&z);
        let sdp = build_program(&system, &structure, &w).unwrap();
        let x = planted_point(&structure, &ts, sdp.block_dims.len());
        assert!(constraint_residual(&sdp, &x) < 1e-12);
        let worst = x
            .iter()
            .map(|b| sym_eig(b).values.last().copied().unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(worst >= -1e-12, "planted point leaves the cone: {worst}");
        let planted_objective: f64 = sdp.costs.iter().zip(&x).map(|(c, x)| c.dot(x)).sum();
        assert!(planted_objective.abs() < 1e-12);
        let (_, objective, _) = sdp_iterate(&system, &structure, &w, 1e-8).unwrap();
        assert!(objective.abs() < 1e-5, "{objective}");
    }

    #[test]
    fn zero_weights_give_a_feasibility_problem() {
        let (system, _) = dissection_system();
        let structure = build_moment_structure(3, 2).unwrap();
        let w = vec![DMatrix::zeros(7, 7); system.num_pieces];
        let (z, objective, _) = sdp_iterate(&system, &structure, &w, 1e-8).unwrap();
        assert!(objective.abs() < 1e-5, "{objective}");
        for zi in &z {
            assert!((zi[(0, 0)] - 1.0).abs() < 1e-6);
            assert!(sym_eig(zi).values.last().unwrap() > &-1e-6);
        }
    }

    #[test]
    fn single_piece_converges_to_the_outer_product() {
        let target = Vec2::new(0.2, -0.1);
        let key = TypeKey {
            color: 0,
            angle: Turn::ZERO,
        };
        let equation = |monomial: Monomial, value: f64| PolyEquation {
            type_key: key,
            monomial,
            coeffs: vec![num_complex::Complex64::new(1.0, 0.0)],
            constant: num_complex::Complex64::new(-value, 0.0),
        };
        let system = PolySystem {
            equations: vec![
                equation(Monomial::Real(1, 0), target.x.exp()),
                equation(Monomial::Real(0, 1), target.y.exp()),
            ],
            normalization: AffineTransform::identity(),
            degrees: BTreeMap::new(),
            family: Family::RealMultiIndex,
            mode: Mode::PathIntegral,
            num_pieces: 1,
            links: vec![Turn::ZERO],
            warnings: Vec::new(),
        };
        let structure = build_moment_structure(1, 2).unwrap();
        let mut w = vec![DMatrix::zeros(3, 3)];
        let mut z = Vec::new();
        for _ in 0..20 {
            z = sdp_iterate(&system, &structure, &w, 1e-9).unwrap().0;
            w = update_weights(&z);
            if w[0].dot(&z[0]) < 1e-8 {
                break;
            }
        }
        assert!((&z[0] - structure.embed(&target)).amax() < 1e-4, "{}", z[0]);
    }
}
