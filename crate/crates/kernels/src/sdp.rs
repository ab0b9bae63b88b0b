//! Primal-dual interior point method for block-diagonal semidefinite programs.
//!
//! Primal and dual in standard form:
//!
//! ```text
//! minimize   Σ_b ⟨C_b, X_b⟩            maximize  bᵀy
//! subject to Σ_b ⟨A_ib, X_b⟩ = b_i     subject to  S_b = C_b − Σ_i y_i A_ib ⪰ 0
//!            X_b ⪰ 0
//! ```
//!
//! Blocks of dimension one are ordinary non-negative scalars, so linear
//! inequalities are expressed as 1×1 blocks.
//!
//! The method is the infeasible path-following scheme with Nesterov-Todd
//! scaling and a Mehrotra predictor-corrector. For each block the scaling
//! matrix `G` satisfies `G⁻¹XG⁻ᵀ = GᵀSG = Λ` with `Λ` diagonal, so the
//! linearized complementarity equation reduces to an elementwise division in
//! the scaled space.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::eig::sym_eig;
use crate::report::{Residuals, SolveReport, SolveStatus};
use crate::{KernelError, Result};

const STEP_FRACTION: f64 = 0.98;
const DIVERGENCE: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct SdpConstraint {
    /// `(block index, symmetric coefficient matrix)`; blocks not listed have zero coefficient.
    pub terms: Vec<(usize, DMatrix<f64>)>,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct BlockSdp {
    pub block_dims: Vec<usize>,
    pub costs: Vec<DMatrix<f64>>,
    pub constraints: Vec<SdpConstraint>,
}

impl BlockSdp {
    pub fn new(block_dims: Vec<usize>) -> Self {
        let costs = block_dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
        Self {
            block_dims,
            costs,
            constraints: Vec::new(),
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    fn validate(&self) -> Result<()> {
        if self.costs.len() != self.block_dims.len() {
            return Err(KernelError::Dimension(format!(
                "{} cost matrices for {} blocks",
                self.costs.len(),
                self.block_dims.len()
            )));
        }
        for (b, (c, &d)) in self.costs.iter().zip(&self.block_dims).enumerate() {
            if c.nrows() != d || c.ncols() != d {
                return Err(KernelError::Dimension(format!(
                    "cost of block {b} is not {d}x{d}"
                )));
            }
            check_symmetric(c, &format!("cost of block {b}"))?;
        }
        for (i, con) in self.constraints.iter().enumerate() {
            if !con.rhs.is_finite() {
                return Err(KernelError::NonFinite(format!("rhs of constraint {i}")));
            }
            for (b, a) in &con.terms {
                let Some(&d) = self.block_dims.get(*b) else {
                    return Err(KernelError::Dimension(format!(
                        "constraint {i} references block {b}"
                    )));
                };
                if a.nrows() != d || a.ncols() != d {
                    return Err(KernelError::Dimension(format!(
                        "constraint {i} block {b} is not {d}x{d}"
                    )));
                }
                check_symmetric(a, &format!("constraint {i} block {b}"))?;
            }
        }
        Ok(())
    }
}

fn check_symmetric(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(KernelError::NonFinite(what.to_string()));
    }
    let scale = 1.0 + a.amax();
    if (a - a.transpose()).amax() > 1e-12 * scale {
        return Err(KernelError::InvalidArgument(format!(
            "{what} is not symmetric"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Vec<DMatrix<f64>>,
    pub y: Vec<f64>,
    pub s: Vec<DMatrix<f64>>,
}

pub fn solve_block_sdp(sdp: &BlockSdp, tol: f64) -> Result<SolveReport<SdpSolution>> {
    solve_block_sdp_with(
        sdp,
        &SdpOptions {
            tol,
            ..SdpOptions::default()
        },
    )
}

struct Scaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    lambda: Vec<f64>,
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    s: Vec<DMatrix<f64>>,
}

pub fn solve_block_sdp_with(sdp: &BlockSdp, opts: &SdpOptions) -> Result<SolveReport<SdpSolution>> {
    if !(opts.tol > 0.0) {
        return Err(KernelError::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    sdp.validate()?;
    let nb = sdp.num_blocks();
    let m = sdp.constraints.len();
    let n_total: usize = sdp.block_dims.iter().sum();
    let b = DVector::from_iterator(m, sdp.constraints.iter().map(|c| c.rhs));

    let mut touching: Vec<Vec<(usize, &DMatrix<f64>)>> = vec![Vec::new(); nb];
    for (i, con) in sdp.constraints.iter().enumerate() {
        for (blk, a) in &con.terms {
            touching[*blk].push((i, a));
        }
    }

    let b_norm = b.norm();
    let c_norm = sdp
        .costs
        .iter()
        .map(|c| c.norm_squared())
        .sum::<f64>()
        .sqrt();

    if n_total == 0 {
        let status = if b.amax() <= opts.tol {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        };
        return Ok(SolveReport {
            status,
            objective: 0.0,
            primal: SdpSolution {
                x: Vec::new(),
                y: vec![0.0; m],
                s: Vec::new(),
            },
            residuals: Residuals {
                primal: b.norm() / (1.0 + b_norm),
                dual: 0.0,
                gap: 0.0,
            },
            iterations: 0,
            message: None,
        });
    }

    // starting point scaled to the data
    let mut it = {
        let mut x = Vec::with_capacity(nb);
        let mut s = Vec::with_capacity(nb);
        for blk in 0..nb {
            let d = sdp.block_dims[blk];
            let sq = (d as f64).sqrt();
            let mut xi = 10.0f64.max(sq);
            let mut eta = 10.0f64.max(sq).max(sdp.costs[blk].norm());
            for (i, a) in &touching[blk] {
                let an = a.norm();
                xi = xi.max(sq * (1.0 + b[*i].abs()) / (1.0 + an));
                eta = eta.max(an);
            }
            x.push(DMatrix::identity(d, d) * xi);
            s.push(DMatrix::identity(d, d) * eta);
        }
        Iterate {
            x,
            y: DVector::zeros(m),
            s,
        }
    };

    let apply_a = |x: &[DMatrix<f64>]| -> DVector<f64> {
        let mut out = DVector::zeros(m);
        for (blk, list) in touching.iter().enumerate() {
            for (i, a) in list {
                out[*i] += a.dot(&x[blk]);
            }
        }
        out
    };
    let apply_at = |y: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = sdp
            .block_dims
            .iter()
            .map(|&d| DMatrix::zeros(d, d))
            .collect();
        for (blk, list) in touching.iter().enumerate() {
            for (i, a) in list {
                if y[*i] != 0.0 {
                    out[blk] += *a * y[*i];
                }
            }
        }
        out
    };

    let mut best: Option<(f64, Iterate, Residuals, f64)> = None;
    let mut message = None;
    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;

    for iter in 0..opts.max_iter {
        iterations = iter;
        let ax = apply_a(&it.x);
        let rp = &b - &ax;
        let aty = apply_at(&it.y);
        let rd: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| &sdp.costs[k] - &it.s[k] - &aty[k])
            .collect();
        let pobj: f64 = (0..nb).map(|k| sdp.costs[k].dot(&it.x[k])).sum();
        let dobj = b.dot(&it.y);
        let gap: f64 = (0..nb).map(|k| it.x[k].dot(&it.s[k])).sum();
        let res = Residuals {
            primal: rp.norm() / (1.0 + b_norm),
            dual: rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt() / (1.0 + c_norm),
            gap: (pobj - dobj).abs().max(gap.abs()) / (1.0 + pobj.abs() + dobj.abs()),
        };
        let merit = res.max();
        if best.as_ref().map_or(true, |(bm, ..)| merit < *bm) {
            best = Some((
                merit,
                Iterate {
                    x: it.x.clone(),
                    y: it.y.clone(),
                    s: it.s.clone(),
                },
                res,
                pobj,
            ));
        }
        if merit <= opts.tol {
            status = SolveStatus::Optimal;
            break;
        }
        let xnorm: f64 = it.x.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if xnorm > DIVERGENCE || it.y.amax() > DIVERGENCE {
            status = SolveStatus::Infeasible;
            message = Some("iterates diverged; the primal or dual problem is infeasible".into());
            break;
        }
        let mu = gap / n_total as f64;

        let mut scalings = Vec::with_capacity(nb);
        for k in 0..nb {
            match nt_scaling(&it.x[k], &it.s[k]) {
                Some(sc) => scalings.push(sc),
                None => {
                    status = SolveStatus::NumericalFailure;
                    message = Some(format!("block {k} lost positive definiteness"));
                    break;
                }
            }
        }
        if scalings.len() != nb {
            break;
        }

        // Schur complement M_ik = Σ_b ⟨A_ib, W_b A_kb W_b⟩
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for (blk, list) in touching.iter().enumerate() {
            let w = &scalings[blk].w;
            for (k, ak) in list {
                let waw = w * *ak * w;
                for (i, ai) in list {
                    schur[(*i, *k)] += ai.dot(&waw);
                }
            }
        }
        let Some(chol) = regularized_cholesky(&schur) else {
            status = SolveStatus::NumericalFailure;
            message = Some("Schur complement is not positive definite".into());
            break;
        };

        let solve_direction =
            |rc: &[DMatrix<f64>]| -> (Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>) {
                // dX = Rc − W dS W,  dS = Rd − Aᵀdy,  A(dX) = rp
                let tmp: Vec<DMatrix<f64>> = (0..nb)
                    .map(|k| &rc[k] - &scalings[k].w * &rd[k] * &scalings[k].w)
                    .collect();
                let rhs = &rp - apply_a(&tmp);
                let dy = if m > 0 {
                    chol.solve(&rhs)
                } else {
                    DVector::zeros(0)
                };
                let atdy = apply_at(&dy);
                let ds: Vec<DMatrix<f64>> = (0..nb).map(|k| &rd[k] - &atdy[k]).collect();
                let dx: Vec<DMatrix<f64>> = (0..nb)
                    .map(|k| &rc[k] - &scalings[k].w * &ds[k] * &scalings[k].w)
                    .collect();
                (dx, dy, ds)
            };

        // predictor
        let rc_aff: Vec<DMatrix<f64>> = it.x.iter().map(|x| -x).collect();
        let (dx_a, _, ds_a) = solve_direction(&rc_aff);
        let scaled_a: Vec<(DMatrix<f64>, DMatrix<f64>)> = (0..nb)
            .map(|k| {
                let sc = &scalings[k];
                (
                    &sc.g_inv * &dx_a[k] * sc.g_inv.transpose(),
                    sc.g.transpose() * &ds_a[k] * &sc.g,
                )
            })
            .collect();
        let ap = max_step(&scalings, scaled_a.iter().map(|p| &p.0)).min(1.0);
        let ad = max_step(&scalings, scaled_a.iter().map(|p| &p.1)).min(1.0);
        let mu_aff: f64 = (0..nb)
            .map(|k| (&it.x[k] + &dx_a[k] * ap).dot(&(&it.s[k] + &ds_a[k] * ad)))
            .sum::<f64>()
            / n_total as f64;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // corrector
        let rc: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| {
                let sc = &scalings[k];
                let d = sc.lambda.len();
                let (dxt, dst) = &scaled_a[k];
                let cross = (dxt * dst + dst * dxt) * 0.5;
                let mut r = DMatrix::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        let mut v = -cross[(i, j)];
                        if i == j {
                            v += sigma * mu - sc.lambda[i] * sc.lambda[i];
                        }
                        r[(i, j)] = 2.0 * v / (sc.lambda[i] + sc.lambda[j]);
                    }
                }
                &sc.g * r * sc.g.transpose()
            })
            .collect();
        let (dx, dy, ds) = solve_direction(&rc);
        let scaled_x: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| &scalings[k].g_inv * &dx[k] * scalings[k].g_inv.transpose())
            .collect();
        let scaled_s: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| scalings[k].g.transpose() * &ds[k] * &scalings[k].g)
            .collect();
        let ap = (STEP_FRACTION * max_step(&scalings, scaled_x.iter())).min(1.0);
        let ad = (STEP_FRACTION * max_step(&scalings, scaled_s.iter())).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            status = SolveStatus::NumericalFailure;
            message = Some("step length collapsed".into());
            break;
        }
        for k in 0..nb {
            it.x[k] += &dx[k] * ap;
            it.s[k] += &ds[k] * ad;
            symmetrize(&mut it.x[k]);
            symmetrize(&mut it.s[k]);
        }
        it.y += dy * ad;
        iterations = iter + 1;
    }

    let (_, best_it, best_res, best_obj) = best.expect("at least one iterate is evaluated");
    let (final_it, residuals, objective) = if status == SolveStatus::Optimal {
        (best_it, best_res, best_obj)
    } else {
        if status == SolveStatus::MaxIter {
            message = Some(format!("iteration limit {} reached", opts.max_iter));
        }
        (best_it, best_res, best_obj)
    };
    Ok(SolveReport {
        status,
        objective,
        primal: SdpSolution {
            x: final_it.x,
            y: final_it.y.iter().copied().collect(),
            s: final_it.s,
        },
        residuals,
        iterations,
        message,
    })
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let t = a.transpose();
    *a += t;
    *a *= 0.5;
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Scaling> {
    let lx = Cholesky::new(x.clone())?.unpack();
    let ls = Cholesky::new(s.clone())?.unpack();
    let k = ls.transpose() * &lx;
    let e = sym_eig(&(k.transpose() * &k));
    let d = x.nrows();
    let lambda: Vec<f64> = e.values.iter().map(|v| v.max(1e-300).sqrt()).collect();
    let mut q_scaled = e.vectors.clone();
    for j in 0..d {
        let f = 1.0 / lambda[j].sqrt();
        for i in 0..d {
            q_scaled[(i, j)] *= f;
        }
    }
    let g = &lx * &q_scaled;
    let lx_inv = lx.clone().try_inverse()?;
    let mut qt = e.vectors.transpose();
    for i in 0..d {
        let f = lambda[i].sqrt();
        for j in 0..d {
            qt[(i, j)] *= f;
        }
    }
    let g_inv = qt * lx_inv;
    let w = &g * g.transpose();
    Some(Scaling {
        g,
        g_inv,
        w,
        lambda,
    })
}

/// Largest `α` with `Λ + α D ⪰ 0` for every block, `D` given in scaled coordinates.
fn max_step<'a>(scalings: &[Scaling], dirs: impl Iterator<Item = &'a DMatrix<f64>>) -> f64 {
    let mut alpha = f64::INFINITY;
    for (sc, d) in scalings.iter().zip(dirs) {
        let n = sc.lambda.len();
        let mut t = d.clone();
        for i in 0..n {
            for j in 0..n {
                t[(i, j)] /= (sc.lambda[i] * sc.lambda[j]).sqrt();
            }
        }
        let lmin = if n == 1 {
            t[(0, 0)]
        } else {
            *sym_eig(&t).values.last().unwrap()
        };
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    alpha
}

fn regularized_cholesky(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    if let Some(c) = Cholesky::new(sym.clone()) {
        return Some(c);
    }
    let scale = 1.0 + (0..n).map(|i| sym[(i, i)].abs()).fold(0.0, f64::max);
    let mut delta = 1e-14 * scale;
    for _ in 0..10 {
        let reg = &sym + DMatrix::identity(n, n) * delta;
        if let Some(c) = Cholesky::new(reg) {
            return Some(c);
        }
        delta *= 100.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, i: usize, j: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(d, d);
        if i == j {
            a[(i, i)] = 1.0;
        } else {
            a[(i, j)] = 0.5;
            a[(j, i)] = 0.5;
        }
        a
    }

    #[test]
    fn trace_with_pinned_corner() {
        let mut sdp = BlockSdp::new(vec![2]);
        sdp.costs[0] = DMatrix::identity(2, 2);
        sdp.constraints.push(SdpConstraint {
            terms: vec![(0, unit(2, 0, 0))],
            rhs: 1.0,
        });
        let r = solve_block_sdp(&sdp, 1e-8).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "{:?}", r.message);
        assert!((r.objective - 1.0).abs() < 1e-6);
        let z = &r.primal.x[0];
        assert!((z[(0, 0)] - 1.0).abs() < 1e-6 && z[(1, 1)].abs() < 1e-6 && z[(0, 1)].abs() < 1e-4);
    }

    #[test]
    fn empty_constraints_go_to_apex() {
        let mut sdp = BlockSdp::new(vec![3]);
        sdp.costs[0] = DMatrix::identity(3, 3);
        let r = solve_block_sdp(&sdp, 1e-8).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.objective.abs() < 1e-6);
        assert!(r.primal.x[0].amax() < 1e-6);
    }

    #[test]
    fn scalar_blocks_act_as_lp() {
        // minimize x0 + 2 x1 s.t. x0 + x1 = 1, x >= 0
        let mut sdp = BlockSdp::new(vec![1, 1]);
        sdp.costs[0][(0, 0)] = 1.0;
        sdp.costs[1][(0, 0)] = 2.0;
        sdp.constraints.push(SdpConstraint {
            terms: vec![
                (0, DMatrix::from_element(1, 1, 1.0)),
                (1, DMatrix::from_element(1, 1, 1.0)),
            ],
            rhs: 1.0,
        });
        let r = solve_block_sdp(&sdp, 1e-9).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-7);
    }

    #[test]
    fn infeasible_problem_is_not_optimal() {
        // Z11 = -1 cannot hold for Z PSD
        let mut sdp = BlockSdp::new(vec![2]);
        sdp.constraints.push(SdpConstraint {
            terms: vec![(0, unit(2, 0, 0))],
            rhs: -1.0,
        });
        let r = solve_block_sdp(&sdp, 1e-8).unwrap();
        assert_ne!(r.status, SolveStatus::Optimal);
    }

    #[test]
    fn asymmetric_data_is_rejected() {
        let mut sdp = BlockSdp::new(vec![2]);
        sdp.costs[0][(0, 1)] = 1.0;
        assert!(matches!(
            solve_block_sdp(&sdp, 1e-6),
            Err(KernelError::InvalidArgument(_))
        ));
    }
}
