//! Cyclic Jacobi eigendecomposition for dense symmetric matrices.
//!
//! Eigenvalues are returned in descending order. Eigenvectors follow a fixed
//! sign convention: the first component whose magnitude exceeds `1e-10` times
//! the largest component is positive. Equal eigenvalues keep the order in
//! which Jacobi leaves them on the diagonal, so the output is reproducible
//! for a given input.

use nalgebra::DMatrix;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues, non-increasing.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    /// `V diag(f(λ)) Vᵀ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let s = f(l);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.map(|l| l)
    }
}

/// Eigendecomposition of `m`, symmetrized on entry as `(m + mᵀ)/2`.
pub fn sym_eig(m: &DMatrix<f64>) -> SymEigen {
    assert!(m.is_square(), "sym_eig requires a square matrix");
    let n = m.nrows();
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);

    let frob = a.norm();
    if n > 1 && frob > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            if off.sqrt() <= 1e-17 * frob {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq.abs() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let app = a[(p, p)];
                    let aqq = a[(q, q)];
                    // skip rotations that cannot change the diagonal in floating point
                    if apq.abs() < 1e-18 * (app.abs() + aqq.abs()) {
                        a[(p, q)] = 0.0;
                        a[(q, p)] = 0.0;
                        continue;
                    }
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    rotate(&mut a, &mut v, p, q, c, s);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps diagonal order among ties
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut vcol: Vec<f64> = (0..n).map(|r| v[(r, src)]).collect();
        let big = vcol.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if let Some(lead) = vcol.iter().find(|x| x.abs() > 1e-10 * big) {
            if *lead < 0.0 {
                vcol.iter_mut().for_each(|x| *x = -*x);
            }
        }
        for r in 0..n {
            vectors[(r, col)] = vcol[r];
        }
    }
    SymEigen { values, vectors }
}

fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_sorts_descending() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let e = sym_eig(&m);
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        // columns are axis permutations
        assert_eq!(e.vectors[(0, 0)], 1.0);
        assert_eq!(e.vectors[(2, 1)], 1.0);
        assert_eq!(e.vectors[(1, 2)], 1.0);
    }

    #[test]
    fn rank_one_spectrum() {
        let u = nalgebra::DVector::from_vec(vec![0.6, -0.8, 0.0]);
        let m = &u * u.transpose();
        let e = sym_eig(&m);
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!(e.values[1].abs() < 1e-14 && e.values[2].abs() < 1e-14);
        let v0 = e.vectors.column(0);
        // sign convention: first significant component positive
        assert!((v0[0] - 0.6).abs() < 1e-12 && (v0[1] + 0.8).abs() < 1e-12);
    }

    #[test]
    fn repeated_top_eigenvalue_is_deterministic() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.0]));
        let e = sym_eig(&m);
        assert_eq!(e.values, vec![1.0, 1.0, 0.0]);
        assert_eq!(e.vectors, DMatrix::identity(3, 3));
    }

    #[test]
    fn one_by_one_and_empty() {
        let e = sym_eig(&DMatrix::from_element(1, 1, -2.5));
        assert_eq!(e.values, vec![-2.5]);
        let e = sym_eig(&DMatrix::<f64>::zeros(0, 0));
        assert!(e.values.is_empty());
    }
}
