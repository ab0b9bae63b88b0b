//! Polynomial bases orthonormal over a finite set of points.
//!
//! Over a finite node set the equations of one edge type only see the values
//! of each monomial at the nodes. Raw high powers of `e^t` at nearby nodes
//! are nearly parallel, so the equations are replaced by an equivalent basis
//! of the same polynomial space that is orthonormal over the nodes. The basis
//! is built Arnoldi style: each new vector is a previous vector multiplied by
//! one variable and orthogonalized, never a raw power.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::monomial::Family;
use crate::polygon::Vec2;

/// Residual norm below which a new direction counts as already spanned.
const BREAKDOWN: f64 = 1e-9;

/// Values at `nodes` of polynomials orthonormal over `nodes` that together
/// with the constants span all monomials of `family` up to `degree`. The
/// constant is excluded. Columns follow the graded monomial order; a
/// monomial whose values are already spanned contributes no column.
pub fn orthonormal_features(nodes: &[Vec2], family: Family, degree: u32) -> DMatrix<Complex64> {
    let n = nodes.len();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let z: Vec<Complex64> = nodes
        .iter()
        .map(|p| Complex64::new(p.x, p.y).exp())
        .collect();
    let tx: Vec<Complex64> = nodes
        .iter()
        .map(|p| Complex64::new(p.x.exp(), 0.0))
        .collect();
    let ty: Vec<Complex64> = nodes
        .iter()
        .map(|p| Complex64::new(p.y.exp(), 0.0))
        .collect();

    let mut basis: Vec<Vec<Complex64>> =
        vec![vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n]];
    // index into `basis` of the vector for each generated monomial, if it survived
    let mut survivors: Vec<Option<usize>> = vec![Some(0)];
    let mut parents: Vec<(usize, &[Complex64])> = Vec::new();
    match family {
        Family::ComplexPower => {
            for k in 1..=degree as usize {
                parents.push((k - 1, &z));
            }
        }
        Family::RealMultiIndex => {
            // monomial index of X^a Y^b in graded order, a descending within a degree
            let index = |a: u32, b: u32| -> usize {
                let d = a + b;
                (d * (d + 1) / 2 + (d - a)) as usize
            };
            for d in 1..=degree {
                for a in (0..=d).rev() {
                    let b = d - a;
                    if b == 0 {
                        parents.push((index(a - 1, 0), &tx));
                    } else {
                        parents.push((index(a, b - 1), &ty));
                    }
                }
            }
        }
    }
    for (parent, var) in parents {
        let Some(p) = survivors[parent] else {
            survivors.push(None);
            continue;
        };
        let mut v: Vec<Complex64> = basis[p].iter().zip(var).map(|(q, x)| q * x).collect();
        for _ in 0..2 {
            for q in &basis {
                let h: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, a)| *x -= h * a);
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < BREAKDOWN {
            survivors.push(None);
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        survivors.push(Some(basis.len()));
        basis.push(v);
    }
    DMatrix::from_fn(n, basis.len() - 1, |i, k| basis[k + 1][i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Monomial;

    fn grid_nodes() -> Vec<Vec2> {
        (0..5)
            .flat_map(|i| {
                (0..4).map(move |j| Vec2::new(0.2 * i as f64 - 0.4, 0.25 * j as f64 - 0.375))
            })
            .collect()
    }

    fn check_span(nodes: &[Vec2], family: Family, degree: u32) {
        let q = orthonormal_features(nodes, family, degree);
        let n = nodes.len();
        let gram = q.adjoint() * &q;
        assert!((gram - DMatrix::identity(q.ncols(), q.ncols())).camax() < 1e-10);
        for k in 0..q.ncols() {
            let mean: Complex64 = q.column(k).iter().sum();
            assert!(mean.norm() < 1e-10, "features are orthogonal to constants");
        }
        // every monomial lies in span(1, Q) over the nodes
        let mut full = DMatrix::from_element(
            n,
            q.ncols() + 1,
            Complex64::new(1.0 / (n as f64).sqrt(), 0.0),
        );
        full.view_mut((0, 1), (n, q.ncols())).copy_from(&q);
        for m in Monomial::up_to(family, degree) {
            let v = nalgebra::DVector::from_iterator(n, nodes.iter().map(|p| m.eval(p)));
            let coeffs = full.adjoint() * &v;
            let resid = (&full * coeffs - &v).norm() / v.norm();
            assert!(resid < 1e-8, "{m:?} residual {resid}");
        }
    }

    #[test]
    fn spans_the_monomials() {
        check_span(&grid_nodes(), Family::ComplexPower, 6);
        check_span(&grid_nodes(), Family::RealMultiIndex, 4);
    }

    #[test]
    fn stops_at_the_node_count() {
        let nodes = grid_nodes();
        assert_eq!(
            orthonormal_features(&nodes, Family::ComplexPower, 40).ncols(),
            nodes.len() - 1
        );
        let few = &nodes[..3];
        assert_eq!(
            orthonormal_features(few, Family::RealMultiIndex, 5).ncols(),
            2
        );
        check_span(few, Family::RealMultiIndex, 5);
    }
}
