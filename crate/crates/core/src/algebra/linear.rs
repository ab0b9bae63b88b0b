//! The linear representation: one vector equation per edge type,
//! `Σ_{i,j} s_ij (R_link t_i + b_ij) + Σ_j s_0j b_0j = 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::geometry::{canonical_edge_type, Placement, Puzzle, TypeKey};
use crate::polygon::Vec2;

#[derive(Debug, Clone)]
pub struct LinearRepresentation {
    pub type_keys: Vec<TypeKey>,
    /// `2·types × 2N`; rows `2k, 2k+1` hold the x and y components of type `k`,
    /// columns `2i, 2i+1` the components of `t_i`.
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

pub fn linear_representation(puzzle: &Puzzle) -> Result<LinearRepresentation> {
    if puzzle.augmented_copies.is_none() {
        puzzle.check_balanced()?;
    }
    let type_keys: Vec<TypeKey> = puzzle.type_counts().into_keys().collect();
    let n = puzzle.num_pieces();
    let mut matrix = DMatrix::zeros(2 * type_keys.len(), 2 * n);
    let mut rhs = DVector::zeros(2 * type_keys.len());
    for (owner, e) in puzzle.all_edges() {
        let (key, sign) = canonical_edge_type(e);
        let k = type_keys
            .binary_search(&key)
            .expect("type collected from the same edges");
        let s = f64::from(sign);
        rhs[2 * k] -= s * e.offset.x;
        rhs[2 * k + 1] -= s * e.offset.y;
        if owner > 0 {
            let i = owner - 1;
            let (c, sn) = e.link.cos_sin();
            matrix[(2 * k, 2 * i)] += s * c;
            matrix[(2 * k, 2 * i + 1)] -= s * sn;
            matrix[(2 * k + 1, 2 * i)] += s * sn;
            matrix[(2 * k + 1, 2 * i + 1)] += s * c;
        }
    }
    Ok(LinearRepresentation {
        type_keys,
        matrix,
        rhs,
    })
}

impl LinearRepresentation {
    pub fn rank(&self, tol: f64) -> usize {
        if self.matrix.is_empty() {
            return 0;
        }
        self.matrix.clone().svd(false, false).rank(tol)
    }

    /// Largest absolute violation at a translation-only placement.
    pub fn residual(&self, placement: &Placement) -> f64 {
        let x = DVector::from_iterator(
            2 * placement.len(),
            placement.translations.iter().flat_map(|t| [t.x, t.y]),
        );
        (&self.matrix * x - &self.rhs).amax()
    }

    /// The unique solution when the system has full column rank.
    pub fn solve(&self, tol: f64) -> Option<Vec<Vec2>> {
        let cols = self.matrix.ncols();
        if self.rank(tol) < cols {
            return None;
        }
        let svd = self.matrix.clone().svd(true, true);
        let x = svd.solve(&self.rhs, tol).ok()?;
        Some(
            (0..cols / 2)
                .map(|i| Vec2::new(x[2 * i], x[2 * i + 1]))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::generate_grid_puzzle;

    #[test]
    fn planted_solution_satisfies_linear_system() {
        let (p, planted) = generate_grid_puzzle(3, 4, 3, 2).unwrap();
        let lin = linear_representation(&p).unwrap();
        assert!(lin.residual(&planted) < 1e-12);
    }

    #[test]
    fn one_color_grid_is_underdetermined() {
        let (p, _) = generate_grid_puzzle(2, 2, 1, 0).unwrap();
        let lin = linear_representation(&p).unwrap();
        assert!(lin.rank(1e-9) < 2 * p.num_pieces());
    }

    #[test]
    fn single_piece_is_determined() {
        let (p, planted) = generate_grid_puzzle(1, 1, 1_000_000, 6).unwrap();
        let lin = linear_representation(&p).unwrap();
        let t = lin.solve(1e-9).unwrap();
        assert!((t[0] - planted.translations[0]).norm() < 1e-12);
    }
}
