//! Maximum-weight assignment of rows to distinct columns.
//!
//! Shortest augmenting path Hungarian method with row/column potentials,
//! O(n²m) for an n×m matrix with n ≤ m.

use nalgebra::DMatrix;

use crate::{KernelError, Result};

/// Returns `sigma` with `sigma[i]` the column assigned to row `i`, maximizing
/// `Σ p[(i, sigma[i])]` over injective maps. Requires `rows ≤ cols`.
pub fn max_assignment(p: &DMatrix<f64>) -> Result<Vec<usize>> {
    let n = p.nrows();
    let m = p.ncols();
    if n > m {
        return Err(KernelError::Dimension(format!(
            "assignment needs rows <= cols, got {n}x{m}"
        )));
    }
    if p.iter().any(|x| !x.is_finite()) {
        return Err(KernelError::NonFinite("assignment weights".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    // minimize cost = -weight; 1-based indexing with a virtual column 0
    let cost = |i: usize, j: usize| -p[(i - 1, j - 1)];
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut sigma = vec![usize::MAX; n];
    for j in 1..=m {
        if owner[j] != 0 {
            sigma[owner[j] - 1] = j - 1;
        }
    }
    Ok(sigma)
}
