//! Instance generators with planted solutions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Frame, Piece, Placement, Puzzle};
use crate::polygon::Vec2;
use crate::turn::Turn;

/// Builds a unit-square grid puzzle from explicit colors.
///
/// `vertical[r][c]` colors the side between cells `(r, c − 1)` and `(r, c)`
/// (`c = 0` and `c = cols` are frame sides); `horizontal[r][c]` colors the
/// side below cell `(r, c)` (`r = rows` is the top frame side). Cell `(r, c)`
/// covers `[c, c+1] × [r, r+1]`. Piece `i` is cut from cell `cells[i]`
/// (row-major index). Preset locations are the cell centers in row-major order.
pub fn grid_puzzle_from_colors(
    rows: usize,
    cols: usize,
    vertical: &[Vec<u32>],
    horizontal: &[Vec<u32>],
    cells: &[usize],
) -> Result<(Puzzle, Placement)> {
    if rows == 0 || cols == 0 {
        return Err(Error::Precondition(
            "grid needs at least one row and column".into(),
        ));
    }
    if vertical.len() != rows
        || vertical.iter().any(|r| r.len() != cols + 1)
        || horizontal.len() != rows + 1
        || horizontal.iter().any(|r| r.len() != cols)
    {
        return Err(Error::Dimension(
            "grid color tables have the wrong shape".into(),
        ));
    }
    let n = rows * cols;
    let mut seen = vec![false; n];
    if cells.len() != n
        || cells
            .iter()
            .any(|&c| c >= n || std::mem::replace(&mut seen[c], true))
    {
        return Err(Error::Dimension(
            "cell assignment is not a permutation".into(),
        ));
    }

    let p = |x: usize, y: usize| Vec2::new(x as f64, y as f64);
    let mut region = Vec::with_capacity(2 * (rows + cols));
    let mut frame_colors = Vec::with_capacity(2 * (rows + cols));
    for c in 0..cols {
        region.push(p(c, 0));
        frame_colors.push(horizontal[0][c]);
    }
    for r in 0..rows {
        region.push(p(cols, r));
        frame_colors.push(vertical[r][cols]);
    }
    for c in (1..=cols).rev() {
        region.push(p(c, rows));
        frame_colors.push(horizontal[rows][c - 1]);
    }
    for r in (1..=rows).rev() {
        region.push(p(0, r));
        frame_colors.push(vertical[r - 1][0]);
    }
    let frame = Frame::from_region(region, &frame_colors)?;

    let mut pieces = Vec::with_capacity(n);
    let mut translations = Vec::with_capacity(n);
    for (i, &cell) in cells.iter().enumerate() {
        let (r, c) = (cell / cols, cell % cols);
        let square = [p(c, r), p(c + 1, r), p(c + 1, r + 1), p(c, r + 1)];
        let colors = [
            horizontal[r][c],
            vertical[r][c + 1],
            horizontal[r + 1][c],
            vertical[r][c],
        ];
        let (piece, center) = Piece::from_polygon(i as u32 + 1, &square, &colors)?;
        pieces.push(piece);
        translations.push(center);
    }
    let presets = (0..n)
        .map(|cell| Vec2::new((cell % cols) as f64 + 0.5, (cell / cols) as f64 + 0.5))
        .collect();
    let puzzle = Puzzle::new(frame, pieces, 1, Some(presets))?;
    Ok((puzzle, Placement::translation_only(translations)))
}

/// Random `rows × cols` unit-square puzzle with colors drawn uniformly from
/// `0..num_colors` and pieces listed in random order. Returns the planted
/// solution.
pub fn generate_grid_puzzle(
    rows: usize,
    cols: usize,
    num_colors: u32,
    seed: u64,
) -> Result<(Puzzle, Placement)> {
    if num_colors == 0 {
        return Err(Error::Precondition("at least one color is needed".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertical: Vec<Vec<u32>> = (0..rows)
        .map(|_| (0..=cols).map(|_| rng.gen_range(0..num_colors)).collect())
        .collect();
    let horizontal: Vec<Vec<u32>> = (0..=rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(0..num_colors)).collect())
        .collect();
    let mut cells: Vec<usize> = (0..rows * cols).collect();
    cells.shuffle(&mut rng);
    grid_puzzle_from_colors(rows, cols, &vertical, &horizontal, &cells)
}

/// Moves the frame, presets and planted solution by `delta`.
pub fn translate_puzzle(puzzle: &Puzzle, planted: &Placement, delta: &Vec2) -> (Puzzle, Placement) {
    let mut p = puzzle.clone();
    for v in p
        .frame
        .region
        .iter_mut()
        .chain(p.frame.extra_regions.iter_mut().flatten())
    {
        *v += delta;
    }
    p.frame.edges = p.frame.edges.iter().map(|e| e.shifted(delta)).collect();
    if let Some(s) = p.preset_locations.as_mut() {
        s.iter_mut().for_each(|v| *v += delta);
    }
    let placed = Placement {
        translations: planted.translations.iter().map(|t| t + delta).collect(),
        orientations: planted.orientations.clone(),
    };
    (p, placed)
}

/// Rotates every piece by a random multiple of `1/r` turn and records the
/// inverse rotation in the planted solution, so pieces must be turned back.
pub fn scramble_orientations(
    puzzle: &Puzzle,
    planted: &Placement,
    r: u32,
    seed: u64,
) -> Result<(Puzzle, Placement)> {
    if r == 0 {
        return Err(Error::Precondition(
            "rotation order must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = puzzle.clone();
    p.rotation_order = r;
    let mut orientations = Vec::with_capacity(p.pieces.len());
    for (i, piece) in p.pieces.iter_mut().enumerate() {
        let rho = rng.gen_range(0..r);
        let phi = Turn::fraction(i64::from(rho), r);
        *piece = piece.turned(-phi);
        orientations.push(planted.orientations[i] + phi);
    }
    p.check()?;
    Ok((
        p,
        Placement {
            translations: planted.translations.clone(),
            orientations,
        },
    ))
}

/// A 2×2 instance with exactly two solutions: the two bottom-row pieces are
/// identical and can trade places.
pub fn two_solution_puzzle() -> Result<(Puzzle, Placement)> {
    let vertical = vec![vec![0, 0, 0], vec![3, 4, 5]];
    let horizontal = vec![vec![1, 1], vec![2, 2], vec![6, 7]];
    grid_puzzle_from_colors(2, 2, &vertical, &horizontal, &[2, 0, 3, 1])
}

/// Four-piece dissection of the pentagon `(0,0) (3,0) (3,1) (2,2) (0,2)`
/// into triangles with edges of unequal lengths and diagonal orientations.
/// All edges share one color, so only geometry constrains the pairing. The
/// slanted side keeps the two halves of the region from trading places.
pub fn dissection_puzzle() -> Result<(Puzzle, Placement)> {
    let p = Vec2::new;
    let shapes: [Vec<Vec2>; 4] = [
        vec![p(0.0, 0.0), p(2.0, 0.0), p(0.0, 2.0)],
        vec![p(2.0, 0.0), p(2.0, 2.0), p(0.0, 2.0)],
        vec![p(2.0, 0.0), p(3.0, 0.0), p(3.0, 1.0)],
        vec![p(2.0, 0.0), p(3.0, 1.0), p(2.0, 2.0)],
    ];
    let region = vec![
        p(0.0, 0.0),
        p(2.0, 0.0),
        p(3.0, 0.0),
        p(3.0, 1.0),
        p(2.0, 2.0),
        p(0.0, 2.0),
    ];
    let frame = Frame::from_region(region, &[0; 6])?;
    let mut pieces = Vec::new();
    let mut centers = Vec::new();
    for (i, shape) in shapes.iter().enumerate() {
        let (piece, center) = Piece::from_polygon(i as u32 + 1, shape, &vec![0; shape.len()])?;
        pieces.push(piece);
        centers.push(center);
    }
    let puzzle = Puzzle::new(frame, pieces, 1, None)?;
    Ok((puzzle, Placement::translation_only(centers)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{validate_solution, DEFAULT_VALIDITY_TOL};

    #[test]
    fn single_cell() {
        let (p, planted) = generate_grid_puzzle(1, 1, 1, 5).unwrap();
        assert_eq!(p.num_pieces(), 1);
        assert_eq!(p.frame.edges.len(), 4);
        assert_eq!(planted.translations[0], Vec2::new(0.5, 0.5));
        assert!(
            validate_solution(&p, &planted, DEFAULT_VALIDITY_TOL)
                .unwrap()
                .is_valid
        );
    }

    #[test]
    fn six_by_six_counts() {
        let (p, planted) = generate_grid_puzzle(6, 6, 6, 42).unwrap();
        assert_eq!(p.num_pieces(), 36);
        assert_eq!(p.frame.edges.len(), 24);
        let piece_edges: usize = p.pieces.iter().map(|q| q.edges.len()).sum();
        // every piece side is either one of 24 frame contacts or half of an adjacency
        assert_eq!((piece_edges - 24) / 2, 60);
        assert!(p.is_balanced());
        assert!(
            validate_solution(&p, &planted, DEFAULT_VALIDITY_TOL)
                .unwrap()
                .is_valid
        );
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(
            generate_grid_puzzle(3, 4, 5, 11).unwrap(),
            generate_grid_puzzle(3, 4, 5, 11).unwrap()
        );
        assert_ne!(
            generate_grid_puzzle(3, 4, 5, 11).unwrap().0,
            generate_grid_puzzle(3, 4, 5, 12).unwrap().0
        );
    }

    #[test]
    fn scrambled_pieces_validate_when_turned_back() {
        let (p, planted) = generate_grid_puzzle(2, 2, 4, 3).unwrap();
        let (q, scrambled) = scramble_orientations(&p, &planted, 4, 8).unwrap();
        assert!(
            validate_solution(&q, &scrambled, DEFAULT_VALIDITY_TOL)
                .unwrap()
                .is_valid
        );
        assert_eq!(q.rotation_order, 4);
    }

    #[test]
    fn bundled_instances_validate() {
        for (p, planted) in [two_solution_puzzle().unwrap(), dissection_puzzle().unwrap()] {
            assert!(p.is_balanced());
            assert!(
                validate_solution(&p, &planted, DEFAULT_VALIDITY_TOL)
                    .unwrap()
                    .is_valid
            );
        }
    }
}
