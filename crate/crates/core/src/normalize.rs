//! Affine rescaling of a puzzle into the box `[−½, ½]²`.

use crate::error::{Error, Result};
use crate::geometry::{Frame, Piece, Placement, Puzzle};
use crate::polygon::{bounding_box, Vec2};

/// `x ↦ scale · x + shift` on absolute positions; relative geometry only scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    pub scale: f64,
    pub shift: Vec2,
}

impl AffineTransform {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            shift: Vec2::zeros(),
        }
    }

    pub fn apply(&self, p: &Vec2) -> Vec2 {
        p * self.scale + self.shift
    }

    pub fn invert(&self, p: &Vec2) -> Vec2 {
        (p - self.shift) / self.scale
    }

    pub fn apply_placement(&self, placement: &Placement) -> Placement {
        Placement {
            translations: placement
                .translations
                .iter()
                .map(|t| self.apply(t))
                .collect(),
            orientations: placement.orientations.clone(),
        }
    }

    pub fn invert_placement(&self, placement: &Placement) -> Placement {
        Placement {
            translations: placement
                .translations
                .iter()
                .map(|t| self.invert(t))
                .collect(),
            orientations: placement.orientations.clone(),
        }
    }

    /// Applies the transform to every coordinate of `puzzle`.
    pub fn apply_puzzle(&self, puzzle: &Puzzle) -> Puzzle {
        let s = self.scale;
        let map_region = |r: &Vec<Vec2>| r.iter().map(|p| self.apply(p)).collect::<Vec<_>>();
        let frame = Frame {
            region: map_region(&puzzle.frame.region),
            extra_regions: puzzle.frame.extra_regions.iter().map(map_region).collect(),
            edges: puzzle
                .frame
                .edges
                .iter()
                .map(|e| e.scaled(s).shifted(&self.shift))
                .collect(),
        };
        let pieces = puzzle
            .pieces
            .iter()
            .map(|p| Piece {
                id: p.id,
                vertices: p.vertices.iter().map(|v| v * s).collect(),
                edges: p.edges.iter().map(|e| e.scaled(s)).collect(),
            })
            .collect();
        Puzzle {
            frame,
            pieces,
            rotation_order: puzzle.rotation_order,
            augmented_copies: puzzle.augmented_copies,
            preset_locations: puzzle
                .preset_locations
                .as_ref()
                .map(|v| v.iter().map(|p| self.apply(p)).collect()),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            scale: 1.0 / self.scale,
            shift: -self.shift / self.scale,
        }
    }
}

/// The transform that centers the frame bounding box at the origin and
/// scales its longer side to 1.
///
/// Rotation-augmented puzzles are only scaled about the origin, so that the
/// rotated frame copies stay rotations of each other; their union is
/// scaled into the box.
pub fn normalizing_transform(puzzle: &Puzzle) -> Result<AffineTransform> {
    let points = puzzle.frame.regions().flat_map(|r| r.iter().copied());
    let (lo, hi) =
        bounding_box(points).ok_or_else(|| Error::Precondition("frame has no vertices".into()))?;
    let size = hi - lo;
    if !(size.x > 0.0 && size.y > 0.0)
        || !(puzzle.frame.area() > 0.0)
        || !size.iter().all(|v| v.is_finite())
    {
        return Err(Error::Precondition("frame has zero area".into()));
    }
    if puzzle.augmented_copies.is_some() {
        let reach = lo.abs().sup(&hi.abs()).max();
        let scale = 0.5 / reach;
        return Ok(AffineTransform {
            scale,
            shift: Vec2::zeros(),
        });
    }
    let scale = 1.0 / size.max();
    let center = (lo + hi) * 0.5;
    Ok(AffineTransform {
        scale,
        shift: -center * scale,
    })
}

pub fn normalize_coordinates(puzzle: &Puzzle) -> Result<(Puzzle, AffineTransform)> {
    let t = normalizing_transform(puzzle)?;
    Ok((t.apply_puzzle(puzzle), t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_grid_puzzle, translate_puzzle};

    #[test]
    fn unit_box_is_fixed() {
        let (p, planted) = generate_grid_puzzle(1, 1, 2, 0).unwrap();
        let (p, planted) = translate_puzzle(&p, &planted, &Vec2::new(-0.5, -0.5));
        let (q, t) = normalize_coordinates(&p).unwrap();
        assert_eq!(t, AffineTransform::identity());
        assert_eq!(q, p);
        assert_eq!(t.apply_placement(&planted), planted);
    }

    #[test]
    fn six_by_six_scales_by_one_sixth() {
        let (p, _) = generate_grid_puzzle(6, 6, 3, 1).unwrap();
        let (_, t) = normalize_coordinates(&p).unwrap();
        assert!((t.scale - 1.0 / 6.0).abs() < 1e-15);
        assert!((t.shift - Vec2::new(-0.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn translation_invariance() {
        let (p, planted) = generate_grid_puzzle(2, 3, 3, 9).unwrap();
        let (moved, moved_planted) = translate_puzzle(&p, &planted, &Vec2::new(4.0, -7.5));
        let (a, ta) = normalize_coordinates(&p).unwrap();
        let (b, tb) = normalize_coordinates(&moved).unwrap();
        let close = |x: &Vec2, y: &Vec2| (x - y).norm() < 1e-12;
        for (ra, rb) in a.frame.region.iter().zip(&b.frame.region) {
            assert!(close(ra, rb));
        }
        let pa = ta.apply_placement(&planted);
        let pb = tb.apply_placement(&moved_planted);
        for (x, y) in pa.translations.iter().zip(&pb.translations) {
            assert!(close(x, y));
        }
    }
}
