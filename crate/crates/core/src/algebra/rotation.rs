//! Rotations through augmentation: the puzzle is duplicated into `r`
//! rotated copies and each piece becomes a rigid union of its `r` rotated
//! copies, so rotating a piece by `φ` amounts to translating the union by
//! `t = R(−φ) t̂`.

use crate::error::{Error, Result};
use crate::geometry::{Frame, Piece, Placement, Puzzle};
use crate::polygon::{self, Vec2};
use crate::turn::Turn;

fn rotated_region(region: &[Vec2], phi: Turn) -> Vec<Vec2> {
    region.iter().map(|v| phi.rotate(v)).collect()
}

/// Augmented translation-only puzzle for rotation order `r` (identity for `r = 1`).
pub fn augment_rotations(puzzle: &Puzzle, r: u32) -> Result<Puzzle> {
    if r == 0 {
        return Err(Error::Precondition(
            "rotation order must be at least 1".into(),
        ));
    }
    if r == 1 {
        return Ok(puzzle.clone());
    }
    if puzzle.augmented_copies.is_some() {
        return Err(Error::Precondition("puzzle is already augmented".into()));
    }
    for (owner, e) in puzzle.all_edges() {
        if !e.orientation.is_multiple_of(r) {
            return Err(Error::Precondition(format!(
                "edge orientation {:?} on {} is not a multiple of 1/{r} turn",
                e.orientation,
                if owner == 0 {
                    "the frame".to_string()
                } else {
                    format!("piece {}", puzzle.pieces[owner - 1].id)
                }
            )));
        }
    }
    let copies: Vec<Vec<Vec2>> = (0..r)
        .map(|rho| rotated_region(&puzzle.frame.region, Turn::fraction(rho.into(), r)))
        .collect();
    let scale = puzzle
        .frame
        .region
        .iter()
        .map(|v| v.amax())
        .fold(1.0, f64::max);
    for a in 0..copies.len() {
        for b in (a + 1)..copies.len() {
            if polygon::overlap(&copies[a], &copies[b], 1e-9 * scale) {
                return Err(Error::Precondition(format!(
                    "rotated frame copies {a} and {b} overlap; translate the frame away from the origin"
                )));
            }
        }
    }
    let turns: Vec<Turn> = (0..r).map(|rho| Turn::fraction(rho.into(), r)).collect();
    let frame = Frame {
        region: puzzle.frame.region.clone(),
        extra_regions: copies[1..].to_vec(),
        edges: turns
            .iter()
            .flat_map(|&phi| puzzle.frame.edges.iter().map(move |e| e.rotated(phi)))
            .collect(),
    };
    let pieces = puzzle
        .pieces
        .iter()
        .map(|p| Piece {
            id: p.id,
            vertices: p.vertices.clone(),
            edges: turns
                .iter()
                .flat_map(|&phi| p.edges.iter().map(move |e| e.rotated(phi)))
                .collect(),
        })
        .collect();
    let augmented = Puzzle {
        frame,
        pieces,
        rotation_order: 1,
        augmented_copies: Some(r),
        preset_locations: puzzle
            .preset_locations
            .as_ref()
            .map(|s| augmented_presets(s, r)),
    };
    augmented.check()?;
    Ok(augmented)
}

/// Candidate locations of the augmented puzzle: location `c·r + ρ` is
/// `R(−ρ/r) s_c`, the union translation that puts the copy rotated by `ρ/r`
/// at `s_c`.
pub fn augmented_presets(presets: &[Vec2], r: u32) -> Vec<Vec2> {
    presets
        .iter()
        .flat_map(|s| (0..r).map(move |rho| (-Turn::fraction(rho.into(), r)).rotate(s)))
        .collect()
}

/// Maps a placement with orientations to union translations `t = R(−φ) t̂`.
pub fn augment_placement(placement: &Placement) -> Placement {
    Placement::translation_only(
        placement
            .translations
            .iter()
            .zip(&placement.orientations)
            .map(|(t, &phi)| (-phi).rotate(t))
            .collect(),
    )
}

/// The rotation `φ = ρ/r` whose copy `R(φ) t` lies in the original frame region.
pub fn recover_orientation(t: &Vec2, frame: &Frame, r: u32) -> Result<(Turn, Vec2)> {
    let scale = frame.region.iter().map(|v| v.amax()).fold(1.0, f64::max);
    for rho in 0..r.max(1) {
        let phi = Turn::fraction(rho.into(), r.max(1));
        let hat = phi.rotate(t);
        if polygon::contains_point(&frame.region, &hat, 1e-9 * scale) {
            return Ok((phi, hat));
        }
    }
    Err(Error::Recovery(format!(
        "({}, {}) lies in no rotated copy of the frame",
        t.x, t.y
    )))
}

/// Applies [`recover_orientation`] to every union translation.
pub fn recover_placement(placement: &Placement, frame: &Frame, r: u32) -> Result<Placement> {
    let mut translations = Vec::with_capacity(placement.len());
    let mut orientations = Vec::with_capacity(placement.len());
    for t in &placement.translations {
        let (phi, hat) = recover_orientation(t, frame, r)?;
        translations.push(hat);
        orientations.push(phi);
    }
    Ok(Placement {
        translations,
        orientations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_grid_puzzle, translate_puzzle};

    #[test]
    fn order_one_is_identity() {
        let (p, _) = generate_grid_puzzle(2, 2, 3, 0).unwrap();
        assert_eq!(augment_rotations(&p, 1).unwrap(), p);
    }

    #[test]
    fn single_cell_counts() {
        let (p, planted) = generate_grid_puzzle(1, 1, 3, 0).unwrap();
        let (p, _) = translate_puzzle(&p, &planted, &Vec2::new(9.5, 9.5));
        let a = augment_rotations(&p, 4).unwrap();
        assert_eq!(a.frame.edges.len(), 16);
        assert_eq!(a.frame.extra_regions.len(), 3);
        assert_eq!(a.pieces[0].edges.len(), 16);
    }

    #[test]
    fn overlapping_copies_are_rejected() {
        let (p, _) = generate_grid_puzzle(2, 2, 3, 0).unwrap();
        let (p, _) = translate_puzzle(
            &p,
            &Placement::translation_only(vec![Vec2::zeros(); 4]),
            &Vec2::new(-1.0, -1.0),
        );
        let err = augment_rotations(&p, 4).unwrap_err();
        assert!(err.to_string().contains("translate the frame"));
    }

    #[test]
    fn recovery_cases() {
        let (p, planted) = generate_grid_puzzle(1, 1, 3, 0).unwrap();
        let (p, _) = translate_puzzle(&p, &planted, &Vec2::new(1.0, 1.0));
        let inside = Vec2::new(1.3, 1.7);
        assert_eq!(
            recover_orientation(&inside, &p.frame, 4).unwrap(),
            (Turn::ZERO, inside)
        );
        let quarter = Turn::new(1, 4).unwrap();
        let (phi, hat) = recover_orientation(&(-quarter).rotate(&inside), &p.frame, 4).unwrap();
        assert_eq!(phi, quarter);
        assert!((hat - inside).norm() < 1e-15);
        assert!(recover_orientation(&Vec2::new(5.0, 5.0), &p.frame, 4).is_err());
    }
}
