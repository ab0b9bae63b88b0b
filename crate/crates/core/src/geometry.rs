//! Pieces, frames, placements and the pairing rule that defines a solution.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::polygon::{self, Vec2};
use crate::turn::{Turn, DEFAULT_RESOLUTION};

/// Relative tolerance used for structural checks on input geometry.
pub const GEOMETRY_TOL: f64 = 1e-9;

/// Default pairing tolerance of [`validate_solution`], in edge-length units.
pub const DEFAULT_VALIDITY_TOL: f64 = 1e-6;

/// A straight boundary segment with a color.
///
/// `orientation` is the outward normal of the segment traversed from
/// `endpoints[0]` to `endpoints[1]` along a counter-clockwise boundary. Frame
/// edges are stored with reversed endpoints so their orientation is the
/// inward normal of the frame region.
///
/// `link` is zero for ordinary edges. Edges of a rotation-augmented piece
/// carry the rotation of the puzzle copy they belong to: the placed midpoint
/// is `link · t + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeElement {
    pub endpoints: [Vec2; 2],
    pub offset: Vec2,
    pub color: u32,
    pub orientation: Turn,
    pub link: Turn,
}

impl EdgeElement {
    /// Edge from `a` to `b` with orientation derived from the direction.
    pub fn new(a: Vec2, b: Vec2, color: u32) -> Result<Self> {
        let d = b - a;
        let orientation = Turn::from_direction(&Vec2::new(d.y, -d.x), DEFAULT_RESOLUTION)?;
        Ok(Self {
            endpoints: [a, b],
            offset: (a + b) * 0.5,
            color,
            orientation,
            link: Turn::ZERO,
        })
    }

    pub fn length(&self) -> f64 {
        (self.endpoints[1] - self.endpoints[0]).norm()
    }

    /// Rotation about the origin by `phi`, recorded in `link`.
    pub fn rotated(&self, phi: Turn) -> Self {
        Self {
            endpoints: [
                phi.rotate(&self.endpoints[0]),
                phi.rotate(&self.endpoints[1]),
            ],
            offset: phi.rotate(&self.offset),
            color: self.color,
            orientation: self.orientation + phi,
            link: self.link + phi,
        }
    }

    /// Rigid rotation of the edge geometry, `link` unchanged.
    pub fn turned(&self, phi: Turn) -> Self {
        Self {
            link: self.link,
            ..self.rotated(phi)
        }
    }

    pub fn shifted(&self, delta: &Vec2) -> Self {
        Self {
            endpoints: [self.endpoints[0] + delta, self.endpoints[1] + delta],
            offset: self.offset + delta,
            ..self.clone()
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            endpoints: [self.endpoints[0] * s, self.endpoints[1] * s],
            offset: self.offset * s,
            ..self.clone()
        }
    }

    /// Checks the midpoint and orientation invariants.
    pub fn check(&self) -> Result<()> {
        let [a, b] = self.endpoints;
        let scale = 1.0 + a.amax().max(b.amax());
        if (self.offset - (a + b) * 0.5).amax() > GEOMETRY_TOL * scale {
            return Err(Error::InvalidPuzzle(
                "edge offset is not the midpoint of its endpoints".into(),
            ));
        }
        let d = b - a;
        let normal = Turn::from_direction(&Vec2::new(d.y, -d.x), DEFAULT_RESOLUTION)?;
        if normal != self.orientation {
            return Err(Error::InvalidPuzzle(format!(
                "edge orientation {:?} disagrees with its endpoints (expected {:?})",
                self.orientation, normal
            )));
        }
        if DEFAULT_RESOLUTION % self.orientation.denom() != 0 {
            return Err(Error::InvalidPuzzle(format!(
                "orientation {:?} is finer than 1/{DEFAULT_RESOLUTION} turn",
                self.orientation
            )));
        }
        Ok(())
    }
}

/// Canonical representative of the pair `{(c, θ), (c, θ + ½)}`: `angle ∈ [0, ½)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeKey {
    pub color: u32,
    pub angle: Turn,
}

/// Canonical type and sign `±1` of an edge (the signed indicator).
pub fn canonical_edge_type(edge: &EdgeElement) -> (TypeKey, i8) {
    let half = Turn::half();
    if edge.orientation < half {
        (
            TypeKey {
                color: edge.color,
                angle: edge.orientation,
            },
            1,
        )
    } else {
        (
            TypeKey {
                color: edge.color,
                angle: edge.orientation - half,
            },
            -1,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub id: u32,
    /// Counter-clockwise polygon relative to the piece center.
    pub vertices: Vec<Vec2>,
    pub edges: Vec<EdgeElement>,
}

impl Piece {
    /// Builds a piece from absolute counter-clockwise vertices, one edge per
    /// side with `colors[k]` on the side from vertex `k` to `k + 1`. Returns
    /// the piece and its center (vertex centroid) in absolute coordinates.
    pub fn from_polygon(id: u32, vertices: &[Vec2], colors: &[u32]) -> Result<(Self, Vec2)> {
        if vertices.len() != colors.len() {
            return Err(Error::InvalidPuzzle(format!(
                "piece {id}: {} vertices but {} edge colors",
                vertices.len(),
                colors.len()
            )));
        }
        let center = polygon::vertex_centroid(vertices);
        let rel: Vec<Vec2> = vertices.iter().map(|v| v - center).collect();
        let n = rel.len();
        let edges = (0..n)
            .map(|k| EdgeElement::new(rel[k], rel[(k + 1) % n], colors[k]))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::InvalidPuzzle(format!("piece {id}: {e}")))?;
        let piece = Piece {
            id,
            vertices: rel,
            edges,
        };
        piece.check()?;
        Ok((piece, center))
    }

    pub fn area(&self) -> f64 {
        polygon::signed_area(&self.vertices)
    }

    /// Edges of the unrotated copy (all edges unless rotation-augmented).
    pub fn base_edges(&self) -> impl Iterator<Item = &EdgeElement> {
        self.edges.iter().filter(|e| e.link == Turn::ZERO)
    }

    /// Verifies simplicity, orientation, centering and that the base edges
    /// chain around the boundary.
    pub fn check(&self) -> Result<()> {
        let id = self.id;
        let fail = |msg: String| Error::InvalidPuzzle(format!("piece {id}: {msg}"));
        if id == 0 {
            return Err(fail("ids start at 1 (0 denotes the frame)".into()));
        }
        let scale = 1.0 + self.vertices.iter().map(|v| v.amax()).fold(0.0, f64::max);
        let tol = GEOMETRY_TOL * scale;
        if !polygon::is_simple(&self.vertices, tol) {
            return Err(fail("polygon is not simple".into()));
        }
        if self.area() <= 0.0 {
            return Err(fail("polygon is not counter-clockwise".into()));
        }
        if polygon::vertex_centroid(&self.vertices).amax() > tol {
            return Err(fail("vertex centroid is not at the origin".into()));
        }
        let base: Vec<&EdgeElement> = self.base_edges().collect();
        if base.is_empty() {
            return Err(fail("no edges".into()));
        }
        for e in &base {
            e.check().map_err(|err| fail(err.to_string()))?;
            for p in &e.endpoints {
                if !self.vertices.iter().any(|v| (v - p).amax() <= tol) {
                    return Err(fail("edge endpoint is not a vertex".into()));
                }
            }
        }
        for k in 0..base.len() {
            let next = base[(k + 1) % base.len()];
            if (base[k].endpoints[1] - next.endpoints[0]).amax() > tol {
                return Err(fail(format!(
                    "edges do not chain (edge {k} ends where edge {} does not start)",
                    (k + 1) % base.len()
                )));
            }
        }
        let perimeter: f64 = (0..self.vertices.len())
            .map(|k| (self.vertices[(k + 1) % self.vertices.len()] - self.vertices[k]).norm())
            .sum();
        let covered: f64 = base.iter().map(|e| e.length()).sum();
        if (perimeter - covered).abs() > tol * self.vertices.len() as f64 {
            return Err(fail("edges do not cover the boundary exactly once".into()));
        }
        Ok(())
    }

    /// Rigid rotation about the piece center.
    pub fn turned(&self, phi: Turn) -> Self {
        Piece {
            id: self.id,
            vertices: self.vertices.iter().map(|v| phi.rotate(v)).collect(),
            edges: self.edges.iter().map(|e| e.turned(phi)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// Counter-clockwise region, absolute coordinates.
    pub region: Vec<Vec2>,
    /// Rotated copies of `region` in rotation-augmented puzzles.
    pub extra_regions: Vec<Vec<Vec2>>,
    /// Absolute edges with inward-normal orientations.
    pub edges: Vec<EdgeElement>,
}

impl Frame {
    /// Frame over a counter-clockwise region, one edge per side colored by `colors`.
    pub fn from_region(region: Vec<Vec2>, colors: &[u32]) -> Result<Self> {
        let n = region.len();
        if colors.len() != n {
            return Err(Error::InvalidPuzzle(format!(
                "frame: {n} sides but {} colors",
                colors.len()
            )));
        }
        let edges = (0..n)
            .map(|k| EdgeElement::new(region[(k + 1) % n], region[k], colors[k]))
            .collect::<Result<Vec<_>>>()?;
        let frame = Frame {
            region,
            extra_regions: Vec::new(),
            edges,
        };
        frame.check()?;
        Ok(frame)
    }

    pub fn regions(&self) -> impl Iterator<Item = &Vec<Vec2>> {
        std::iter::once(&self.region).chain(self.extra_regions.iter())
    }

    pub fn area(&self) -> f64 {
        self.regions().map(|r| polygon::signed_area(r)).sum()
    }

    pub fn check(&self) -> Result<()> {
        let scale = 1.0 + self.region.iter().map(|v| v.amax()).fold(0.0, f64::max);
        for r in self.regions() {
            if !polygon::is_simple(r, GEOMETRY_TOL * scale) {
                return Err(Error::InvalidPuzzle("frame region is not simple".into()));
            }
            if polygon::signed_area(r) <= 0.0 {
                return Err(Error::InvalidPuzzle(
                    "frame region is not counter-clockwise".into(),
                ));
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            e.check()
                .map_err(|err| Error::InvalidPuzzle(format!("frame edge {k}: {err}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Puzzle {
    pub frame: Frame,
    pub pieces: Vec<Piece>,
    /// Pieces may be rotated by multiples of `1/rotation_order` turn.
    pub rotation_order: u32,
    /// Number of rigidly linked rotated copies when this puzzle was produced
    /// by rotation augmentation.
    pub augmented_copies: Option<u32>,
    pub preset_locations: Option<Vec<Vec2>>,
}

impl Puzzle {
    pub fn new(
        frame: Frame,
        pieces: Vec<Piece>,
        rotation_order: u32,
        preset_locations: Option<Vec<Vec2>>,
    ) -> Result<Self> {
        let p = Puzzle {
            frame,
            pieces,
            rotation_order,
            augmented_copies: None,
            preset_locations,
        };
        p.check()?;
        Ok(p)
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    /// Structural invariants: valid pieces and frame, distinct ids, area balance, presets.
    pub fn check(&self) -> Result<()> {
        if self.rotation_order == 0 {
            return Err(Error::InvalidPuzzle(
                "rotation_order must be at least 1".into(),
            ));
        }
        self.frame.check()?;
        let mut ids: Vec<u32> = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            p.check()?;
            if ids.contains(&p.id) {
                return Err(Error::InvalidPuzzle(format!(
                    "piece {}: duplicate id",
                    p.id
                )));
            }
            ids.push(p.id);
        }
        let copies = f64::from(self.augmented_copies.unwrap_or(1));
        let pieces_area: f64 = self.pieces.iter().map(|p| p.area()).sum::<f64>() * copies;
        let frame_area = self.frame.area();
        if !self.pieces.is_empty()
            && (pieces_area - frame_area).abs() > 1e-9 * frame_area.abs().max(1.0)
        {
            return Err(Error::InvalidPuzzle(format!(
                "total piece area {pieces_area} differs from frame area {frame_area}"
            )));
        }
        if let Some(s) = &self.preset_locations {
            let expected = self.pieces.len() * self.augmented_copies.unwrap_or(1) as usize;
            if s.len() != expected {
                return Err(Error::InvalidPuzzle(format!(
                    "{} preset locations for {expected} placements",
                    s.len()
                )));
            }
        }
        Ok(())
    }

    /// All edges as `(owner, edge)`, owner 0 being the frame and `i + 1` piece `i`.
    pub fn all_edges(&self) -> impl Iterator<Item = (usize, &EdgeElement)> {
        self.frame.edges.iter().map(|e| (0, e)).chain(
            self.pieces
                .iter()
                .enumerate()
                .flat_map(|(i, p)| p.edges.iter().map(move |e| (i + 1, e))),
        )
    }

    /// Per canonical type, the number of edges with sign `+1` and `−1`.
    pub fn type_counts(&self) -> BTreeMap<TypeKey, (usize, usize)> {
        let mut counts = BTreeMap::new();
        for (_, e) in self.all_edges() {
            let (key, sign) = canonical_edge_type(e);
            let entry = counts.entry(key).or_insert((0, 0));
            if sign > 0 {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
        counts
    }

    /// Every `(c, θ)` count equals the `(c, θ + ½)` count.
    pub fn is_balanced(&self) -> bool {
        self.type_counts().values().all(|(p, m)| p == m)
    }

    pub fn check_balanced(&self) -> Result<()> {
        for (key, (p, m)) in self.type_counts() {
            if p != m {
                return Err(Error::Unsolvable(format!(
                    "color {} at {:?}: {p} edges face the opposite {m} edges",
                    key.color, key.angle
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub translations: Vec<Vec2>,
    pub orientations: Vec<Turn>,
}

impl Placement {
    pub fn translation_only(translations: Vec<Vec2>) -> Self {
        let n = translations.len();
        Placement {
            translations,
            orientations: vec![Turn::ZERO; n],
        }
    }

    pub fn len(&self) -> usize {
        self.translations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.translations.is_empty()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.translations.len() != n || self.orientations.len() != n {
            return Err(Error::Dimension(format!(
                "placement has {} translations and {} orientations for {n} pieces",
                self.translations.len(),
                self.orientations.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MismatchReason {
    /// The nearest compatible partner is this far away.
    PositionMismatch {
        distance: f64,
    },
    ColorMismatch,
    OrientationMismatch,
    LengthMismatch,
    NoPartner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnmatchedEdge {
    /// 0 for the frame, otherwise the piece id.
    pub piece: u32,
    pub edge: usize,
    pub reason: MismatchReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub is_valid: bool,
    pub unmatched_edges: Vec<UnmatchedEdge>,
    pub max_position_error: f64,
}

/// An edge at its placed position.
#[derive(Debug, Clone)]
pub(crate) struct PlacedEdge {
    pub piece: u32,
    pub index: usize,
    pub mid: Vec2,
    pub length: f64,
    pub color: u32,
    pub orientation: Turn,
}

pub(crate) fn placed_edge(e: &EdgeElement, t: &Vec2, phi: Turn) -> (Vec2, Turn) {
    (
        e.link.rotate(t) + phi.rotate(&e.offset),
        e.orientation + phi,
    )
}

pub(crate) fn placed_edges(puzzle: &Puzzle, placement: &Placement) -> Vec<PlacedEdge> {
    let mut out = Vec::new();
    for (k, e) in puzzle.frame.edges.iter().enumerate() {
        out.push(PlacedEdge {
            piece: 0,
            index: k,
            mid: e.offset,
            length: e.length(),
            color: e.color,
            orientation: e.orientation,
        });
    }
    for (i, p) in puzzle.pieces.iter().enumerate() {
        let t = &placement.translations[i];
        let phi = placement.orientations[i];
        for (k, e) in p.edges.iter().enumerate() {
            let (mid, orientation) = placed_edge(e, t, phi);
            out.push(PlacedEdge {
                piece: p.id,
                index: k,
                mid,
                length: e.length(),
                color: e.color,
                orientation,
            });
        }
    }
    out
}

/// Checks that every placed edge pairs with exactly one other edge of the
/// same color, opposite orientation and equal length whose midpoint lies
/// within `tol`. Frame edges take part in the pairing.
pub fn validate_solution(
    puzzle: &Puzzle,
    placement: &Placement,
    tol: f64,
) -> Result<ValidityReport> {
    placement.check_len(puzzle.num_pieces())?;
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let edges = placed_edges(puzzle, placement);
    let compatible = |a: &PlacedEdge, b: &PlacedEdge| {
        a.color == b.color
            && a.orientation.opposite() == b.orientation
            && (a.length - b.length).abs() <= tol
    };

    let mut groups: BTreeMap<TypeKey, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (k, e) in edges.iter().enumerate() {
        let probe = EdgeElement {
            endpoints: [Vec2::zeros(); 2],
            offset: Vec2::zeros(),
            color: e.color,
            orientation: e.orientation,
            link: Turn::ZERO,
        };
        let (key, sign) = canonical_edge_type(&probe);
        let g = groups.entry(key).or_default();
        if sign > 0 {
            g.0.push(k);
        } else {
            g.1.push(k);
        }
    }

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    let mut nearest_compatible = vec![f64::INFINITY; edges.len()];
    for (plus, minus) in groups.values() {
        for &a in plus {
            for &b in minus {
                if compatible(&edges[a], &edges[b]) {
                    let d = (edges[a].mid - edges[b].mid).norm();
                    nearest_compatible[a] = nearest_compatible[a].min(d);
                    nearest_compatible[b] = nearest_compatible[b].min(d);
                    candidates.push((d, a, b));
                }
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut partner: Vec<Option<usize>> = vec![None; edges.len()];
    let mut max_err = 0.0f64;
    for &(d, a, b) in &candidates {
        if d > tol {
            break;
        }
        if partner[a].is_none() && partner[b].is_none() {
            partner[a] = Some(b);
            partner[b] = Some(a);
            max_err = max_err.max(d);
        }
    }

    let mut unmatched = Vec::new();
    for (k, e) in edges.iter().enumerate() {
        if partner[k].is_some() {
            continue;
        }
        let coincident = edges
            .iter()
            .enumerate()
            .filter(|(j, o)| *j != k && (o.mid - e.mid).norm() <= tol && partner[*j].is_none())
            .map(|(_, o)| o)
            .next();
        let reason = if let Some(o) = coincident {
            if o.color != e.color {
                MismatchReason::ColorMismatch
            } else if o.orientation != e.orientation.opposite() {
                MismatchReason::OrientationMismatch
            } else {
                MismatchReason::LengthMismatch
            }
        } else if nearest_compatible[k].is_finite() {
            max_err = max_err.max(nearest_compatible[k]);
            MismatchReason::PositionMismatch {
                distance: nearest_compatible[k],
            }
        } else {
            MismatchReason::NoPartner
        };
        unmatched.push(UnmatchedEdge {
            piece: e.piece,
            edge: e.index,
            reason,
        });
    }
    Ok(ValidityReport {
        is_valid: unmatched.is_empty() && max_err <= tol,
        unmatched_edges: unmatched,
        max_position_error: max_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_types() {
        let e = |color, num, den| EdgeElement {
            endpoints: [Vec2::zeros(); 2],
            offset: Vec2::zeros(),
            color,
            orientation: Turn::new(num, den).unwrap(),
            link: Turn::ZERO,
        };
        let zero = Turn::ZERO;
        assert_eq!(
            canonical_edge_type(&e(3, 0, 1)),
            (
                TypeKey {
                    color: 3,
                    angle: zero
                },
                1
            )
        );
        assert_eq!(
            canonical_edge_type(&e(3, 1, 2)),
            (
                TypeKey {
                    color: 3,
                    angle: zero
                },
                -1
            )
        );
        assert_ne!(
            canonical_edge_type(&e(5, 1, 4)).0,
            canonical_edge_type(&e(3, 1, 4)).0
        );
    }

    #[test]
    fn square_edges_point_outward() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let (piece, center) = Piece::from_polygon(1, &sq, &[0, 1, 2, 3]).unwrap();
        assert_eq!(center, Vec2::new(0.5, 0.5));
        let turns: Vec<Turn> = piece.edges.iter().map(|e| e.orientation).collect();
        assert_eq!(
            turns,
            vec![
                Turn::new(3, 4).unwrap(),
                Turn::ZERO,
                Turn::new(1, 4).unwrap(),
                Turn::half()
            ]
        );
        assert_eq!(piece.edges[1].offset, Vec2::new(0.5, 0.0));
    }

    #[test]
    fn frame_edges_point_inward() {
        let region = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let frame = Frame::from_region(region, &[0, 0, 0, 0]).unwrap();
        // bottom side faces up, right side faces left
        assert_eq!(frame.edges[0].orientation, Turn::new(1, 4).unwrap());
        assert_eq!(frame.edges[1].orientation, Turn::half());
    }

    #[test]
    fn clockwise_piece_is_rejected() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ];
        let err = Piece::from_polygon(4, &sq, &[0; 4]).unwrap_err();
        assert!(err.to_string().contains("piece 4"));
    }
}
