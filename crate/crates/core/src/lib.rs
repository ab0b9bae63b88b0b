//! Framed edge-matching puzzles: geometry, algebraic encodings, convex
//! relaxations and an exhaustive oracle.

pub mod algebra;
pub mod error;
pub mod generate;
pub mod geometry;
pub mod io;
pub mod normalize;
pub mod oracle;
pub mod polygon;
pub mod relax_lp;
pub mod relax_sdp;
pub mod turn;

pub use error::{Error, Result};
pub use geometry::{
    canonical_edge_type, validate_solution, EdgeElement, Frame, MismatchReason, Piece, Placement,
    Puzzle, TypeKey, UnmatchedEdge, ValidityReport, DEFAULT_VALIDITY_TOL,
};
pub use normalize::{normalize_coordinates, AffineTransform};
pub use polygon::Vec2;
pub use turn::Turn;
