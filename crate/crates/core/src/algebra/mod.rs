//! Algebraic representations of a puzzle: exponential coefficients,
//! polynomial and linear systems, and rotation augmentation.

pub mod linear;
pub mod monomial;
pub mod orthogonal;
pub mod rotation;
pub mod system;

pub use linear::{linear_representation, LinearRepresentation};
pub use monomial::{edge_coefficient, exprel, Family, Mode, Monomial};
pub use orthogonal::orthonormal_features;
pub use rotation::{
    augment_placement, augment_rotations, augmented_presets, recover_orientation, recover_placement,
};
pub use system::{
    assemble_complete, assemble_system, completeness_degrees, residual, AssembleOptions,
    PolyEquation, PolySystem, DEFAULT_DEGREE_CAP,
};
