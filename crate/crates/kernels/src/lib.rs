//! Self-contained dense optimization kernels.
//!
//! * [`lp`]: two-phase primal simplex on a dense tableau, with warm restarts
//!   over a fixed feasible region.
//! * [`sdp`]: primal-dual interior point method for block-diagonal
//!   semidefinite programs (Nesterov-Todd scaling, Mehrotra corrector).
//! * [`eig`]: cyclic Jacobi eigendecomposition of dense symmetric matrices.
//! * [`assignment`]: maximum-weight rectangular assignment (Hungarian method).
//!
//! Every solver is single-threaded per instance and keeps no global state.

pub mod assignment;
pub mod dump;
pub mod eig;
pub mod lp;
pub mod report;
pub mod sdp;

pub use assignment::max_assignment;
pub use eig::{sym_eig, SymEigen};
pub use lp::{solve_lp, LinearProgram, LpSolution, Simplex};
pub use report::{Residuals, SolveReport, SolveStatus};
pub use sdp::{
    solve_block_sdp, solve_block_sdp_with, BlockSdp, SdpConstraint, SdpOptions, SdpSolution,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite input data: {0}")]
    NonFinite(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, KernelError>;
