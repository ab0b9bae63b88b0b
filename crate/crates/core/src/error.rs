use edgematch_kernels::KernelError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid puzzle: {0}")]
    InvalidPuzzle(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unsolvable puzzle: {0}")]
    Unsolvable(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("representation excludes all placements: {0}")]
    Infeasible(String),
    #[error("location extraction failed: {message}")]
    Extraction {
        message: String,
        rank_ratios: Vec<f64>,
    },
    #[error("orientation recovery failed: {0}")]
    Recovery(String),
    #[error("search space too large: {0}")]
    SearchTooLarge(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
