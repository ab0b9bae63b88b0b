use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
    NumericalFailure,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::NumericalFailure => "numerical_failure",
        };
        f.write_str(s)
    }
}

/// Relative residuals of a returned iterate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport<P> {
    pub status: SolveStatus,
    pub objective: f64,
    pub primal: P,
    pub residuals: Residuals,
    pub iterations: usize,
    /// Human readable diagnostic for non-optimal exits.
    pub message: Option<String>,
}

impl<P> SolveReport<P> {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
