use thiserror::Error;

use crate::sampler::ExitSample;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("walk did not reach the boundary shell after {steps} steps")]
    MaxStepsExceeded { steps: u64 },
    #[error("path still inside at time {:.6}", .sample.time)]
    TimeBudgetExceeded { sample: ExitSample },
    #[error("no grid node falls inside the domain")]
    EmptyMask,
    #[error("{solver} did not converge in {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("rate increased from {prev} to {next} when the truncation height grew to {height}")]
    MonotonicityViolation { prev: f64, next: f64, height: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("only {usable} usable survival points in the fitting window (need 4)")]
    WindowTooNarrow { usable: usize },
    #[error("target distribution has no finite variance")]
    VarianceUndefined,
    #[error("{count} censored samples; exit times unavailable")]
    CensoredData { count: usize },
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::MaxStepsExceeded { .. } => "max_steps_exceeded",
            Error::TimeBudgetExceeded { .. } => "time_budget_exceeded",
            Error::EmptyMask => "empty_mask",
            Error::ConvergenceFailure { .. } => "convergence_failure",
            Error::MonotonicityViolation { .. } => "monotonicity_violation",
            Error::EmptyInput => "empty_input",
            Error::WindowTooNarrow { .. } => "window_too_narrow",
            Error::VarianceUndefined => "variance_undefined",
            Error::CensoredData { .. } => "censored_data",
            Error::Usage(_) => "usage",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
