use thiserror::Error;

/// Errors produced by the simulator.
///
/// Variants are grouped so that front ends can map them onto distinct exit
/// statuses: parameter/phase refusals, numerical validation failures and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "phase mismatch: {context} requires lambda {relation} lambda_c \
         (lambda = {lambda}, lambda_c = {lambda_c}, mu = {mu})"
    )]
    PhaseMismatch {
        context: &'static str,
        relation: &'static str,
        lambda: f64,
        lambda_c: f64,
        mu: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("slot {slot} out of range for a basis with {arity} factors")]
    SlotOutOfRange { slot: usize, arity: usize },

    #[error("dimension {dim} exceeds the configured budget of {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    #[error("dimension {dim} exceeds the densification threshold {threshold}")]
    TooLargeForDense { dim: usize, threshold: usize },

    #[error("operator is not hermitian (max |H - H^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("lanczos did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("krylov step size underflow at t = {time} (step {step:e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("corrupted state: {0}")]
    CorruptedState(String),

    #[error("cutoff validation failed: {0}")]
    CutoffValidation(String),

    #[error("phase-space domain violated at t = {time}: H1 = {h1} must stay below 2J = {two_j}")]
    DomainViolation { time: f64, h1: f64, two_j: f64 },

    #[error("energy drift {drift:e} exceeds bound {bound:e}")]
    EnergyDrift { drift: f64, bound: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
