//! Error types for the library, one enum per subsystem.

use thiserror::Error;

/// Errors from problem construction and evaluation.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("component index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("non-finite entry at index {index}")]
    NonFiniteEntry { index: usize },
    #[error("sparse indices must be strictly increasing (violated at index {index})")]
    NonAscendingIndices { index: usize },
    #[error("a problem needs at least one smooth component")]
    EmptyProblem,
    #[error("Lipschitz constant must be positive, got {value} for component {index}")]
    NonPositiveLipschitz { index: usize, value: f64 },
    #[error("strong convexity parameter must be nonnegative, got {0}")]
    NegativeConvexityParameter(f64),
    #[error(transparent)]
    Loss(#[from] LossError),
}

/// Errors from loss construction.
#[derive(Debug, Error)]
pub enum LossError {
    #[error("logistic labels must be +1 or -1, got {0}")]
    InvalidLabel(f64),
    #[error("regularization weight must be nonnegative, got {0}")]
    NegativeWeight(f64),
}

/// Errors from proximal operators.
#[derive(Debug, Error)]
pub enum ProxError {
    #[error("prox step must be nonnegative, got {0}")]
    NegativeStep(f64),
    #[error("regularization weight must be nonnegative, got {0}")]
    NegativeWeight(f64),
    #[error("epsilon shift must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("box bounds must satisfy lo <= hi componentwise (violated at coordinate {index})")]
    InvertedBounds { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Errors from sampling-distribution construction and queries.
#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("a sampling distribution needs at least one outcome")]
    Empty,
    #[error("weight {value} at index {index} is not positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("probability {value} at index {index} is below the {floor} floor")]
    ProbabilityTooSmall { index: usize, value: f64, floor: f64 },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("length mismatch: distribution has {n} outcomes, got {got} constants")]
    LengthMismatch { n: usize, got: usize },
}

/// Errors from solver runs.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("starting point is outside the effective domain of the regularizer")]
    StartOutsideDomain,
    #[error("iterate became non-finite at iteration {iteration}")]
    Diverged { iteration: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from the executable-analysis module.
#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("exact enumeration limited to n <= {limit} (problem has n = {n}); use the sampled estimator")]
    EnumerationTooLarge { n: usize, limit: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from dataset parsing, preprocessing and generation.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("dataset is empty")]
    Empty,
    #[error("dimension override {requested} is below the observed dimension {observed}")]
    DimensionTooSmall { requested: usize, observed: usize },
    #[error("label {0} is not covered by the binarization rule")]
    UnmappedLabel(f64),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
