use thiserror::Error;

/// Input errors raised by the channel and link-metric routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("wavelength must be positive, got {0}")]
    NonPositiveWavelength(f64),
    #[error("at least one propagation path is required")]
    NoPaths,
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("at least one antenna is required")]
    NoAntennas,
    #[error("{quantity} must be non-negative, got {value}")]
    Negative { quantity: &'static str, value: f64 },
    #[error("BER target must lie in (0, 0.5), got {0}")]
    BerOutOfRange(f64),
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
}

/// Failures of the beamforming subproblem solver and the SCA loop.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    /// The secondary SNR floor cannot be met with the available power.
    #[error(
        "infeasible: best achievable secondary SNR {achievable:.6e} < required {required:.6e}"
    )]
    Infeasible { achievable: f64, required: f64 },
    #[error(
        "barrier method failed: {reason} (t = {barrier_weight:.3e}, newton steps = {newton_steps})"
    )]
    NumericalFailure {
        reason: String,
        barrier_weight: f64,
        newton_steps: usize,
    },
    #[error("SCA surrogate decreased from {previous} to {current} at iteration {iteration}")]
    NonMonotone {
        iteration: usize,
        previous: f64,
        current: f64,
    },
    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("zero matrix has no principal eigenpair")]
    ZeroMatrix,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from loading or validating a scenario configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// Errors surfaced by the Monte Carlo harness and output writers.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("sweep value list is empty")]
    EmptyValues,
    #[error("no schemes selected")]
    NoSchemes,
    #[error(
        "antenna array of {antennas} elements spans {span} m, exceeding the region side {side} m"
    )]
    ArrayTooLarge {
        antennas: usize,
        span: f64,
        side: f64,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{scheme}: {source}")]
    Solver {
        scheme: &'static str,
        #[source]
        source: SolverError,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
