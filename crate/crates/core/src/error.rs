use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spectral density leaves [0, 1]: phi({t}) = {value}")]
    RangeViolation { t: f64, value: f64 },

    #[error("spectral density is not even: phi({t}) = {left}, phi(-{t}) = {right}")]
    NotEven { t: f64, left: f64, right: f64 },

    #[error("spectral density is not finite at t = {t}")]
    NonFiniteDensity { t: f64 },

    #[error("moment integral of order {order} does not converge")]
    DivergentMoment { order: u32 },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("point tuple has coincident points (gap {gap:e})")]
    DegenerateTuple { gap: f64 },

    #[error("{what} = {size} exceeds the enumeration limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("z = {z} lies in {count} of the two conditioning windows")]
    PartitionAmbiguity { z: f64, count: usize },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("quadrature order {order} is below the minimum {min}")]
    OrderTooSmall { order: usize, min: usize },

    #[error("operator eigenvalue {value} lies outside [0, 1]")]
    EigOutOfRange { value: f64 },

    #[error("conditioning block is singular: rho_2({x}, {y}) = {det:e}")]
    SingularBlock { x: f64, y: f64, det: f64 },

    #[error("series truncation bound {bound:e} exceeds tolerance for value {value:e}")]
    TruncationNotConverged { bound: f64, value: f64 },

    #[error("conditional density mass underflow at step {step} of {total}")]
    NumericalUnderflow { step: usize, total: usize },

    #[error("{needed} trials required, got {got}")]
    InsufficientTrials { needed: usize, got: usize },

    #[error("configuration has {0} points, at least 2 required")]
    TooFewPoints(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("trial {trial_id} failed: {source}")]
    Trial {
        trial_id: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("self-check `{name}` failed: {source}")]
    Check {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
