use crate::numerics::Rational;

/// Errors produced by the bound computations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension n = {n} is too small (need n >= {min})")]
    DimensionTooSmall { n: u32, min: u32 },

    #[error("index k = {k} exceeds the degree cap p = {p}")]
    IndexExceedsCap { k: u32, p: u32 },

    #[error("coordinate {name} = {value} lies outside [-1, 1]")]
    CoordinateOutOfRange { name: &'static str, value: Rational },

    #[error("angle {0} must lie strictly between 0 and 1")]
    AngleOutOfRange(Rational),

    #[error("point {index} is not a unit vector (norm {norm})")]
    NotUnitVector { index: usize, norm: f64 },

    #[error("point {index} has dimension {got}, expected {expected}")]
    PointDimension { index: usize, got: usize, expected: usize },

    #[error("LP hypothesis violated: {condition} (witness {witness})")]
    Hypothesis { condition: String, witness: String },

    #[error("no even k in [2, {k_max}] has G_k(a) < 0")]
    NoQualifyingIndex { k_max: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("SDPA parse error at line {line}: {message}")]
    SdpaParse { line: usize, message: String },

    #[error("SDPA structure error in block {block}: {message}")]
    SdpaStructure { block: usize, message: String },

    #[error("malformed problem: {0}")]
    MalformedProblem(String),

    #[error("solver did not reach optimality for n = {n}, a = {angle}: status {status}")]
    Solver { n: u32, angle: Rational, status: String },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
