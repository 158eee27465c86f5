use thiserror::Error;

pub type Result<T> = std::result::Result<T, BmError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BmError {
    #[error("grid too short: {0}")]
    GridTooShort(String),
    #[error("negative log-weight {value} at r = {at}")]
    NegativeLogWeight { at: f64, value: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("tail not integrable: {0}")]
    TailNotIntegrable(String),
    #[error("symmetry tag required: {0}")]
    SymmetryViolated(String),
    #[error("weight is not admissible: {0}")]
    NotAdmissible(String),
    #[error("spectral leakage {ratio:.3e} exceeds ceiling {ceiling:.3e}")]
    LeakageTooHigh { ratio: f64, ceiling: f64 },
    #[error("could not detect the order of the zero at the origin (N_max = {0})")]
    ZeroDetectionFailed(usize),
    #[error("Bessel order {0} out of range (need > -1/2)")]
    OrderOutOfRange(f64),
    #[error("argument {0} below the Rayleigh threshold")]
    ArgumentTooSmall(f64),
    #[error("dimension {0} is not odd")]
    DimensionNotOdd(usize),
    #[error("dimension {0} is not even")]
    DimensionNotEven(usize),
    #[error("dimension {0} exceeds the supported ceiling")]
    DimensionTooLarge(usize),
    #[error("dimension {0} is invalid")]
    DimensionInvalid(usize),
    #[error("Sonine parameters (nu = {nu}, mu = {mu}) outside the validity window")]
    ParameterWindowViolated { nu: f64, mu: f64 },
    #[error("improper integral did not converge: {0}")]
    TailNotConverged(String),
    #[error("gamma = {gamma} must be < d + 1 = {limit}")]
    GammaOutOfRange { gamma: f64, limit: f64 },
    #[error("Hoelder chain diverged: {0}")]
    HolderChainDiverged(String),
    #[error("weight evaluation failed: {0}")]
    EvaluationFailed(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for BmError {
    fn from(e: std::io::Error) -> Self {
        BmError::Io(e.to_string())
    }
}
