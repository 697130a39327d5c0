use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid frequency: real part {s1} must be positive")]
    InvalidFrequency { s1: f64 },
    #[error("degenerate constant: {0}")]
    DegenerateConstant(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("kernel horizon {horizon} exceeded at step {step}")]
    KernelTooShort { horizon: usize, step: usize },
    #[error("CFL violation: dt = {dt} exceeds the stability limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("support violation: {0}")]
    Support(String),
    #[error("current must vanish at t = 0: J(., 0) has max magnitude {0}")]
    InitialCurrent(f64),
    #[error("singular factorization at row {row}")]
    Singular { row: usize },
    #[error("non-finite value in {field} at step {step}")]
    NonFinite { field: &'static str, step: usize },
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
    #[error("io: {0}")]
    Io(String),
    #[error("at step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
