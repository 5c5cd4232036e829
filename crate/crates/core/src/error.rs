use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter vector has length {got}, expected {expected} for orders n={n}, m={m}")]
    LengthMismatch {
        got: usize,
        expected: usize,
        n: usize,
        m: usize,
    },
    #[error("improper model: numerator degree {m} exceeds denominator degree {n}")]
    Improper { n: usize, m: usize },
    #[error("leading denominator coefficient is zero")]
    ZeroLeadingCoefficient,
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("degenerate model: denominator constant term {0:e} cannot be normalized to 1")]
    DegenerateModel(f64),
    #[error("pole on the imaginary axis at {0}; cannot stabilize by reflection")]
    PoleOnImaginaryAxis(num_complex::Complex64),
    #[error("transfer function has a pole at j{0}")]
    PoleOnAxis(f64),
    #[error("model is not asymptotically stable")]
    UnstableModel,
    #[error("singular normal matrix (condition estimate {condition:e})")]
    SingularNormalMatrix { condition: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
