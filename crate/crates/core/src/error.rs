use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree {degree} exceeds the supported cap {cap}")]
    UnsupportedDegree { degree: usize, cap: usize },

    #[error("singular argument: {0}")]
    SingularArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("insufficient resolution: need exactness degree {needed}, grid has {available}")]
    Resolution { needed: usize, available: usize },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("system size {size} exceeds the dense cap {cap}")]
    Size { size: usize, cap: usize },

    #[error("operator is ill-conditioned near an interior eigenvalue (condition estimate {estimate:.3e})")]
    IllConditioned { estimate: f64 },

    #[error("singular matrix encountered at pivot {0}")]
    SingularMatrix(usize),

    #[error("parse error: {0}")]
    Parse(String),
}
