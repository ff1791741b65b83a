use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("vector is not horizontal (residual {0:e})")]
    NotHorizontal(f64),
    #[error("base points lie on different Hopf fibres")]
    DifferentFibres,
    #[error("inputs are not orthonormal (Gram residual {0:e})")]
    NotOrthonormal(f64),
    #[error("degenerate chart point: {0}")]
    DegeneratePoint(String),
    #[error("structural failure: {0}")]
    Structural(String),
    #[error("finite-difference instability: estimates disagree by {0:e}")]
    FdInstability(f64),
    #[error("horizontality lost under the map (residual {0:e})")]
    NotFibrePreserving(f64),
}

pub type Result<T> = std::result::Result<T, GeomError>;
