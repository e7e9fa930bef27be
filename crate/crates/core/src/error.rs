use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("hurst parameter {0} is outside (0, 1)")]
    HurstOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{method} cannot simulate {process}")]
    InvalidCombination { process: String, method: String },

    #[error("batches are not comparable: {0}")]
    Mismatch(String),

    #[error("matrix is not positive definite at pivot {pivot} (after jitter {jitter:e})")]
    NotPositiveDefinite { pivot: usize, jitter: f64 },

    #[error("circulant embedding of size {m} is indefinite: most negative eigenvalue {min_eigenvalue:e}")]
    EmbeddingFailure { m: usize, min_eigenvalue: f64 },

    #[error("quadrature did not converge: error estimate {achieved:e} exceeds {target:e}")]
    Quadrature { achieved: f64, target: f64 },
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. } | Error::EmbeddingFailure { .. } | Error::Quadrature { .. }
        )
    }
}
