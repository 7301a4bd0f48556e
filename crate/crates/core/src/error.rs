use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or argument is outside the domain of the operation.
    #[error("domain error in `{param}`: {reason}")]
    Domain { param: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid too large for dense factorization: {nodes} nodes (limit {limit})")]
    GridTooLarge { nodes: usize, limit: usize },

    #[error("covariance matrix is not positive semidefinite (jitter up to {jitter:e} failed)")]
    NotPositiveDefinite { jitter: f64 },

    /// Strict embedding found negative eigenvalues at every padding tried.
    #[error("circulant embedding is not admissible: relative negative mass {negative_mass:e}")]
    Embedding { negative_mass: f64 },

    /// Clipped embedding removed more spectral mass than the policy tolerates.
    #[error("clipped negative mass {clipped_mass:e} exceeds threshold {threshold:e}")]
    EmbeddingAccuracy { clipped_mass: f64, threshold: f64 },

    #[error("window of half-extent {required} exceeds simulated region {available}")]
    Coverage { required: f64, available: f64 },

    #[error("window at mu = {mu} contains no grid nodes")]
    DegenerateWindow { mu: f64 },

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("replicate {replicate} failed: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            param,
            reason: reason.into(),
        }
    }

    /// Runtime failures raised while generating or integrating fields, as opposed
    /// to invalid parameters.
    pub fn is_runtime(&self) -> bool {
        match self {
            Error::GridTooLarge { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::Embedding { .. }
            | Error::EmbeddingAccuracy { .. }
            | Error::Coverage { .. }
            | Error::DegenerateWindow { .. }
            | Error::DegenerateSample(_)
            | Error::Io(_)
            | Error::Json(_) => true,
            Error::Replicate { .. } => true,
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
