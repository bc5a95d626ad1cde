use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis size overflow for nvars={nvars}, degree={degree}")]
    Sizing { nvars: usize, degree: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("Gauss-Legendre Newton iteration did not converge for node {index} of order {order}")]
    QuadratureConvergence { order: usize, index: usize },

    #[error("function value is not finite at node {node:?}")]
    NonFinite { node: Vec<f64> },

    #[error("mass check failed: (0,0) moment {got} vs expected mass {expected}; increase quad_order")]
    MassCheck { expected: f64, got: f64 },

    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },

    #[error("point {point:?} lies outside the domain box")]
    OutsideDomain { point: Vec<f64> },

    #[error("symmetric eigendecomposition failed")]
    Eigen,

    #[error("y-search requires a regularized evaluator")]
    NotRegularized,

    #[error("mask excludes every grid point")]
    EmptyMask,

    #[error("rate fit needs at least 3 usable rows, found {0}")]
    RateFit(usize),

    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed CSV at row {row}: {reason}")]
    Csv { row: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
