use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate kernel: diagonal k(x,x) = {diagonal} at {point:?}")]
    DegenerateKernel { point: Vec<f64>, diagonal: f64 },

    #[error("censored: {0}")]
    Censored(String),

    #[error("matrix is not Hermitian (defect {defect:e} against scale {scale:e})")]
    NotHermitian { defect: f64, scale: f64 },

    #[error("matrix of order {order} exceeds the size cap {cap}")]
    MatrixTooLarge { order: usize, cap: usize },

    #[error("singular system: lambda_min = {lambda_min:e} is not above the floor {floor:e}")]
    Singular { lambda_min: f64, floor: f64 },

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("jitter {jitter} violates separation (must be below half the minimal step {min_step})")]
    SeparationViolation { jitter: f64, min_step: f64 },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for errors caused by bad configuration or arguments.
    pub fn is_input(&self) -> bool {
        match self {
            Error::Input(_) | Error::DimensionMismatch { .. } | Error::SeparationViolation { .. } | Error::Json(_) => {
                true
            }
            Error::Stage { source, .. } => source.is_input(),
            _ => false,
        }
    }
}
