use nalgebra::DVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical blow-up, state diverged: {state:?}")]
    NumericalBlowup { state: Vec<f64> },

    #[error("robot and obstacle critical points coincide")]
    CoincidentPoints,

    #[error("gradient is ill-conditioned at distance {distance} (step {step})")]
    IllConditionedGradient { distance: f64, step: f64 },

    #[error("singular innovation covariance in Kalman update")]
    SingularInnovation,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn blowup(state: &DVector<f64>) -> Self {
        Error::NumericalBlowup {
            state: state.iter().copied().collect(),
        }
    }
}
