use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("rank-1 downdate breaks positive definiteness at column {column}")]
    DowndateBreaksPositivity { column: usize },

    #[error("column {column} has zero variance")]
    DegenerateData { column: usize },

    #[error("S or D is numerically singular")]
    SingularState,

    #[error("maintained Cholesky factors drifted by {deviation:.3e} after sweep {sweep}")]
    FactorizationDrift { sweep: usize, deviation: f64 },

    #[error("S is infeasible: smallest eigenvalue of V is {lambda_min:.3e}")]
    InfeasibleS { lambda_min: f64 },

    #[error("coordinate descent did not converge in {iterations} passes")]
    NoConvergence { iterations: usize },

    #[error("every lambda in the grid gives an all-zero solution")]
    AllZeroPaths,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed or inconsistent inputs rather than
    /// numerical trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_) | Error::InvalidInput(_) | Error::Format(_) | Error::Io(_)
        )
    }
}
