//! Error type shared by every module of the crate.

use crate::orchard_wilson::ResidualReport;

/// Errors raised by filter construction, factorization and design.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A filter or prototype was given an empty tap vector.
    #[error("filter has no taps")]
    Empty,
    /// A tap was NaN or infinite.
    #[error("tap {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    /// Linear-phase prototypes must have an odd number of taps.
    #[error("linear-phase prototype must have odd length, got {0}")]
    EvenLength(usize),
    /// Prototype taps are not symmetric about the centre.
    #[error("prototype is not symmetric: taps {index} and its mirror differ by {difference:e}")]
    NotSymmetric { index: usize, difference: f64 },
    /// A parameter is outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Two operands have incompatible lengths.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    /// Cholesky met a non-positive pivot. `pivot` is the failing row when the
    /// failure came from the factorization itself.
    #[error("{}", not_pd_message(*.pivot, *.value))]
    NotPositiveDefinite { pivot: Option<usize>, value: f64 },
    /// The Levenberg–Marquardt iteration hit its limit above the residual floor.
    #[error("refinement did not converge: E_L2 = {:e} after {} iterations", .report.e_l2, .report.iterations)]
    NonConvergence {
        /// Best filter found.
        taps: Vec<f64>,
        /// Residual of `taps`.
        report: ResidualReport,
    },
    /// No lifting offset in the search range reached the residual target.
    #[error("design failed: {0}")]
    DesignFailure(String),
    /// A dense linear system could not be solved.
    #[error("singular system: {0}")]
    Singular(String),
    /// Malformed tap file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn not_pd_message(pivot: Option<usize>, value: f64) -> String {
    match pivot {
        Some(i) => format!(
            "matrix is not positive definite: pivot {i} is {value:e}; increase the lift above the waterfall point"
        ),
        None => format!(
            "matrix is not positive definite: spectral minimum {value:e} (zero on the unit circle); apply a minimal lift"
        ),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
