use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("polar iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    PolarNoConvergence { iterations: usize, residual: f64 },

    #[error("eigenvalue computation failed")]
    Eigen,

    #[error("sampling too coarse between t={t0} and t={t1}: angle step {step:.4} reaches pi/2, refine the path")]
    LiftGuard { t0: f64, t1: f64, step: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("degenerate endpoint: |det(Psi(T) - I)| = {det:.3e}; use rs")]
    Degenerate { det: f64 },

    #[error("non-isolated crossing: {0}")]
    NonIsolatedCrossing(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model failed validation: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("mean Euler characteristic undefined: {0}")]
    Undefined(String),

    #[error("generator data incomplete: {0}")]
    IncompleteData(String),

    #[error("surgery in dimension 3 is not supported by the cylindrical theory: it introduces a contractible Reeb orbit of degree 1 (pass --linearized)")]
    DimensionThree,

    #[error("surgery index k={k} is not subcritical for n={n}")]
    NotSubcritical { k: u32, n: u32 },

    #[error("stratification contains a cycle through '{0}'")]
    Cycle(String),

    #[error("data inconsistency: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
