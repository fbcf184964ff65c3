use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate system label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown system label `{0}`")]
    UnknownLabel(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dimension mismatch on label `{label}`: {left} vs {right}")]
    DimMismatch {
        label: String,
        left: usize,
        right: usize,
    },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid quantum channel: {0}")]
    InvalidChannel(String),

    #[error("invalid Choi operator: {0}")]
    InvalidChoi(String),

    #[error("invalid isometry: {0}")]
    InvalidIsometry(String),

    #[error("invalid tester: {0}")]
    InvalidTester(String),

    #[error("Schur transform size cap exceeded: n={n}, d^n={dim} (caps: n<={max_n}, d^n<={max_dim})")]
    SchurCap {
        n: usize,
        dim: usize,
        max_n: usize,
        max_dim: usize,
    },

    #[error("inconsistent Schur layout: {0}")]
    SchurLayout(String),

    #[error("basis-convention fault: reconstruction residual {residual:.3e} exceeds {tol:.1e}")]
    ConventionFault { residual: f64, tol: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue {0:.3e}")]
    NotPsd(f64),

    #[error("degenerate phase in alignment: |a+ib| = {0:.3e}")]
    DegeneratePhase(f64),

    #[error("linear algebra backend error: {0}")]
    Linalg(String),

    #[error("channel JSON: {0}")]
    ChannelJson(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
