use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid signature ({r}, {s})")]
    InvalidSignature { r: usize, s: usize },

    #[error("signature mismatch: expected ({expected_r}, {expected_s}), found ({r}, {s})")]
    SignatureMismatch {
        expected_r: usize,
        expected_s: usize,
        r: usize,
        s: usize,
    },

    #[error("degenerate bilinear form: |eigenvalue| {min_abs:e} below floor {floor:e}")]
    Degenerate { min_abs: f64, floor: f64 },

    #[error("metrics are not joinable: {0}")]
    NotJoinable(String),

    #[error("matrix is not special pseudo-orthogonal (residual {residual:e}, det {det})")]
    NotPseudoOrthogonal { residual: f64, det: f64 },

    #[error("matrix logarithm failed: {0}")]
    Logarithm(String),

    #[error("spin structure twist mismatch between fields")]
    TwistMismatch,

    #[error("invalid twist entry {0}, expected 0 or 0.5")]
    InvalidTwist(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operator requires Riemannian signature, got ({r}, {s})")]
    NotRiemannian { r: usize, s: usize },

    #[error("dense operator of dimension {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("principal symbol fit did not converge: {0}")]
    SymbolFit(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("evolution aborted at step {step}: {reason}")]
    Evolution { step: usize, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("expression parse error at offset {offset}: {message}")]
    Expr { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
