use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unstable AR model: {0}")]
    Unstable(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    /// A restricted covariance fell below the pivot floor.
    #[error("deterministic dependence: mutual information infinite (singular block {block})")]
    Singular { block: String },

    #[error("model is not jointly stationary (residual {residual:.3e} > {tol:.1e})")]
    NotJointlyStationary { residual: f64, tol: f64 },

    #[error("unsupported order {order}: the stationary solver handles order <= 1 only; use the finite-horizon certificate path for higher orders")]
    UnsupportedOrder { order: usize },

    #[error("zero-rate regime: distortion {distortion} >= stationary variance {variance}")]
    ZeroRateRegime { distortion: f64, variance: f64 },

    #[error("insufficient horizon: need at least {required} samples, have {available}")]
    InsufficientHorizon { required: usize, available: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-causal channel: {0}")]
    NonCausal(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bitstream: {0}")]
    Bitstream(String),

    #[error("config checksum mismatch (stream {stream:#018x}, decoder {decoder:#018x})")]
    ChecksumMismatch { stream: u64, decoder: u64 },

    #[error("truncated bitstream at sample {sample}")]
    Truncated { sample: usize },

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
