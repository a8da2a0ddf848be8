use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected_rows}x{expected_cols}, found {found_rows}x{found_cols}")]
    DimensionMismatch {
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("logo needs {rows} rows but the host has only {order}")]
    LogoTooLarge { rows: usize, order: usize },
    #[error("logo block side {side} exceeds half the host order {order}")]
    SizeRestriction { side: usize, order: usize },
    #[error("series did not converge in {iterations} iterations (tail bound {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },
    #[error("rank deficient system: expected rank {expected}, found {found}")]
    RankDeficient { expected: usize, found: usize },
    #[error("alpha = 1 leaves the host unchanged; the watermark is unrecoverable")]
    Degenerate,
    #[error("no rows were embedded (r = 0)")]
    NothingEmbedded,
    #[error("tamper suspected: residual {residual:e} exceeds threshold {threshold:e}")]
    TamperSuspected { residual: f64, threshold: f64 },
    #[error("no exact-match region between watermarked and host image")]
    DetectionFailure,
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
    #[error("gallery is empty")]
    EmptyGallery,
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn mismatch(expected: (usize, usize), found: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected_rows: expected.0,
            expected_cols: expected.1,
            found_rows: found.0,
            found_cols: found.1,
        }
    }
}
