use thiserror::Error;

/// Errors produced by graph construction, spectral and sampling operations,
/// and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("size overflow: {0}")]
    Overflow(String),

    #[error("shift matrix is not symmetric")]
    NotSymmetric,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no sample set satisfying the rank condition found: {0}")]
    Infeasible(String),

    #[error("problem too large for this strategy: {0}")]
    TooLarge(String),

    #[error("sample set is rank deficient for the support (sigma_min = {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("sampled shift needs critical sampling ({samples} samples for bandwidth {bandwidth})")]
    NotSquare { samples: usize, bandwidth: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("empty frequency support")]
    EmptySupport,

    #[error("bad parameter: {0}")]
    BadParam(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("signal is missing node {0}")]
    MissingNode(usize),

    #[error("signal lists node {0} more than once")]
    DuplicateNode(usize),

    #[error("factor {index}: {source}")]
    Factor {
        /// 1-based factor position.
        index: usize,
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
    /// Wraps an error with the (0-based) factor position it came from.
    pub fn in_factor(self, factor: usize) -> Self {
        Error::Factor {
            index: factor + 1,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through factor annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Factor { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
