use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series is empty")]
    EmptySeries,

    #[error("length mismatch: {ids} ids, {realized} realized values, {target} target values")]
    LengthMismatch {
        ids: usize,
        realized: usize,
        target: usize,
    },

    #[error("negative value {value} at unit {index}")]
    NegativeValue { index: usize, value: f64 },

    #[error("non-finite value at unit {index}")]
    NonFinite { index: usize },

    #[error("series total is zero")]
    ZeroTotal,

    #[error("zero weight base at unit {index} with negative weight exponent")]
    ZeroWeightBase { index: usize },

    #[error("every unit was skipped by the zero-weight policy")]
    EmptyAfterSkip,

    #[error("invalid loss spec: {0}")]
    InvalidSpec(String),

    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),

    #[error("unit index {index} out of range for series of length {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("duplicate id `{id}` at row {row}")]
    DuplicateId { row: usize, id: String },

    #[error("negative value {value} in column `{column}` at row {row}")]
    NegativeCell {
        row: usize,
        column: &'static str,
        value: f64,
    },

    #[error("experiment cell failed (n={n}, replicate={replicate}, seed={seed}): {source}")]
    Cell {
        n: usize,
        replicate: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from invalid input (as opposed to the
    /// environment failing underneath a valid request).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io(_) | Error::Json(_) => false,
            Error::Cell { source, .. } => source.is_validation(),
            _ => true,
        }
    }
}
