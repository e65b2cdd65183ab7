use std::io;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("zero modulus")]
    ZeroModulus,

    #[error("out of RNS range")]
    OutOfRnsRange,

    #[error("unsupported modulus width k = {0} (expected 64 or 52)")]
    UnsupportedWidth(u32),

    #[error("no basis of {available} moduli with c < 2^8 satisfies the accumulation bound")]
    BasisExhausted { available: usize },

    #[error("row norm {row_norm} is too large for this basis")]
    RowNormTooLarge { row_norm: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite floating-point input")]
    NonFinite,

    #[error("row overflow: row {row} has {len} entries but K = {width}")]
    RowOverflow { row: usize, len: usize, width: usize },

    #[error("row {0} is not in category order")]
    NotCategoryOrdered(usize),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("index out of range: entry {entry} at ({row}, {col}) in a {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        entry: usize,
        row: u64,
        col: u64,
        n_rows: u64,
        n_cols: u64,
    },

    #[error("coefficient {value} at entry {entry} does not fit in a signed 32-bit magnitude")]
    CoefficientOutOfRange { entry: usize, value: i64 },

    #[error("zero coefficient at entry {0}")]
    ZeroCoefficient(usize),

    #[error("entries not sorted by (row, col) at entry {0}")]
    Unsorted(usize),

    #[error("duplicate entry ({row}, {col})")]
    Duplicate { row: u64, col: u64 },

    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("bound violation: element {element} exceeds (1 - delta) P after iteration {iteration}")]
    BoundViolation { iteration: usize, element: usize },

    #[error("insufficient sequence: {len} terms cannot certify a generator of degree {degree}")]
    InsufficientSequence { len: usize, degree: usize },

    #[error("no kernel vector found (matrix may be non-singular) after {attempts} attempts")]
    NoKernelVector { attempts: usize },

    #[error("interrupted after Krylov iteration {iteration}; checkpoint written")]
    Interrupted { iteration: usize },

    #[error("malformed basis description: {0}")]
    MalformedBasis(String),

    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
