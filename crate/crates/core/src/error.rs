use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at element {index}")]
    NonFinite { index: usize },
    #[error("duplicate token {token:?} at positions {first} and {second}")]
    DuplicateToken {
        token: String,
        first: usize,
        second: usize,
    },
    #[error("latent dimension {d_prime} out of range 1..={max}")]
    LatentDimOutOfRange { d_prime: usize, max: usize },
    #[error("requested {requested} components, at most {max} available")]
    TooManyComponents { requested: usize, max: usize },
    #[error("at least {required} rows required, found {found}")]
    TooFewRows { required: usize, found: usize },
    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
    #[error("source vocabulary is empty")]
    EmptySourceVocabulary,
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("eigen-solver did not converge ({rows}x{cols} input, max |value| {max_abs})")]
    NoConvergence {
        rows: usize,
        cols: usize,
        max_abs: f64,
    },
    #[error("query vector has zero norm")]
    ZeroQuery,
    #[error("no similarity candidates available")]
    NoCandidates,
}
