use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension must be at least {min}, got {dim}")]
    DimensionTooSmall { dim: usize, min: usize },

    #[error("matrix is not Hermitian: max |H - H^dagger| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("eigendecomposition failed validation: {0}")]
    Eigendecomposition(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized: |psi|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("Bloch vector length {length} exceeds 1")]
    BlochOutsideBall { length: f64 },

    #[error("operation requires a qubit (d = 2), got d = {dim}")]
    RequiresQubit { dim: usize },

    #[error("operation requires a single copy (N = 1), got N = {copies}")]
    RequiresSingleCopy { copies: usize },

    #[error("number of copies must be at least 1")]
    NoCopies,

    #[error("outcome sequence is empty")]
    EmptyOutcomes,

    #[error("outcome index {index} out of range for d = {dim}")]
    OutcomeOutOfRange { index: usize, dim: usize },

    #[error("second moment <n^2> = {0} is outside [0, 1]")]
    SecondMomentOutOfRange(f64),

    #[error("invalid radial law: {0}")]
    InvalidRadialLaw(String),

    #[error("binomial coefficient C({n}, {k}) overflows 64 bits")]
    Overflow { n: u64, k: u64 },

    #[error("tensor space dimension {dim}^{copies} exceeds the limit {limit}")]
    ResourceGuard { dim: usize, copies: usize, limit: usize },

    #[error("tensor slot {position} out of range 1..={copies}")]
    PositionOutOfRange { position: usize, copies: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown observable builtin `{0}`")]
    UnknownBuiltin(String),

    #[error("failed to parse {what}: {source}")]
    Parse {
        what: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
