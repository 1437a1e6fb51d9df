use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate interval in dimension {dim}: lo = {lo} > hi = {hi}")]
    DegenerateInterval { dim: usize, lo: f64, hi: f64 },

    #[error("grid count for dimension {dim} must be at least 1")]
    ZeroCount { dim: usize },

    #[error("duplicate grid point at index {index}")]
    DuplicatePoint { index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("regions belong to different universes")]
    UniverseMismatch,

    #[error("sample is empty")]
    EmptySample,

    #[error("non-finite value {value} in {what}")]
    NonFinite { what: &'static str, value: f64 },

    #[error(
        "alpha = {alpha} lies on the tie grid S_{{n+1}} = {{0, 1/{m}, ..., {m}/{m}}} (n = {n}); \
         pick a level strictly between two grid points",
        m = n + 1
    )]
    TieLevel { alpha: f64, n: usize },

    #[error("alpha = {0} must lie in [0, 1]")]
    InvalidAlpha(f64),

    #[error("no tie-grid level lies strictly above alpha = {0}")]
    NoLevelAbove(f64),

    #[error("contour is not consonant: maximum value is {max}, expected exactly 1")]
    NotConsonant { max: f64 },

    #[error("invalid contour value {value} at index {index}")]
    InvalidContour { index: usize, value: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidProbVector(String),

    #[error("universe of size {size} exceeds the enumeration limit {limit}")]
    UniverseTooLarge { size: usize, limit: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("training points {first} and {second} have equal predictive density {density}")]
    DensityTie {
        first: usize,
        second: usize,
        density: f64,
    },

    #[error("lower marginal likelihood is zero for outcome {outcome}")]
    ZeroLowerMarginal { outcome: usize },

    #[error("likelihood row {row} integrates to {mass}, expected 1")]
    ImproperLikelihood { row: usize, mass: f64 },

    #[error("invalid prior envelope: {0}")]
    InvalidPrior(String),

    #[error("cannot compose: target {target} does not match source {source_set}")]
    EndpointMismatch { target: String, source_set: String },

    #[error("fiber of element {element} is empty")]
    EmptyFiber { element: usize },

    #[error("fiber element {value} out of range for target of size {size}")]
    FiberOutOfRange { value: usize, size: usize },

    #[error("finite set size {size} out of supported range 1..={max}")]
    SetSize { size: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not sample a valid instance after {0} attempts")]
    SamplingExhausted(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
