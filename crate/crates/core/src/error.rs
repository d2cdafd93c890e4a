use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("capacity is not monotone: w({smaller:?}) = {lower} > w({larger:?}) = {upper}")]
    NonMonotone {
        smaller: Vec<usize>,
        larger: Vec<usize>,
        lower: f64,
        upper: f64,
    },
    #[error("capacity boundary violated: w(empty) = {empty}, w(full) = {full}")]
    BadBoundary { empty: f64, full: f64 },
    #[error("ambiguity set is empty")]
    EmptyAmbiguitySet,
    #[error("space mismatch: expected {expected} atoms, found {found}")]
    SpaceMismatch { expected: usize, found: usize },
    #[error("empty capacity list")]
    EmptyList,
    #[error("level {0} out of range")]
    AlphaOutOfRange(f64),
    #[error("space with {m} atoms exceeds the limit of {max} for this operation")]
    SpaceTooLarge { m: usize, max: usize },
    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),
    #[error("invalid distortion: {0}")]
    InvalidDistortion(String),
    #[error("invalid null-set family: {0}")]
    InvalidNullSet(String),
    #[error("random variable has a non-finite value at atom {0}")]
    NonFiniteValue(usize),
    #[error("scaled capacity is not submodular; expected shortfall is not coherent")]
    NotCoherent,
    #[error("capacity {0} is not submodular")]
    NotSubmodular(usize),

    #[error("LP dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("LP numeric breakdown: {0}")]
    NumericBreakdown(String),

    #[error("agent {0} does not use a sup-probability")]
    NotSupProbability(usize),
    #[error("agent {0} uses expected shortfall; only VaR agents can be shared here")]
    UnsupportedMeasure(usize),
    #[error("reference weights are required")]
    MissingRefWeights,
    #[error("prior {prior} of agent {agent} charges atom {atom} which has zero reference weight")]
    NotAbsolutelyContinuous { agent: usize, prior: usize, atom: usize },
    #[error("composition does not cover atom {0}")]
    CoverViolation(usize),
    #[error("transform is not increasing")]
    NonMonotoneTransform,
    #[error("monotone likelihood ratio violated for agent {agent} between atoms {lower} and {upper}")]
    MlrViolated {
        agent: usize,
        lower: usize,
        upper: usize,
    },
    #[error("tail rearrangement is unsupported: {0}")]
    ModeUnsupported(String),
    #[error("assignment search exceeded {0} nodes")]
    SearchBudgetExceeded(u64),
    #[error("shift {shift} exceeds the sharing value {value}")]
    InvalidShift { shift: f64, value: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-positive price at line {0}")]
    NonPositivePrice(usize),
    #[error("dates must be strictly increasing (line {0})")]
    UnorderedDates(usize),
    #[error("need at least two price rows")]
    TooFewRows,
    #[error("empty series")]
    EmptySeries,
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("sample has zero dispersion")]
    DegenerateSample,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid fit: {0}")]
    InvalidFit(String),

    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
