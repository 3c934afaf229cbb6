use thiserror::Error;

/// Broad class of a failure, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad parameters or configuration supplied by the caller.
    Usage,
    /// Malformed or invalid input data.
    Data,
    /// Failure inside the library itself (I/O on outputs, broken invariants).
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("panel has no edges or no time steps")]
    EmptyPanel,

    #[error("non-binary value {value} at edge {edge}, step {step}")]
    NonBinaryValue { edge: usize, step: usize, value: u8 },

    #[error("duplicate edge label {0:?}")]
    DuplicateLabel(String),

    #[error("panel shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid hypothesis spec: {0}")]
    InvalidSpec(String),

    #[error("lambda {lambda} outside [0, 1/pi) for pi = {pi}")]
    LambdaOutOfRange { lambda: f64, pi: f64 },

    #[error("success count {successes} exceeds {trials} trials")]
    CountExceedsTrials { successes: u64, trials: u64 },

    #[error("value {value} at index {index} outside [0, 1]")]
    ValueOutOfRange { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pi = {0} too large: logistic scenario requires pi < 0.5")]
    PiTooLarge(f64),

    #[error("degenerate Bernoulli VAR chain at edge {0}: 1 - pi_y + pi_z = 0")]
    DegenerateChain(usize),

    #[error("power is undefined when there are no alternative edges")]
    NoAlternatives,

    #[error("at least {min} replications required, got {got}")]
    RepsTooSmall { min: usize, got: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("event file is missing its `# T=<int>` header line")]
    MissingTHeader,

    #[error("replication {rep} failed in cell (t={t}, n_alt={n_alt}): {source}")]
    Replication {
        t: usize,
        n_alt: usize,
        rep: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyPanel => "EMPTY_PANEL",
            Error::NonBinaryValue { .. } => "NON_BINARY_VALUE",
            Error::DuplicateLabel(_) => "DUPLICATE_LABEL",
            Error::ShapeMismatch(_) => "SHAPE_MISMATCH",
            Error::InvalidSpec(_) => "INVALID_SPEC",
            Error::LambdaOutOfRange { .. } => "LAMBDA_OUT_OF_RANGE",
            Error::CountExceedsTrials { .. } => "COUNT_EXCEEDS_TRIALS",
            Error::ValueOutOfRange { .. } => "VALUE_OUT_OF_RANGE",
            Error::InvalidConfig(_) => "INVALID_CONFIG",
            Error::PiTooLarge(_) => "PI_TOO_LARGE",
            Error::DegenerateChain(_) => "DEGENERATE_CHAIN",
            Error::NoAlternatives => "NO_ALTERNATIVES",
            Error::RepsTooSmall { .. } => "REPS_TOO_SMALL",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::MissingTHeader => "MISSING_T_HEADER",
            Error::Replication { source, .. } => source.code(),
            Error::Io(_) => "IO_ERROR",
            Error::Json(_) => "JSON_ERROR",
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidSpec(_)
            | Error::LambdaOutOfRange { .. }
            | Error::InvalidConfig(_)
            | Error::PiTooLarge(_)
            | Error::RepsTooSmall { .. } => ErrorClass::Usage,
            Error::EmptyPanel
            | Error::NonBinaryValue { .. }
            | Error::DuplicateLabel(_)
            | Error::ShapeMismatch(_)
            | Error::CountExceedsTrials { .. }
            | Error::ValueOutOfRange { .. }
            | Error::DegenerateChain(_)
            | Error::NoAlternatives
            | Error::Parse { .. }
            | Error::MissingTHeader
            | Error::Io(_) => ErrorClass::Data,
            Error::Replication { source, .. } => source.class(),
            Error::Json(_) => ErrorClass::Internal,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
