use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid simulation input: {0}")]
    InvalidInput(String),

    /// A log that cannot be replayed: death of an individual that is not alive,
    /// duplicate newborn ids, or event times out of order.
    #[error("corrupt event log: {0}")]
    CorruptLog(String),

    #[error("event log parse error at line {line}: {msg}")]
    LogParse { line: usize, msg: String },

    /// A test function whose support has endpoints the segmented path was not
    /// built with.
    #[error("unsupported test function: {0}")]
    UnsupportedFunction(String),

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("singular system (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("ill-conditioned system: condition estimate {condition:e} exceeds {threshold:e}")]
    IllConditioned { condition: f64, threshold: f64 },

    #[error("empty confidence set: {0}")]
    EmptyConfidenceSet(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
