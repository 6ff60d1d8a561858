use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("format error: {0}")]
    Format(String),
    #[error("input contains no graphs")]
    EmptyDatabase,
    #[error("invalid graph data: {0}")]
    Validation(String),
    #[error("motif is not connected")]
    Disconnected,
    #[error("motif has {n} nodes, more than the limit of {max}")]
    MotifTooLarge { n: usize, max: usize },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("all motif usages are zero")]
    DegenerateTable,
    #[error("cover error: {0}")]
    Coverage(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("injection error: {0}")]
    Injection(String),
    #[error("metric error: {0}")]
    Metric(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Invariant(_) => 3,
            _ => 2,
        }
    }
}
