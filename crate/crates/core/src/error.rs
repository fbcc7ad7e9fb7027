use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("graph generation exhausted its retry budget of {attempts} restarts")]
    GenerationExhausted { attempts: usize },

    #[error("assignment has {got} bits but the graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{n} qubits exceeds the configured limit of {limit}")]
    SizeLimitExceeded { n: usize, limit: usize },

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("state has {state} qubits but the cost diagonal has {diagonal}")]
    DimensionMismatch { state: usize, diagonal: usize },

    #[error("non-finite result: {0}")]
    NonFiniteResult(String),

    #[error("statevector norm drifted to {norm}; aborting run")]
    DivergedState { norm: f64 },

    #[error("ground energy {0} must be negative")]
    ZeroOrPositiveGroundEnergy(f64),

    #[error("time-step grid is empty")]
    EmptyGrid,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no records to aggregate")]
    EmptyInput,

    #[error("baseline {graph_id} does not match the diagonal: ground energy {ground_energy}, table minimum {table_min}")]
    BaselineMismatch {
        graph_id: String,
        ground_energy: i64,
        table_min: i64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wrap an I/O error with the path it occurred on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Internal invariant violations (CLI exit code 2) versus user errors (exit code 1).
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::DivergedState { .. } | Error::NonFiniteResult(_)
        )
    }
}
