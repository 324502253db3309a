use thiserror::Error;

/// Errors produced by topology generation, the solvers and the experiment harness.
///
/// Infeasibility is never an error: planners and the power solver report it in
/// their return values.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point ({x}, {y}) lies exactly on the road line")]
    DegeneratePosition { x: f64, y: f64 },

    #[error("topology generation gave up after {attempts} rejected draws")]
    Generation { attempts: u32 },

    #[error("instance too large for exhaustive search: {sequences} sequences exceed the limit of {limit}")]
    InstanceTooLarge { sequences: u128, limit: u128 },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad user input (configuration, documents, domains).
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Domain(_)
                | Error::DegeneratePosition { .. }
                | Error::Parse { .. }
                | Error::InstanceTooLarge { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
