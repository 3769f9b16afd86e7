use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("restricted Gram matrix is singular on support {support:?}{}", iteration_suffix(*.iteration))]
    Singular {
        support: Vec<usize>,
        iteration: Option<usize>,
    },

    #[error("exhaustive search over {count:.3e} supports exceeds the limit of {limit:.0e}")]
    TooManySupports { count: f64, limit: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn iteration_suffix(iteration: Option<usize>) -> String {
    match iteration {
        Some(k) => format!(" at iteration {k}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach the iteration index to a singularity error.
    pub(crate) fn at_iteration(self, k: usize) -> Self {
        match self {
            Error::Singular { support, .. } => Error::Singular {
                support,
                iteration: Some(k),
            },
            other => other,
        }
    }
}
