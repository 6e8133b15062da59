use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed network file: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] spinsurf_core::Error),
    #[error("bad sweep spec: {0}")]
    Spec(String),
    #[error("unknown figure {0}; figures are numbered 1 to 8")]
    UnknownFigure(u32),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Process exit codes of the CLI.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const CONVERGENCE: i32 = 2;
    pub const RESOURCE: i32 = 3;
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use spinsurf_core::Error as C;
        match self {
            Error::Core(C::NoConvergence { .. } | C::ResolventSingular(_)) => exit::CONVERGENCE,
            Error::Core(C::TooLarge { .. }) => exit::RESOURCE,
            _ => exit::VALIDATION,
        }
    }
}
