use std::path::PathBuf;

use tenfold_core::Error as CoreError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_PARSE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed model file, with the offending field or line.
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("bad sweep template {path}: {message}")]
    BadTemplate { path: String, message: String },
    /// Invalid command-line arguments that clap cannot catch.
    #[error("{0}")]
    Usage(String),
    /// Well-formed input that describes an unusable situation, such as
    /// junctions between different classes.
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Parse { path: path.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::BadTemplate { .. } | CliError::Usage(_) => EXIT_PARSE,
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Core(e) => core_exit_code(e),
            CliError::Io { .. } | CliError::Output(_) => EXIT_OTHER,
        }
    }
}

fn core_exit_code(e: &CoreError) -> i32 {
    use CoreError::*;
    match e {
        GapClosed(_)
        | NotInGap { .. }
        | IncompatibleBoundary(_)
        | NotInClass { .. }
        | NoLagrangianPlanes { .. }
        | InconsistentSymmetries(_)
        | BadParity { .. }
        | AmbiguousKernel(_)
        | KindMismatch(_)
        | Singular(_)
        | NotInvertible(_)
        | ProjectionSingular(_)
        | NotLagrangian(_) => EXIT_DOMAIN,
        BadSpec(_) | BadInput(_) | DimensionMismatch(_) => EXIT_PARSE,
        _ => EXIT_OTHER,
    }
}

pub type CliResult<T> = Result<T, CliError>;
