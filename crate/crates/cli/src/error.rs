use thiserror::Error;

/// Failures that end a run before a report is produced.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent configuration, bad arguments, unreadable files.
    #[error("config error: {0}")]
    Config(String),
    /// A numerical method failed on valid input. The message carries its own category.
    #[error("{0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 2 for config and usage problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            Self::Numeric(_) => 3,
        }
    }

    /// Errors while turning a config into a family are config errors unless
    /// an iteration failed.
    pub fn from_build(e: opoly_core::Error) -> Self {
        match e {
            opoly_core::Error::Numeric(_) => Self::Numeric(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<opoly_core::Error> for CliError {
    fn from(e: opoly_core::Error) -> Self {
        use opoly_core::Error as E;
        match e {
            E::Range(_) | E::Domain(_) | E::Constraint(_) | E::State(_) => {
                Self::Config(e.to_string())
            }
            E::Degeneracy(_)
            | E::Numeric(_)
            | E::Inconsistency(_)
            | E::Conditioning(_)
            | E::Inapplicable(_) => Self::Numeric(e.to_string()),
        }
    }
}
