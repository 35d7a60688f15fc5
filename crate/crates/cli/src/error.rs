use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing artifact: {0}")]
    Missing(String),

    #[error("stale artifact {path}: provenance {found} does not match the current config ({expected})")]
    Stale { path: PathBuf, found: String, expected: String },

    #[error(transparent)]
    Library(#[from] linkshroud::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use linkshroud::Error as L;
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Missing(_) | CliError::Stale { .. } => 4,
            CliError::Library(e) => match e {
                L::Io { .. } => 3,
                L::Parse { .. } | L::SelfLoop { .. } | L::EmptyManifest | L::EmptySequence | L::InvalidParameter(_) => {
                    2
                }
                _ => 1,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
