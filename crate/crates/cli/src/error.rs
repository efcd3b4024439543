use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] emsr_core::Error),

    #[error("corrupt shard {path}: {reason}")]
    CorruptShard { path: PathBuf, reason: String },

    #[error("shards disagree: {0}")]
    InconsistentShards(String),

    #[error("no shard for block {0}")]
    MissingShard(usize),

    #[error("bad config: {0}")]
    BadConfig(String),

    #[error("bad arguments: {0}")]
    BadArguments(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::CorruptShard { .. } => "CorruptShard",
            CliError::InconsistentShards(_) => "InconsistentShards",
            CliError::MissingShard(_) => "MissingShard",
            CliError::BadConfig(_) => "BadConfig",
            CliError::BadArguments(_) => "BadArguments",
            CliError::Io { .. } => "Io",
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;
