use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid genome: {0}")]
    InvalidGenome(String),
    #[error("gene index {index} out of range (space has {len} genes)")]
    GeneOutOfRange { index: usize, len: usize },
    #[error("cannot step a terminal game (tick {tick})")]
    TerminalState { tick: u32 },
    #[error("unknown agent id {0}")]
    UnknownAgent(u8),
    #[error("empty candidate list")]
    EmptyChildren,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
