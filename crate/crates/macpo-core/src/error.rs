use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("replay buffer is empty")]
    EmptyBuffer,
    #[error("batch has no filled samples")]
    EmptyBatch,
    #[error("malformed episode: {0}")]
    MalformedEpisode(String),
    #[error("agent {agent} chose unavailable action {action}")]
    UnavailableAction { agent: usize, action: usize },
    #[error("no available action for agent {agent}")]
    NoAvailableAction { agent: usize },
    #[error("cannot place {entities} entities on a grid with {cells} cells")]
    ImpossiblePlacement { entities: usize, cells: usize },
    #[error("environment episode already finished")]
    EpisodeFinished,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("bad file format: {0}")]
    BadFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
