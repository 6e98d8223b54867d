use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported level type {0}: only overground levels (type 0) are generated")]
    UnsupportedLevelType(i64),
    #[error("invalid difficulty {0}: must be non-negative")]
    InvalidDifficulty(i64),
    #[error("episode is already over")]
    EpisodeOver,
    #[error("no candidates to select from")]
    EmptyCandidates,
    #[error("non-finite reward {0}")]
    NonFiniteReward(f64),
    #[error("substate duration must be at least one tick, got {0}")]
    ZeroDuration(u32),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("replay diverged at tick {tick}: {msg}")]
    ReplayMismatch { tick: u32, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
