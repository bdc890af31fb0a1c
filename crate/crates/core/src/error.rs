use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet error: {0}")]
    Alphabet(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("word is not a member of the subgroup: {0}")]
    NotMember(String),
    #[error("unsupported construction: {0}")]
    Unsupported(String),
    #[error("invalid group description: {0}")]
    InvalidSpec(String),
    #[error("vertex budget of {0} exceeded")]
    Budget(usize),
    #[error("graph has {n} vertices, {method} is limited to {limit}")]
    TooLarge { method: &'static str, n: usize, limit: usize },
    #[error("truncation too small: {0}; raise R_H or the ball radius")]
    Truncation(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("graph error: {0}")]
    Graph(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
