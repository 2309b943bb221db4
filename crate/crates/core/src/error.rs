use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("element must be wrapped in braces: {0:?}")]
    MissingBraces(String),
    #[error("malformed tag {0:?}, expected origin:nonce")]
    BadTag(String),
    #[error("duplicate tag {0} in element")]
    DuplicateTag(String),
    #[error("unknown adversary {0:?}")]
    UnknownAdversary(String),
    #[error("bad adversary parameter in {0:?}")]
    BadAdversaryParam(String),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("n = {n} cannot tolerate f = {f}: need n >= 3f + 1")]
    Resilience { n: usize, f: usize },
    #[error("{t} byzantine ids exceed f = {f}")]
    TooManyByzantine { t: usize, f: usize },
    #[error("byzantine id {id} is not a process id (n = {n})")]
    ByzantineOutOfRange { id: usize, n: usize },
    #[error("expected {n} inputs, got {got}")]
    InputCount { n: usize, got: usize },
    #[error("universe_size {size} is smaller than the {needed} distinct input tags")]
    UniverseTooSmall { size: usize, needed: usize },
    #[error("n must be positive")]
    Empty,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid config json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("expected {expected} grade triples, got {got}")]
    TripleCount { expected: usize, got: usize },
    #[error("still undecided at termination round {round}")]
    Undecided { round: usize },
}
