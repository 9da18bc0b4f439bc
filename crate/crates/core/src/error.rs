use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unbound omega variable `{0}`")]
    UnboundOmegaVar(String),

    #[error("unknown defined symbol `{0}`")]
    UnknownSymbol(String),

    #[error("omega term `{0}` is not ground")]
    NotGround(String),

    #[error("predecessor of zero in `{0}`")]
    PredZero(String),

    #[error("sort mismatch: cannot bind {var} to {value}")]
    SortMismatch { var: String, value: String },

    #[error("empty carriage return list has no focus")]
    EmptyList,

    #[error("unresolved clause-set symbol `{0}`")]
    UnresolvedSymbol(String),

    #[error("no rewrite rule for `{0}`")]
    MissingRule(String),

    #[error("step budget of {budget} exhausted; call chain: {chain}")]
    Budget { budget: u64, chain: String },

    #[error("configuration {config} of `{proof}` is not listed")]
    MissingConfiguration { proof: String, config: String },

    #[error("inconsistent ancestor flags: {0}")]
    InconsistentFlags(String),

    #[error("invalid proof schema: {0}")]
    InvalidSchema(String),

    #[error("resolution failed: {0}")]
    Resolution(String),

    #[error("not a single clause: {0}")]
    NotAClause(String),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("{0}")]
    Load(String),
}

pub type Result<T> = std::result::Result<T, Error>;
