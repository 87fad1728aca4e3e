use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("site {site:?} is outside the window")]
    OutOfWindow { site: Vec<i64> },
    #[error("state {state} is out of range for q = {q}")]
    StateOutOfRange { state: u32, q: u32 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("enumeration budget exceeded: n = {requested} but the budget is {budget}")]
    BudgetExceeded { requested: usize, budget: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
