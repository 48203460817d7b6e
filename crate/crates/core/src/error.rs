use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cover at level {level} is only an outer approximation")]
    NotExact { level: u32 },
    #[error("refinement budget of {budget} exceeded; word depth {required_depth} would be needed")]
    RefinementLimit { required_depth: u32, budget: usize },
    #[error("search failed: {0}")]
    SearchFailed(String),
    #[error("exact arithmetic overflow")]
    Overflow,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("internal check failed: {0}")]
    Invariant(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Errors caused by malformed or inconsistent user input, as opposed to
    /// valid input that fails a mathematical precondition.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::Json(_) | Error::Io(_))
    }
}
