use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("process `{id}`: {reason}")]
    InvalidProcess { id: String, reason: String },

    #[error("duplicate process id `{0}`")]
    DuplicateId(String),

    #[error("machine needs at least one big and one small core (got big={big}, small={small})")]
    HomogeneousMachine { big: usize, small: usize },

    #[error("fraction {0} is outside [0, 1]")]
    FractionOutOfRange(f64),

    #[error("assignment has no entry for process `{0}`")]
    MissingAssignment(String),

    #[error("workload is empty")]
    EmptyWorkload,

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("grid search refused: {0}")]
    GridRefused(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// True for errors that signal a bug in the solver rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
