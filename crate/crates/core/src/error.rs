use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed scheme: {0}")]
    Parse(String),
    #[error("duplicate time displacement {0}")]
    DuplicateTime(i64),
    #[error("more than one voice marked as bass")]
    MultipleBass,
    #[error("a scheme needs at least one voice")]
    EmptyScheme,
    #[error("time dilation by {num}/{den} leaves a non-integral time for t={t}")]
    NonIntegralDilation { num: i64, den: i64, t: i64 },
    #[error("malformed melody: {0}")]
    Melody(String),
    #[error("enumeration budget of {0} visited prefixes exceeded")]
    BudgetExceeded(u64),
    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(u64),
    #[error("component of size {size} exceeds the characteristic-polynomial cap {cap}")]
    CharPolyCap { size: usize, cap: usize },
    #[error("prefix is not a valid canon for this scheme")]
    InvalidPrefix,
    #[error("no valid canon of length {length} extends the seed (backtracking exhausted)")]
    GenerationExhausted { length: usize },
}

impl Error {
    /// Resource-limit and convergence failures, as opposed to bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded(_) | Error::NoConvergence(_) | Error::CharPolyCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
