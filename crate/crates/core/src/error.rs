use thiserror::Error;

use crate::game::{GameError, MixedProfile};
use crate::oracle::QueryError;

/// Failure of a query algorithm.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Query(QueryError),
    /// The oracle's budget ran out. Carries the profile the algorithm would
    /// have output from the work completed so far, when it has one.
    #[error("query budget exhausted")]
    BudgetExhausted { best_effort: Option<MixedProfile> },
    #[error("mass {mass} on clearly suboptimal strategies exceeds {bound}")]
    PreconditionViolated { mass: f64, bound: f64 },
    #[error("best cell sum {best_sum} does not exceed {threshold}")]
    HypothesisViolated { best_sum: f64, threshold: f64 },
}

impl SolveError {
    pub fn best_effort(&self) -> Option<&MixedProfile> {
        match self {
            SolveError::BudgetExhausted { best_effort } => best_effort.as_ref(),
            _ => None,
        }
    }

    /// Fills in a best-effort profile if the budget ran out without one.
    pub(crate) fn or_best_effort(self, profile: impl FnOnce() -> MixedProfile) -> Self {
        match self {
            SolveError::BudgetExhausted { best_effort: None } => SolveError::BudgetExhausted {
                best_effort: Some(profile()),
            },
            other => other,
        }
    }
}

impl From<QueryError> for SolveError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::BudgetExhausted { .. } => SolveError::BudgetExhausted { best_effort: None },
            other => SolveError::Query(other),
        }
    }
}

impl From<GameError> for SolveError {
    fn from(e: GameError) -> Self {
        SolveError::InvalidInput(e.to_string())
    }
}
