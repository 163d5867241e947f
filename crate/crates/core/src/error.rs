use thiserror::Error;

/// Errors raised by construction, census and diagnostic routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A spec or height set breaks one of its structural invariants.
    #[error("spec violation at stage {stage}: {reason}")]
    SpecViolation { stage: usize, reason: String },

    #[error("{value} is not a descendant in D(I,{target}) for base stage {base}")]
    NotADescendant {
        value: String,
        base: usize,
        target: usize,
    },

    #[error("invalid stage range {base}..{target} for a spec with {stages} stages")]
    StageRange {
        base: usize,
        target: usize,
        stages: usize,
    },

    #[error("{what} needs {needed} evaluations, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Orbit refinement ran past the last built stage.
    #[error("refinement needs stage {needed} but only {built} stages are built")]
    StagesExhausted { needed: usize, built: usize },

    #[error("state {state} lies outside the window |i| <= {radius}")]
    OutOfWindow { state: i64, radius: usize },

    #[error("window radius {radius} too small for {steps} steps (need at least {required})")]
    WindowTooSmall {
        radius: usize,
        steps: usize,
        required: usize,
    },

    #[error("malformed spec document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn violation(stage: usize, reason: impl Into<String>) -> Self {
        Error::SpecViolation {
            stage,
            reason: reason.into(),
        }
    }
}
