use alloc::string::String;

/// Errors reported by the core routines.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A ballot style, ballot, deck or swap violates a structural invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An operation was called on data that does not meet its precondition
    /// (for example detection on an infeasible deck).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A constructive bound does not apply to the given swap or style.
    #[error("construction not applicable: {0}")]
    NotApplicable(String),
    /// A search exceeded its enumeration budget without a conclusion.
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),
    /// A deck length exceeded the configured cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// The MILP backend hit its time limit.
    #[error("solver time limit reached")]
    Timeout,
    /// The MILP backend failed (numerical trouble, bad status, fractional
    /// integer values). Usually worth retrying with other settings.
    #[error("solver failure: {0}")]
    Solver(String),
    /// A rule configuration is inconsistent.
    #[error("invalid rules: {0}")]
    InvalidRules(String),
    /// A solver answer failed post-hoc verification. This indicates a bug
    /// in a formulation or backend, never a property of the input.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
