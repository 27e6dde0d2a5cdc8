use thiserror::Error;

/// Errors produced by the engine.
///
/// Every variant maps onto one of three process-level categories (invalid
/// input, exhausted budget, internal assertion); see [`Error::category`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degree too small: map has degree {0}, need at least 2")]
    DegreeTooSmall(usize),

    #[error("degenerate pair: homogeneous resultant vanishes")]
    DegeneratePair,

    #[error("zero input to {0}")]
    ZeroInput(&'static str),

    #[error("bad leading reduction: {0} divides the leading coefficient")]
    BadLeadingReduction(u64),

    #[error("bad reduction at p = {p}: {obstruction}")]
    BadReduction { p: u64, obstruction: String },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("zero multiplier excluded from Per*")]
    ZeroMultiplier,

    #[error("rog of zero is infinite")]
    RogOfZero,

    #[error("no non-preperiodic critical point")]
    NoNonPreperiodicCritical,

    #[error("Hensel cross-check failed at p = {p}, cycle length {cycle_len}")]
    HenselCrossCheck { p: u64, cycle_len: usize },

    #[error("root finder did not converge (best residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("internal assertion: {0}")]
    Internal(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    InvalidInput,
    Budget,
    Internal,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidInput(_)
            | Error::DegreeTooSmall(_)
            | Error::DegeneratePair
            | Error::ZeroInput(_)
            | Error::BadLeadingReduction(_)
            | Error::BadReduction { .. }
            | Error::ZeroMultiplier
            | Error::RogOfZero
            | Error::NoNonPreperiodicCritical => ErrorCategory::InvalidInput,
            Error::BudgetExceeded(_) => ErrorCategory::Budget,
            Error::HenselCrossCheck { .. } | Error::NonConvergence { .. } | Error::Internal(_) => {
                ErrorCategory::Internal
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
