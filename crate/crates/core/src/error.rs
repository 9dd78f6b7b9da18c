//! Error type shared across the crate.

/// Errors produced by validation, solvers, and search guards.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("{field} out of range: {message}")]
    OutOfRange {
        field: &'static str,
        message: String,
    },

    /// The service benefit must strictly exceed the service cost.
    #[error("service benefit must exceed service cost (need benefit > cost > 0)")]
    BenefitNotAboveCost,

    /// Exhaustive search over strategies is capped to keep runtimes bounded.
    #[error("reputation bound {max_reputation} exceeds the enumeration limit {limit}")]
    EnumerationTooLarge { max_reputation: usize, limit: usize },

    /// Fixed-point iteration hit its iteration cap.
    #[error("stationary iteration did not converge within {iterations} steps")]
    NoConvergence { iterations: usize },

    /// The closed-form value differences exist only under maximum punishment.
    #[error(
        "operation requires maximum punishment (punishment length {punishment_length} < bound {max_reputation})"
    )]
    RequiresMaxPunishment {
        punishment_length: usize,
        max_reputation: usize,
    },

    /// Whitewash checks need a whitewashing cost in the parameters.
    #[error("whitewashing cost is not set on the community parameters")]
    MissingWhitewashCost,

    /// A strategy matrix does not match the scheme it is paired with.
    #[error("strategy side {strategy_side} does not match scheme side {scheme_side}")]
    DimensionMismatch {
        strategy_side: usize,
        scheme_side: usize,
    },

    /// An analytic result was requested outside its hypothesis.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// The long-term value system could not be solved.
    #[error("long-term value system is singular")]
    SingularSystem,

    /// A rollout horizon too short for the requested truncation error.
    #[error("horizon {horizon} leaves a discounted tail of {tail:e}")]
    HorizonTooShort { horizon: usize, tail: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
