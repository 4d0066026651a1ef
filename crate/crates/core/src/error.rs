use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} is not defined for discrete distributions")]
    UnsupportedForDiscrete(&'static str),

    #[error("distribution has an infinite mean")]
    DivergentMean,

    #[error("degenerate curvature at the monopoly price: 2F'(p*) + p*F''(p*) = {0:e}")]
    DegenerateCurvature(f64),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("policy has {found} atoms but the instance has {expected} offers")]
    ArityMismatch { expected: usize, found: usize },

    #[error("brute-force search needs {count} candidate tuples (limit {limit})")]
    SearchTooLarge { count: u128, limit: u128 },

    #[error("partition iteration stalled at step {step} (w = {w}); slack too small")]
    NotProgressing { step: usize, w: f64 },

    #[error("partition iteration exceeded {0} steps")]
    IterationLimit(usize),

    #[error("no slack in the search bracket reaches the cutoff within {steps} steps")]
    Infeasible { steps: usize },

    #[error("bound ordering violated: {0}")]
    BoundInconsistent(String),

    #[error("no worst-case instance family for this policy: {0}")]
    NoWorstCaseFamily(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
