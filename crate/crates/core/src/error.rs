use alloc::string::String;

/// Errors reported by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        /// Parameter name.
        name: &'static str,
        /// Why the value was rejected.
        reason: String,
    },
    /// The branches of a map do not tile `[0, 1]`.
    #[error("branches do not cover [0, 1]: {0}")]
    Cover(String),
    /// The map does not have the structure required by the operation.
    #[error("map does not satisfy the required conditions: {0}")]
    Condition(String),
    /// A density is not of the form the operation expects.
    #[error("density has the wrong shape: {0}")]
    DensityShape(String),
    /// A monotone root search could not bracket its target.
    #[error("root search failed: {0}")]
    RootSearch(String),
    /// An iterative scheme did not reach its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        /// Iterations performed.
        iterations: usize,
        /// Last residual.
        residual: f64,
    },
    /// Too few samples or cells for a meaningful estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// Every point escaped through the hole.
    #[error("all mass escaped through the hole")]
    TotalEscape,
    /// An enumeration would exceed its size budget.
    #[error("enumeration needs {needed} items, budget is {budget}")]
    Budget {
        /// Items the enumeration needs.
        needed: u128,
        /// Allowed number of items.
        budget: usize,
    },
    /// A quantity that must be finite is not.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Result alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
