use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("point is not on the unit sphere (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("chart radius exceeded: |v| = {norm} must be < 1")]
    ChartRadius { norm: f64 },

    #[error("0 lies in the convex hull of the T-weights; isotypes are not finite-dimensional")]
    PositivityViolated,

    #[error("integer overflow while enumerating exponents")]
    Overflow,

    #[error("moment map vanishes at the point")]
    ZeroMoment,

    #[error("point is off the locus (residual {residual:e})")]
    OffLocus { residual: f64 },

    #[error("transversality failure: evaluation Gram determinant {det:e} below threshold")]
    Transversality { det: f64 },

    #[error("action is not locally free at the point (stabilizer has positive dimension)")]
    NotLocallyFree,

    #[error("stabilizer of order {order} exceeds the enumeration limit")]
    StabilizerTooLarge { order: u128 },

    #[error("the locus for nu_T = {nu_t:?} is empty")]
    EmptyLocus { nu_t: Vec<i64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit needs at least {needed} positive samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("quadrature budget too small: {0}")]
    QuadratureBudget(String),

    #[error("oracle bound {bound} is below the attainable degree {required}")]
    OracleBound { bound: u64, required: u64 },

    #[error("exact arithmetic exceeded the {bits}-bit precision budget")]
    PrecisionBudget { bits: u64 },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Errors that signal a violated mathematical hypothesis rather than bad input.
    pub fn is_assumption_violation(&self) -> bool {
        matches!(
            self,
            Error::PositivityViolated
                | Error::ZeroMoment
                | Error::OffLocus { .. }
                | Error::Transversality { .. }
                | Error::NotLocallyFree
                | Error::EmptyLocus { .. }
        )
    }
}
