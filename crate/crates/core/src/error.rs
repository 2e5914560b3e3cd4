use thiserror::Error;

/// Errors raised while building models or computing probabilities.
///
/// Level indices carried by variants are 1-based, matching user-facing I/O.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlzError {
    #[error("levels {0} and {1} have equal slopes")]
    DegeneratePair(usize, usize),

    #[error("levels {0} and {1} are parallel but directly coupled")]
    CoupledParallelLevels(usize, usize),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("slope condition violated at level {level}: |b_i| = {abs_slope} must exceed b = {b}")]
    SlopeBound { level: usize, abs_slope: f64, b: f64 },

    #[error("coupling closure violated: sum g1i^2/(b_i - b) = {sum} (relative {relative:e})")]
    ClosureViolated { sum: f64, relative: f64 },

    #[error("coupling closure cannot be satisfied: {0}")]
    ClosureUnsolvable(String),

    #[error("sign condition violated at level {level}: lambda*tau*sgn(b) = {product}, expected {rho}")]
    SignCondition { level: usize, product: i8, rho: i8 },

    #[error("bowtie constraint violated: kappa = {0:e}")]
    KappaNonzero(f64),

    #[error("singular slope denominator for n = {0} up-spins")]
    SingularSlope(usize),

    #[error("negative radicand {0:e} in offset formula")]
    NegativeRadicand(f64),

    #[error("levels {0} and {1} are not directly coupled")]
    MissingLink(usize, usize),

    #[error("intermediate level {intermediate} is degenerate with pair ({a}, {b}) at their crossing")]
    DegenerateIntermediate { a: usize, b: usize, intermediate: usize },

    #[error("simultaneous crossings ({0}, {1}) and ({2}, {3}) share a level")]
    AmbiguousOrder(usize, usize, usize, usize),

    #[error("path count exceeds the cap of {0}")]
    PathCap(usize),

    #[error("invalid propagation config: {0}")]
    InvalidConfig(String),

    #[error("norm drift {0:e} exceeds tolerance; reduce dt")]
    NormDrift(f64),

    #[error("family is not diagonal in the diabatic basis (off-diagonal norm {0:e})")]
    NotDiabatic(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown parameter '{0}'")]
    UnknownParameter(String),
}

pub type Result<T> = std::result::Result<T, MlzError>;
