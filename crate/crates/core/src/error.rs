use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("instance has no scenarios")]
    EmptyInstance,
    #[error("scenario {index} has nonpositive weight {weight}")]
    NonpositiveWeight { index: usize, weight: f64 },
    #[error("scenario {index} is inverted: lower {lower} > upper {upper}")]
    InvertedInterval { index: usize, lower: f64, upper: f64 },
    #[error("scenario {index} has a non-finite value")]
    NonFinite { index: usize },
    #[error("level {0} is outside the open unit interval")]
    AlphaOutOfRange(f64),
    #[error("integration level {0} is outside [0, 1]")]
    BetaOutOfRange(f64),
    #[error("mass {mass} is outside [0, {available}]")]
    MassOutOfRange { mass: f64, available: f64 },
    #[error("mixing weight {0} is outside [0, 1]")]
    ThetaOutOfRange(f64),
    #[error("distribution has negative support point {0}")]
    NegativeSupport(f64),
    #[error("conditional law needs at least one member with positive mass")]
    EmptyConditionalLaw,
    #[error("invalid law parameters: {0}")]
    InvalidLaw(&'static str),
    #[error("grid size must be at least 2, got {0}")]
    InvalidGridSize(usize),
    #[error("comonotone coupling violated at u = {u}: lower {lower} > upper {upper}")]
    CouplingViolation { u: f64, lower: f64, upper: f64 },
    #[error("mean {kappa} is outside the Aumann interval [{lo}, {hi}]")]
    KappaInfeasible { kappa: f64, lo: f64, hi: f64 },
    #[error("quantile level value {m} is outside the attainability range [{lo}, {hi}]")]
    MOutOfRange { m: f64, lo: f64, hi: f64 },
    #[error("median {m} is infeasible: P(y_U < m) = {p_minus}, P(y_L > m) = {p_plus}")]
    InfeasibleMedian { m: f64, p_minus: f64, p_plus: f64 },
    #[error("m = {m} is outside the marginal median span [{lo}, {hi}]")]
    MOutsideMedianSpan { m: f64, lo: f64, hi: f64 },
    #[error("power r = {0} needs an odd integer r >= 1, or r > 0 with nonnegative lowers")]
    InvalidPower(f64),
    #[error("moment target {mu} is outside [{lo}, {hi}]")]
    InfeasibleMoment { mu: f64, lo: f64, hi: f64 },
    #[error("quantile restriction q = {q} at level {alpha} is outside [{lo}, {hi}]")]
    InfeasibleQuantile { alpha: f64, q: f64, lo: f64, hi: f64 },
    #[error("selection does not satisfy the restriction")]
    RestrictionViolated,
    #[error("selection does not match the instance: {0}")]
    SelectionMismatch(&'static str),
    #[error("instance has {len} scenarios, the exhaustive oracle accepts at most {max}")]
    InstanceTooLarge { len: usize, max: usize },
    #[error("no selection on the candidate grid satisfies the restriction")]
    NoFeasibleSelection,
    #[error("invalid target set: {0}")]
    InvalidTarget(&'static str),
}
