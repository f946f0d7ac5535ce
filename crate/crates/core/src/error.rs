use alloc::string::String;

use crate::special::Complex;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("gamma function pole at {0}")]
    Pole(Complex),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("Re z = {re} outside the strip ({lo}, {hi})")]
    Strip { re: f64, lo: f64, hi: f64 },
    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },
    #[error("exponent profile is not convex near u = {at}")]
    NonConvex { at: f64 },
    #[error("inadmissible tilt: {0}")]
    InadmissibleTilt(String),
    #[error("tail monotonicity inconclusive at y = {at}: violation {violation:e} is within noise")]
    InconclusiveGrid { at: f64, violation: f64 },
    #[error("exponent is not in class N: {0}")]
    NotInN(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("Mellin transform does not decay on the line Re z = {c}")]
    InsufficientDecay { c: f64 },
    #[error("no closed form registered for {0}")]
    NoClosedForm(String),
    #[error("effective sample size collapsed: {ess:.1} for {n} requested samples")]
    EssCollapse { ess: f64, n: usize },
    #[error("jump rate is not finite at cutoff {0}")]
    InfiniteRate(f64),
    #[error("sample size {got} below the minimum {min}")]
    SampleSize { got: usize, min: usize },
    #[error("positivity parameter {rho} is not attainable for alpha = {alpha}")]
    UnattainableRho { alpha: f64, rho: f64 },
    #[error("{exhausted} of {total} paths reached the step limit")]
    StepLimit { exhausted: usize, total: usize },
    #[error("recurrence path meets a singularity at {0}")]
    SingularPath(Complex),
    #[error("point {0} is too close to a pole")]
    PoleProximity(Complex),
}

pub type Result<T> = core::result::Result<T, Error>;
