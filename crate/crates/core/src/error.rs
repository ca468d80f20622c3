use crate::lambertw::Branch;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("body {index}: mass must be > 0 and finite, got {mass}")]
    NonPositiveMass { index: usize, mass: f64 },
    #[error("a system needs at least two bodies, got {0}")]
    FewerThanTwoBodies(usize),
    #[error("gravitational constant must be > 0 and finite, got {0}")]
    NonPositiveGravity(f64),
    #[error("body {0}: position and velocity must be finite")]
    NonFiniteState(usize),
    #[error("position at the origin has no polar angle")]
    OriginSingularity,
    #[error("body index {index} out of range for {len} bodies")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("z = {z} is outside the domain of the {branch:?} branch")]
    DomainError { z: f64, branch: Branch },
    #[error("derivative of W is singular at the branch point -1/e")]
    BranchPointSingularity,
    #[error("Lambert W iteration failed to converge for z = {0}")]
    NoConvergence(f64),
    #[error("separation constant B = {0} is not positive")]
    NonPositiveB(f64),
    #[error("initial separation x0 = {0} is not positive")]
    NonPositiveX0(f64),
    #[error("closed form left its evaluable window at t = {t} (window ends at {window_end})")]
    WArgOutOfDomain { t: f64, window_end: f64 },
    #[error("bodies {0} and {1} collided (distance {distance}) at t = {t}", .pair.0, .pair.1)]
    CollisionDetected {
        pair: (usize, usize),
        distance: f64,
        t: f64,
    },
    #[error("integration exceeded {0} steps")]
    MaxStepsExceeded(usize),
    #[error("step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("radicand A/x + B is negative at the initial point ({0})")]
    RadicandNegative(f64),
    #[error("quadrature could not reach tolerance {tolerance} (estimate {estimate}, error {error})")]
    ToleranceNotMet {
        tolerance: f64,
        estimate: f64,
        error: f64,
    },
    #[error("output times must be ascending and start at or after t0")]
    BadTimes,
}
