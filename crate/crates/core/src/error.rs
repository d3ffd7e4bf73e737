use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("reversed integration interval: a = {a} > b = {b}")]
    ReversedInterval { a: f64, b: f64 },

    #[error("time t = {t} precedes the anchor time t0 = {t0}")]
    BeforeStart { t: f64, t0: f64 },

    #[error("initial value must be positive, got {0}")]
    NonPositiveInitial(f64),

    #[error("no positive periodic solution: (1-E)A = {q} <= 1")]
    NoPeriodicSolution { q: f64 },

    #[error("invalid step control: {0}")]
    InvalidStep(String),

    #[error("integration step failed at t = {t}: x = {x} (step too large?)")]
    StepFailure { t: f64, x: f64 },

    #[error("t = {t} lies outside the trajectory span [{start}, {end}]")]
    OutsideSpan { t: f64, start: f64, end: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
