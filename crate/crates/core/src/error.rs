use thiserror::Error;

/// Errors raised by the model, solvers and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("potential is unbounded or in the wrong regime: {0}")]
    Regime(String),

    #[error("grid too small: {mass:.3e} probability in the outer 5% of the grid (state {state})")]
    GridTooSmall { state: usize, mass: f64 },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("degenerate pair ({n}, {m}) at lambda = {lambda}: gap {gap:.3e}")]
    Degenerate { n: usize, m: usize, lambda: f64, gap: f64 },

    #[error("flat direction: adiabaticity integrand vanishes at lambda = {0}")]
    FlatDirection(f64),

    #[error("time step {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("unstable propagation: norm drift {0:.3e}")]
    Unstable(f64),

    #[error("reflection: {mass:.3e} probability in the outer 5% of the grid at t = {t}")]
    Reflection { t: f64, mass: f64 },

    #[error("grid mismatch between wavefunctions")]
    GridMismatch,

    #[error("interpolation failure: {0}")]
    Interpolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
