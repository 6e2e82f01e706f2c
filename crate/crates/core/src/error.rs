use thiserror::Error;

/// Errors raised by the solvers and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0}")]
    InvalidParams(String),

    #[error("point ({y1}, {y2}) lies outside the simplex of size {theta}")]
    OutsideSimplex { y1: f64, y2: f64, theta: f64 },

    #[error("inadmissible installation: {0}")]
    Inadmissible(String),

    #[error("{0}")]
    Domain(String),

    #[error("quadrature for psi at x = {x} did not converge (relative change {rel_change:.3e})")]
    QuadratureNonConvergence { x: f64, rel_change: f64 },

    #[error("{what} is not positive at x = {x} (value {value:.6e})")]
    NonPositive {
        what: &'static str,
        x: f64,
        value: f64,
    },

    #[error("no sign change of U on [{lo}, {hi}] for y = ({y1}, {y2})")]
    RootNotBracketed { lo: f64, hi: f64, y1: f64, y2: f64 },

    #[error("root finder failed: {0}")]
    RootFailure(String),

    #[error("diagonal ODE singular near s = {s} (denominator {denominator:.3e})")]
    Singularity { s: f64, denominator: f64 },

    #[error("diagonal boundary not strictly increasing near s = {s}")]
    NonMonotone { s: f64 },

    #[error("m1 blow-up (|m1| = {value:.3e}) at y = ({y1}, {y2})")]
    Blowup { y1: f64, y2: f64, value: f64 },

    #[error("invalid simulation config: {0}")]
    SimConfig(String),
}

impl Error {
    /// True for errors caused by the inputs rather than by a numerical failure.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::OutsideSimplex { .. }
                | Error::Inadmissible(_)
                | Error::SimConfig(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
