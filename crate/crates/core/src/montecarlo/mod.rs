//! Monte Carlo simulation of the reflected equilibrium strategy.
//!
//! The price follows an Euler–Maruyama discretization of the controlled OU dynamics.
//! After every step each equilibrium player applies the running-supremum rule
//! `Y_i <- max(Y_i, F^{-1}(X, Y_j))` with the opponent's pre-step level, so both
//! players move together once their levels meet. Paths draw their normals from a
//! ChaCha stream keyed by `(seed, path index)`, so arms simulated on the same path
//! index see identical noise.

mod nash;
mod sim;

pub use nash::{nash_test, Deviation, DeviationResult, NashReport};
pub use sim::{simulate, simulate_path, Arm, PathSummary, Policy, SimBatch, SimPath};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Target bound on the discounted payoff lost by truncating at the horizon.
pub const TAIL_TOL: f64 = 1e-4;

/// Discretization and sampling settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Pair path `2m+1` with the negated noise of path `2m`.
    pub antithetic: bool,
}

impl SimConfig {
    /// Config with the horizon from [`SimConfig::horizon_for`].
    pub fn new(p: &ModelParams, dt: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let cfg = SimConfig {
            dt,
            horizon: Self::horizon_for(p),
            n_paths,
            seed,
            antithetic: false,
        };
        cfg.validate(p)?;
        Ok(cfg)
    }

    /// Smallest `T` with `e^{-rho T} theta (|mu| + 5 sigma/sqrt(2k)) / rho <= TAIL_TOL`.
    pub fn horizon_for(p: &ModelParams) -> f64 {
        let scale = p.theta * (p.mu.abs() + 5.0 * p.stationary_sd()) / p.rho;
        ((scale / TAIL_TOL).ln() / p.rho).max(p.rho.recip())
    }

    /// `e^{-rho T} theta (|mu| + 5 sigma/sqrt(2k)) / rho`.
    pub fn tail_bound(&self, p: &ModelParams) -> f64 {
        (-p.rho * self.horizon).exp() * p.theta * (p.mu.abs() + 5.0 * p.stationary_sd()) / p.rho
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).ceil() as usize
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::SimConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.dt >= 0.5 / p.k {
            return Err(Error::SimConfig(format!(
                "dt = {} violates the stability guard dt < 1/(2k) = {}",
                self.dt,
                0.5 / p.k
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::SimConfig(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::SimConfig("n_paths must be positive".into()));
        }
        if self.antithetic && self.n_paths % 2 == 1 {
            return Err(Error::SimConfig(
                "antithetic sampling needs an even path count".into(),
            ));
        }
        Ok(())
    }
}

/// Sample mean of a payoff with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Number of independent samples (antithetic pairs count once).
    pub n: usize,
    pub truncation_bias_bound: f64,
}

impl PayoffEstimate {
    /// Estimate from independent samples.
    pub fn from_samples(samples: &[f64], truncation_bias_bound: f64) -> Self {
        let n = samples.len();
        let mean = pairwise_sum(samples) / n as f64;
        let dev: Vec<f64> = samples.iter().map(|s| (s - mean) * (s - mean)).collect();
        let var = if n > 1 {
            pairwise_sum(&dev) / (n - 1) as f64
        } else {
            0.0
        };
        PayoffEstimate {
            mean,
            std_error: (var / n as f64).sqrt(),
            n,
            truncation_bias_bound,
        }
    }
}

/// Fixed-order pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}
