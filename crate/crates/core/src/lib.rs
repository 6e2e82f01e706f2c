//! Two-player singular stochastic investment game between renewable producers
//! with price impact.
//!
//! * [`params`] market constants and simplex geometry;
//! * [`psi`] fundamental solution of the discounted OU generator;
//! * [`static_game`] closed-form one-shot game;
//! * [`boundary`] free boundary and option-value coefficient of the dynamic game;
//! * [`valuefn`] candidate value functions and residual diagnostics;
//! * [`montecarlo`] simulation of the reflected equilibrium strategy.

pub mod boundary;
pub mod error;
pub mod interp;
pub mod montecarlo;
pub mod params;
pub mod psi;
pub mod region;
pub mod roots;
pub mod static_game;
pub mod valuefn;

pub use error::{Error, Result};
pub use params::{reflect, validate, ModelParams, Player, SimplexPoint, EPS_GEOM};
pub use psi::{PsiEvaluator, PsiValues};
pub use region::{JointLabel, Membership, Region};
