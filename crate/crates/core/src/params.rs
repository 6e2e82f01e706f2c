//! Market constants and simplex geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `y1 + y2 <= theta`.
pub const EPS_GEOM: f64 = 1e-12;

/// The seven market constants.
///
/// `k` mean-reversion speed, `mu` long-run price level, `sigma` volatility,
/// `beta` price impact per unit of installed power, `rho` discount rate,
/// `c` unit installation cost, `theta` total capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub k: f64,
    pub mu: f64,
    pub sigma: f64,
    pub beta: f64,
    pub rho: f64,
    pub c: f64,
    pub theta: f64,
}

impl ModelParams {
    /// Checked constructor.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: f64,
        mu: f64,
        sigma: f64,
        beta: f64,
        rho: f64,
        c: f64,
        theta: f64,
    ) -> Result<Self> {
        validate(ModelParams {
            k,
            mu,
            sigma,
            beta,
            rho,
            c,
            theta,
        })
    }

    /// Reference set k = c = rho = mu = theta = sigma = 1, beta = 1/2.
    pub fn reference() -> Self {
        ModelParams {
            k: 1.0,
            mu: 1.0,
            sigma: 1.0,
            beta: 0.5,
            rho: 1.0,
            c: 1.0,
            theta: 1.0,
        }
    }

    /// Parses and validates a JSON object with all seven keys.
    pub fn from_json(text: &str) -> Result<Self> {
        let p: ModelParams = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParams(format!("cannot parse parameters: {e}")))?;
        validate(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }

    /// The point C = (theta/2, theta/2).
    pub fn corner_c(&self) -> SimplexPoint {
        SimplexPoint {
            y1: 0.5 * self.theta,
            y2: 0.5 * self.theta,
        }
    }

    /// Stationary standard deviation of the uncontrolled price.
    pub fn stationary_sd(&self) -> f64 {
        self.sigma / (2.0 * self.k).sqrt()
    }
}

/// Returns `p` unchanged when every sign constraint holds.
pub fn validate(p: ModelParams) -> Result<ModelParams> {
    let fields = [
        ("k", p.k),
        ("mu", p.mu),
        ("sigma", p.sigma),
        ("beta", p.beta),
        ("rho", p.rho),
        ("c", p.c),
        ("theta", p.theta),
    ];
    for (name, v) in fields {
        if !v.is_finite() {
            return Err(Error::InvalidParams(format!("{name} must be finite")));
        }
    }
    for (name, v) in [
        ("k", p.k),
        ("sigma", p.sigma),
        ("beta", p.beta),
        ("rho", p.rho),
        ("theta", p.theta),
    ] {
        if v <= 0.0 {
            return Err(Error::InvalidParams(format!("{name} must be positive")));
        }
    }
    if p.c < 0.0 {
        return Err(Error::InvalidParams("c must be non-negative".into()));
    }
    Ok(p)
}

/// Installed capacities `(y1, y2)` of the two players.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    pub y1: f64,
    pub y2: f64,
}

impl SimplexPoint {
    pub const fn new(y1: f64, y2: f64) -> Self {
        SimplexPoint { y1, y2 }
    }

    /// Checked constructor against the closed simplex of size `theta`.
    pub fn checked(y1: f64, y2: f64, theta: f64) -> Result<Self> {
        let p = SimplexPoint { y1, y2 };
        if p.in_simplex(theta) {
            Ok(p)
        } else {
            Err(Error::OutsideSimplex { y1, y2, theta })
        }
    }

    pub fn in_simplex(&self, theta: f64) -> bool {
        self.y1 >= 0.0 && self.y2 >= 0.0 && self.y1 + self.y2 <= theta + EPS_GEOM
    }

    pub fn total(&self) -> f64 {
        self.y1 + self.y2
    }

    /// Level of `player` (1 or 2).
    pub fn get(&self, player: Player) -> f64 {
        match player {
            Player::One => self.y1,
            Player::Two => self.y2,
        }
    }

    /// `(own, other)` from the point of view of `player`.
    pub fn own_other(&self, player: Player) -> (f64, f64) {
        match player {
            Player::One => (self.y1, self.y2),
            Player::Two => (self.y2, self.y1),
        }
    }
}

/// Swaps the two coordinates.
pub fn reflect(p: SimplexPoint) -> SimplexPoint {
    SimplexPoint { y1: p.y2, y2: p.y1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Player> {
        match i {
            1 => Some(Player::One),
            2 => Some(Player::Two),
            _ => None,
        }
    }
}
