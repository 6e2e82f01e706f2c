//! One-shot game: both players may install only at time zero.
//!
//! With final levels `Y = y + I` the expected profit of player `i` is
//! `Y_i (x rho + mu k - beta k (Y_1 + Y_2)) / (rho (rho + k)) - c I_i`, a concave
//! quadratic in `Y_i`. Everything below follows from that formula and from the
//! affine price index `A(x) = (x rho + mu k - c rho (rho + k)) / (2 beta k)`.

use crate::error::{Error, Result};
use crate::params::{ModelParams, Player, SimplexPoint, EPS_GEOM};
use crate::region::{Membership, Region};

/// Initial price and capacities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticState {
    pub x: f64,
    pub y: SimplexPoint,
}

impl StaticState {
    pub fn new(x: f64, y1: f64, y2: f64) -> Self {
        StaticState {
            x,
            y: SimplexPoint::new(y1, y2),
        }
    }
}

/// Time-zero installations of both players.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticInstallation {
    pub i1: f64,
    pub i2: f64,
}

impl StaticInstallation {
    pub fn get(&self, player: Player) -> f64 {
        match player {
            Player::One => self.i1,
            Player::Two => self.i2,
        }
    }

    /// Final levels `y + I`.
    pub fn levels(&self, y: SimplexPoint) -> SimplexPoint {
        SimplexPoint::new(y.y1 + self.i1, y.y2 + self.i2)
    }

    pub fn swap(&self) -> Self {
        StaticInstallation {
            i1: self.i2,
            i2: self.i1,
        }
    }
}

/// `A(x)`, the price expressed in units of power.
pub fn a_of_x(p: &ModelParams, x: f64) -> f64 {
    (x * p.rho + p.mu * p.k - p.c * p.rho * (p.rho + p.k)) / (2.0 * p.beta * p.k)
}

/// Inverse of [`a_of_x`].
pub fn a_inverse(p: &ModelParams, a: f64) -> f64 {
    (2.0 * p.beta * p.k * a + p.c * p.rho * (p.rho + p.k) - p.mu * p.k) / p.rho
}

/// Discounted profit of never installing again: `y_i (x rho + mu k - beta k <1,y>) / (rho (rho+k))`.
pub fn r_i(p: &ModelParams, x: f64, y: SimplexPoint, player: Player) -> f64 {
    y.get(player) * (x * p.rho + p.mu * p.k - p.beta * p.k * y.total()) / (p.rho * (p.rho + p.k))
}

fn check_admissible(p: &ModelParams, s: &StaticState, inst: &StaticInstallation) -> Result<()> {
    if !(inst.i1 >= 0.0 && inst.i2 >= 0.0) {
        return Err(Error::Inadmissible(format!(
            "negative installation ({}, {})",
            inst.i1, inst.i2
        )));
    }
    let total = s.y.total() + inst.i1 + inst.i2;
    if total > p.theta + EPS_GEOM {
        return Err(Error::Inadmissible(format!(
            "total capacity {total} exceeds theta = {}",
            p.theta
        )));
    }
    Ok(())
}

/// Expected discounted profit of `player` when both install `inst` at time zero.
pub fn static_payoff(
    p: &ModelParams,
    s: &StaticState,
    inst: &StaticInstallation,
    player: Player,
) -> Result<f64> {
    check_admissible(p, s, inst)?;
    Ok(r_i(p, s.x, inst.levels(s.y), player) - p.c * inst.get(player))
}

/// Unconstrained-below target level of player `i` against a final opponent level `yj`.
fn target(p: &ModelParams, a: f64, yj: f64) -> f64 {
    (p.theta - yj).min(a - 0.5 * yj)
}

/// Optimal installation of `player` given the opponent's installation.
pub fn best_response(
    p: &ModelParams,
    s: &StaticState,
    opponent_install: f64,
    player: Player,
) -> f64 {
    let (own, other) = s.y.own_other(player);
    let a = a_of_x(p, s.x);
    (target(p, a, other + opponent_install) - own).max(0.0)
}

/// Canonical Nash equilibrium.
///
/// When capacity saturates with both players below `theta/2` the equilibrium is a
/// segment; the returned point has both final levels equal to `theta/2`.
pub fn static_equilibrium(p: &ModelParams, s: &StaticState) -> StaticInstallation {
    let a = a_of_x(p, s.x);
    let (y1, y2) = (s.y.y1, s.y.y2);
    let half = 0.5 * p.theta;

    // Nobody installs.
    if target(p, a, y2) <= y1 && target(p, a, y1) <= y2 {
        return StaticInstallation { i1: 0.0, i2: 0.0 };
    }
    // Both install to the unconstrained intersection.
    let star = 2.0 * a / 3.0;
    if star > y1 && star > y2 && 2.0 * star <= p.theta {
        return StaticInstallation {
            i1: star - y1,
            i2: star - y2,
        };
    }
    // Saturation with both players at half capacity.
    if a >= 0.75 * p.theta && y1 <= half && y2 <= half {
        return StaticInstallation {
            i1: half - y1,
            i2: half - y2,
        };
    }
    // Only one player installs. When capacity saturates both one-sided points can be
    // equilibria; the player with the lower level moves, so nobody exceeds theta/2.
    let one_sided = |own: f64, other: f64| {
        let t = target(p, a, other);
        (t > own && target(p, a, t) <= other).then_some(t - own)
    };
    let order = if y1 <= y2 {
        [Player::One, Player::Two]
    } else {
        [Player::Two, Player::One]
    };
    for player in order {
        let (own, other) = s.y.own_other(player);
        if let Some(i) = one_sided(own, other) {
            return match player {
                Player::One => StaticInstallation { i1: i, i2: 0.0 },
                Player::Two => StaticInstallation { i1: 0.0, i2: i },
            };
        }
    }
    unreachable!(
        "static equilibrium case analysis is exhaustive (x = {}, y = {:?})",
        s.x, s.y
    )
}

/// Checks `(Y'_i - Y_i)(2A - Y_j - Y'_i - Y_i) <= 0` for every admissible deviation on a
/// grid of step `theta/1000`, for both players.
pub fn nash_certificate(p: &ModelParams, s: &StaticState, inst: &StaticInstallation) -> bool {
    nash_certificate_with_step(p, s, inst, p.theta / 1000.0)
}

pub fn nash_certificate_with_step(
    p: &ModelParams,
    s: &StaticState,
    inst: &StaticInstallation,
    step: f64,
) -> bool {
    if check_admissible(p, s, inst).is_err() {
        return false;
    }
    let a = a_of_x(p, s.x);
    let levels = inst.levels(s.y);
    let tol = 1e-12 * (1.0 + a.abs() + p.theta);
    [Player::One, Player::Two].into_iter().all(|player| {
        let (yi, yj) = levels.own_other(player);
        let (own0, _) = s.y.own_other(player);
        let hi = p.theta - yj;
        let n = ((hi - own0) / step).ceil().max(0.0) as usize;
        (0..=n).all(|m| {
            let dev = (own0 + m as f64 * step).min(hi);
            (dev - yi) * (2.0 * a - yj - dev - yi) <= tol
        })
    })
}

/// One-shot boundary `F_i(y) = A^{-1}(y_i + y_j/2)` on the half `y_i <= y_j`.
pub fn static_boundary_f(p: &ModelParams, player: Player, y: SimplexPoint) -> Result<f64> {
    let (own, other) = y.own_other(player);
    if own > other {
        return Err(Error::Domain(format!(
            "boundary of player {} is defined for y_{} <= y_{}, got ({}, {})",
            player.index(),
            player.index(),
            player.other().index(),
            y.y1,
            y.y2
        )));
    }
    Ok(a_inverse(p, own + 0.5 * other))
}

fn membership(p: &ModelParams, x: f64, own: f64, other: f64) -> Membership {
    if own + other >= p.theta - EPS_GEOM {
        return Membership::Saturated;
    }
    if own <= other {
        if x < a_inverse(p, own + 0.5 * other) {
            Membership::Free
        } else {
            Membership::Install
        }
    } else if own >= 0.5 * p.theta {
        Membership::Saturated
    } else if x < a_inverse(p, 1.5 * own) {
        Membership::Prolonged
    } else {
        Membership::Install
    }
}

/// Waiting/installation classification of both players.
pub fn static_region(p: &ModelParams, s: &StaticState) -> Region {
    Region::new(
        membership(p, s.x, s.y.y1, s.y.y2),
        membership(p, s.x, s.y.y2, s.y.y1),
    )
}

/// Symmetric joint target `F^{-1}(x)`: both levels `min(2A/3, theta/2)`.
pub fn diagonal_inverse(p: &ModelParams, x: f64) -> f64 {
    (2.0 * a_of_x(p, x) / 3.0).min(0.5 * p.theta)
}

/// Sectional target of a player facing level `other`: `min(A - other/2, theta - other)`.
pub fn sectional_inverse(p: &ModelParams, x: f64, other: f64) -> f64 {
    target(p, a_of_x(p, x), other)
}

/// Equilibrium value of `player` from the four-case table.
pub fn static_value(p: &ModelParams, s: &StaticState, player: Player) -> f64 {
    let region = static_region(p, s);
    let (m_own, m_other) = match player {
        Player::One => (region.player1, region.player2),
        Player::Two => (region.player2, region.player1),
    };
    let (own, other) = s.y.own_other(player);
    let r = |own_level: f64, other_level: f64| {
        let y = match player {
            Player::One => SimplexPoint::new(own_level, other_level),
            Player::Two => SimplexPoint::new(other_level, own_level),
        };
        r_i(p, s.x, y, player)
    };
    match (m_own.waits(), m_other.waits()) {
        (true, true) => r(own, other),
        (true, false) => r(own, sectional_inverse(p, s.x, own)),
        (false, true) => {
            let t = sectional_inverse(p, s.x, other);
            r(t, other) - p.c * (t - own)
        }
        (false, false) => {
            let t = diagonal_inverse(p, s.x);
            r(t, t) - p.c * (t - own)
        }
    }
}

/// Aggregate installation of a social planner: `min(A - ybar, theta - ybar) v 0`.
pub fn pareto_install(p: &ModelParams, s: &StaticState) -> f64 {
    let ybar = s.y.total();
    (a_of_x(p, s.x) - ybar).min(p.theta - ybar).max(0.0)
}
