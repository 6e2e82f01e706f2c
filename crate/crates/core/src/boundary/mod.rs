//! Free boundary of the dynamic game and the option-value coefficient `m1`.
//!
//! The boundary of player 1 is stored as `G(own, other)` on the half `own <= other`;
//! player 2 uses the reflection. It is pinned by two families of anchors:
//! the diagonal `s -> F(s, s)` from an ODE integrated down from `C`, and the face
//! `y1 + y2 = theta` where `m1 = 0` turns smooth fit into a scalar root problem.
//! In between, `G` is filled by a configurable monotone rule.

mod curve;
mod diagonal;
mod mgrid;
mod side;

pub use curve::{AdmissibilityReport, BoundaryConfig, BoundaryCurve, FillRule};
pub use diagonal::{diagonal_slope, f_at_c, ftilde_at_c, solve_diagonal, DiagonalTable, SlopeRule};
pub use mgrid::{solve_m, MGrid, MGridDiagnostics};
pub use side::{side_slope, solve_side_ab, u_over_psi, SideRoot};

use crate::params::{ModelParams, SimplexPoint};

/// `R~1(x, y) = x/(rho+k) + (mu k - beta (rho+k) <1,y> - beta k y1) / (rho (rho+k))`,
/// the `y1`-derivative of `R1` written in the shifted price `x + beta <1,y>`.
pub fn rtilde1(p: &ModelParams, x: f64, y: SimplexPoint) -> f64 {
    let rk = p.rho + p.k;
    x / rk + (p.mu * p.k - p.beta * rk * y.total() - p.beta * p.k * y.y1) / (p.rho * rk)
}

/// `c - R~1(x, y)`.
pub(crate) fn gap(p: &ModelParams, x: f64, y: SimplexPoint) -> f64 {
    p.c - rtilde1(p, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Player;
    use crate::static_game::r_i;

    #[test]
    fn rtilde_is_the_shifted_own_derivative_of_r1() {
        let p = ModelParams {
            k: 0.7,
            mu: 0.4,
            sigma: 1.1,
            beta: 0.3,
            rho: 0.9,
            c: 1.2,
            theta: 1.5,
        };
        let h = 1e-6;
        for &(x, y1, y2) in &[(1.0, 0.2, 0.5), (2.5, 0.0, 1.2), (-0.3, 0.7, 0.7)] {
            let y = SimplexPoint::new(y1, y2);
            let d = (r_i(&p, x, SimplexPoint::new(y1 + h, y2), Player::One)
                - r_i(&p, x, SimplexPoint::new(y1 - h, y2), Player::One))
                / (2.0 * h);
            let shifted = x + p.beta * y.total();
            assert!((rtilde1(&p, shifted, y) - d).abs() < 1e-9);
        }
    }
}
