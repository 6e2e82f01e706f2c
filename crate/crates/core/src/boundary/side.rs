//! Boundary on the face `y1 + y2 = theta`, where `m1 = 0`.

use serde::Serialize;

use super::gap;
use crate::error::{Error, Result};
use crate::params::SimplexPoint;
use crate::psi::PsiEvaluator;
use crate::roots::illinois;

/// Root of `U` at one point of the face.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SideRoot {
    pub y: SimplexPoint,
    /// Root in the shifted price `F~ = F + beta <1,y>`.
    pub ftilde: f64,
    pub f: f64,
    /// `U(F~)/psi(F~)` at the returned root.
    pub residual: f64,
    /// `dF/dy1` along the face.
    pub slope: f64,
}

/// `U(z)/psi(z) = 1 + (rho+k) (c - R~1(z, y)) psi'(z)/psi(z)`.
pub fn u_over_psi(psi: &PsiEvaluator, y: SimplexPoint, z: f64) -> Result<f64> {
    let p = psi.params();
    let v = psi.eval(z)?;
    Ok(1.0 + (p.rho + p.k) * gap(p, z, y) * v.r1)
}

/// Solves `U = 0` for the shifted boundary at `y`.
///
/// `U/psi = 1` where `c = R~1`, and `U/psi` decreases beyond that point; the root
/// lies within `1/(psi'/psi)` of it, which gives a guaranteed bracket.
pub fn solve_side_ab(psi: &PsiEvaluator, y: SimplexPoint) -> Result<SideRoot> {
    let p = *psi.params();
    if !y.in_simplex(p.theta) {
        return Err(Error::OutsideSimplex {
            y1: y.y1,
            y2: y.y2,
            theta: p.theta,
        });
    }
    let rk = p.rho + p.k;
    // Zero of c - R~1(., y).
    let lo = rk * p.c - (p.mu * p.k - p.beta * rk * y.total() - p.beta * p.k * y.y1) / p.rho;
    let hi = lo + 1.0 / psi.eval(lo)?.r1;
    let mut failure = None;
    let root = illinois(
        |z| match u_over_psi(psi, y, z) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-13,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let z = root.ok_or(Error::RootNotBracketed {
        lo,
        hi,
        y1: y.y1,
        y2: y.y2,
    })?;
    let residual = u_over_psi(psi, y, z)?;
    Ok(SideRoot {
        y,
        ftilde: z,
        f: z - p.beta * y.total(),
        residual,
        slope: side_slope(psi, y, z)?,
    })
}

/// `dF~/dy1` along the face at a root `z`, by implicit differentiation of `U/psi`.
pub fn side_slope(psi: &PsiEvaluator, y: SimplexPoint, z: f64) -> Result<f64> {
    let p = psi.params();
    let v = psi.eval(z)?;
    let rk = p.rho + p.k;
    let g = gap(p, z, y);
    let d_own = v.r1 * p.beta * p.k / p.rho;
    let d_z = rk * v.q0n * g - v.r1;
    Ok(-d_own / d_z)
}
