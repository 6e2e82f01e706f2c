//! Boundary on the diagonal `y1 = y2 = s`.

use serde::Serialize;

use super::gap;
use crate::error::{Error, Result};
use crate::params::{ModelParams, SimplexPoint};
use crate::psi::PsiEvaluator;

/// Right-hand side used for `d/ds F~(s, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SlopeRule {
    /// Obtained by differentiating the diagonal value of `m1` implied by the two
    /// one-sided fits along the diagonal and matching it with the diagonal `m1` ODE.
    ChainRule,
    /// The compact closed form `beta N / D`. Kept for comparison: under the reference
    /// parameters it produces a non-monotone diagonal and the solver aborts.
    Compact,
}

/// Tabulated diagonal, nodes `s_i = i theta / (2n)`.
#[derive(Debug, Clone, Serialize)]
pub struct DiagonalTable {
    pub s: Vec<f64>,
    /// `F~(s, s) = F(s, s) + 2 beta s`.
    pub ftilde: Vec<f64>,
    pub f: Vec<f64>,
    /// `d/ds F~(s, s)`.
    pub dftilde: Vec<f64>,
    /// `D / psi^3 = Q0'/psi^2 + (rho+k)(c - R~1) Q1/psi^2` at the node.
    pub denominator: Vec<f64>,
    pub rule: SlopeRule,
}

impl DiagonalTable {
    /// `d/ds F(s, s)` at the nodes.
    pub fn df(&self, beta: f64) -> Vec<f64> {
        self.dftilde.iter().map(|d| d - 2.0 * beta).collect()
    }
}

/// `F~` at `C`: `(c rho (rho+k) + beta (rho+k) theta - mu k) / rho`.
pub fn ftilde_at_c(p: &ModelParams) -> f64 {
    (p.c * p.rho * (p.rho + p.k) + p.beta * (p.rho + p.k) * p.theta - p.mu * p.k) / p.rho
}

/// `F` at `C`: `(c rho (rho+k) + beta k theta - mu k) / rho`.
pub fn f_at_c(p: &ModelParams) -> f64 {
    (p.c * p.rho * (p.rho + p.k) + p.beta * p.k * p.theta - p.mu * p.k) / p.rho
}

/// `(d/ds F~(s, s), D/psi^3)` at `(s, z)`.
pub fn diagonal_slope(psi: &PsiEvaluator, rule: SlopeRule, s: f64, z: f64) -> Result<(f64, f64)> {
    let p = psi.params();
    let v = psi.eval(z)?;
    let rk = p.rho + p.k;
    let g = gap(p, z, SimplexPoint::new(s, s));
    let dhat = v.q0pn + rk * g * v.q1n;
    let slope = match rule {
        SlopeRule::ChainRule => {
            let n0 = 1.0 + rk * g * v.r1;
            let bracket = 2.0 * v.r1 * n0
                + v.q0n * (p.beta * p.k * s / p.rho + rk * g)
                + (2.0 * p.rho + 3.0 * p.k) * v.r1 / p.rho;
            p.beta * v.q0n * bracket / dhat
        }
        SlopeRule::Compact => {
            let n_over_psi = (2.0 * p.rho + 3.0 * p.k) / p.rho * v.r1 + rk * g * v.r2 + v.r1;
            p.beta * n_over_psi / ((2.0 * v.ln_psi).exp() * dhat)
        }
    };
    Ok((slope, dhat))
}

const MAX_HALVINGS: u32 = 6;
const DENOM_FLOOR: f64 = 1e-12;

/// Integrates the diagonal ODE from `C` down to the origin with RK4 on `n` steps.
pub fn solve_diagonal(psi: &PsiEvaluator, n: usize, rule: SlopeRule) -> Result<DiagonalTable> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "diagonal grid needs n >= 2, got {n}"
        )));
    }
    let p = *psi.params();
    let h = 0.5 * p.theta / n as f64;
    let mut z = vec![0.0; n + 1];
    let mut dz = vec![0.0; n + 1];
    let mut den = vec![0.0; n + 1];
    z[n] = ftilde_at_c(&p);
    let (d0, den0) = diagonal_slope(psi, rule, 0.5 * p.theta, z[n])?;
    if den0.abs() < DENOM_FLOOR {
        return Err(Error::Singularity {
            s: 0.5 * p.theta,
            denominator: den0,
        });
    }
    dz[n] = d0;
    den[n] = den0;
    let sign = den0.signum();
    for i in (0..n).rev() {
        let s1 = (i + 1) as f64 * h;
        z[i] = step(psi, rule, s1, z[i + 1], -h, sign, 0)?;
        let s0 = i as f64 * h;
        let (d, dn) = diagonal_slope(psi, rule, s0, z[i])?;
        check_denominator(s0, dn, sign)?;
        dz[i] = d;
        den[i] = dn;
    }
    let s: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let f: Vec<f64> = s
        .iter()
        .zip(&z)
        .map(|(s, z)| z - 2.0 * p.beta * s)
        .collect();
    for i in 0..n {
        if f[i + 1] <= f[i] {
            return Err(Error::NonMonotone { s: s[i] });
        }
    }
    Ok(DiagonalTable {
        s,
        ftilde: z,
        f,
        dftilde: dz,
        denominator: den,
        rule,
    })
}

fn check_denominator(s: f64, dn: f64, sign: f64) -> Result<()> {
    if dn.abs() < DENOM_FLOOR || dn.signum() != sign || !dn.is_finite() {
        Err(Error::Singularity { s, denominator: dn })
    } else {
        Ok(())
    }
}

/// One RK4 step of size `dt` from `(s, z)`; subdivides while a stage meets a
/// vanishing or sign-changing denominator.
fn step(
    psi: &PsiEvaluator,
    rule: SlopeRule,
    s: f64,
    z: f64,
    dt: f64,
    sign: f64,
    depth: u32,
) -> Result<f64> {
    let stage = |ss: f64, zz: f64| -> Result<f64> {
        let (d, dn) = diagonal_slope(psi, rule, ss, zz)?;
        check_denominator(ss, dn, sign)?;
        Ok(d)
    };
    let attempt = || -> Result<f64> {
        let k1 = stage(s, z)?;
        let k2 = stage(s + 0.5 * dt, z + 0.5 * dt * k1)?;
        let k3 = stage(s + 0.5 * dt, z + 0.5 * dt * k2)?;
        let k4 = stage(s + dt, z + dt * k3)?;
        Ok(z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    };
    match attempt() {
        Ok(v) => Ok(v),
        Err(Error::Singularity { .. }) if depth < MAX_HALVINGS => {
            let mid = step(psi, rule, s, z, 0.5 * dt, sign, depth + 1)?;
            step(psi, rule, s + 0.5 * dt, mid, 0.5 * dt, sign, depth + 1)
        }
        Err(e) => Err(e),
    }
}
