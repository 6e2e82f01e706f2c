//! Fundamental solution `psi` of the discounted OU generator.
//!
//! `psi(x) = 1/Gamma(a) * int_0^inf t^(a-1) exp(-t^2/2 + b t) dt` with
//! `a = rho/k`, `b = (x - mu) kappa`, `kappa = sqrt(2k)/sigma`. Each derivative in
//! `x` multiplies the integrand by `kappa t`, so every quantity used downstream is
//! a moment of the normalized density `p(t) ~ t^(a-1) exp(-t^2/2 + b t)`.
//!
//! The integral is computed with an exp-sinh trapezoid rule
//! `t = exp(pi/2 sinh(tau))` in log space, centred on the peak of the integrand and
//! refined by halving the step until two successive levels agree.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Default relative agreement required between successive refinement levels.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Log-weight cut-off relative to the peak.
const LOG_CUTOFF: f64 = 60.0;
const MAX_LEVELS: usize = 12;
const MAX_NODES_PER_SIDE: usize = 100_000;

/// `psi` and its derivatives at one point, stored as ratios to `psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValues {
    pub x: f64,
    /// `ln psi(x)`.
    pub ln_psi: f64,
    /// `psi'/psi`, `psi''/psi`, `psi'''/psi`.
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// `Q0/psi^2` with `Q0 = psi psi'' - psi'^2`.
    pub q0n: f64,
    /// `Q0'/psi^2 = (psi psi''' - psi' psi'')/psi^2`.
    pub q0pn: f64,
    /// `Q1/psi^2` with `Q1 = psi' psi''' - psi''^2`.
    pub q1n: f64,
    /// Largest relative change between the last two refinement levels.
    pub rel_err: f64,
}

impl PsiValues {
    pub fn psi(&self) -> f64 {
        self.ln_psi.exp()
    }

    /// Derivative of order 0..=3.
    pub fn deriv(&self, order: usize) -> f64 {
        let ratio = match order {
            0 => 1.0,
            1 => self.r1,
            2 => self.r2,
            3 => self.r3,
            _ => panic!("derivative order {order} not supported"),
        };
        ratio * self.psi()
    }

    pub fn q0(&self) -> f64 {
        self.q0n * (2.0 * self.ln_psi).exp()
    }

    pub fn q1(&self) -> f64 {
        self.q1n * (2.0 * self.ln_psi).exp()
    }

    pub fn q0_prime(&self) -> f64 {
        self.q0pn * (2.0 * self.ln_psi).exp()
    }
}

/// Immutable quadrature evaluator; safe to share between threads.
#[derive(Debug, Clone)]
pub struct PsiEvaluator {
    params: ModelParams,
    a: f64,
    kappa: f64,
    ln_gamma_a: f64,
    tol: f64,
}

impl PsiEvaluator {
    pub fn new(params: ModelParams) -> Self {
        Self::with_tolerance(params, DEFAULT_TOL)
    }

    pub fn with_tolerance(params: ModelParams, tol: f64) -> Self {
        let a = params.rho / params.k;
        PsiEvaluator {
            params,
            a,
            kappa: (2.0 * params.k).sqrt() / params.sigma,
            ln_gamma_a: ln_gamma(a),
            tol,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Scale factor `kappa = sqrt(2k)/sigma`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Single derivative, order 0..=3.
    pub fn psi(&self, x: f64, order: usize) -> Result<f64> {
        if order > 3 {
            return Err(Error::Domain(format!(
                "derivative order {order} not in 0..=3"
            )));
        }
        Ok(self.eval(x)?.deriv(order))
    }

    /// `Q0 = psi psi'' - psi'^2`, checked positive.
    pub fn q0(&self, x: f64) -> Result<f64> {
        let v = self.eval(x)?;
        positive("Q0", x, v.q0())
    }

    /// `Q1 = psi' psi''' - psi''^2`, checked positive.
    pub fn q1(&self, x: f64) -> Result<f64> {
        let v = self.eval(x)?;
        positive("Q1", x, v.q1())
    }

    /// All derivatives and combinations at `x` in one quadrature pass.
    pub fn eval(&self, x: f64) -> Result<PsiValues> {
        if !x.is_finite() {
            return Err(Error::Domain(format!(
                "psi evaluated at non-finite x = {x}"
            )));
        }
        let a = self.a;
        let b = (x - self.params.mu) * self.kappa;
        let disc = (b * b + 4.0 * a).sqrt();
        let t_star = if b >= 0.0 {
            0.5 * (b + disc)
        } else {
            2.0 * a / (disc - b)
        };
        let v_star = t_star.ln();
        let half_pi = std::f64::consts::FRAC_PI_2;
        let tau_star = (v_star / half_pi).asinh();

        let log_w = |tau: f64| -> (f64, f64) {
            let v = half_pi * tau.sinh();
            if v > 350.0 {
                return (f64::NEG_INFINITY, v);
            }
            let t = v.exp();
            (a * v - 0.5 * t * t + b * t + (half_pi * tau.cosh()).ln(), v)
        };
        let (peak, _) = log_w(tau_star);

        let sd_v = 1.0 / (t_star * t_star + a).sqrt();
        let h0 = (0.5 * sd_v / (half_pi * tau_star.cosh())).min(0.25);

        // Walk outwards until the order-3 weighted integrand is negligible.
        let below = |tau: f64| {
            let (l, v) = log_w(tau);
            l + 3.0 * (v - v_star).max(0.0) < peak - LOG_CUTOFF
        };
        let mut k_hi = 1usize;
        while !below(tau_star + k_hi as f64 * h0) {
            k_hi += 1;
            if k_hi > MAX_NODES_PER_SIDE {
                return Err(Error::QuadratureNonConvergence {
                    x,
                    rel_change: f64::NAN,
                });
            }
        }
        let mut k_lo = 1usize;
        while !below(tau_star - k_lo as f64 * h0) {
            k_lo += 1;
            if k_lo > MAX_NODES_PER_SIDE {
                return Err(Error::QuadratureNonConvergence {
                    x,
                    rel_change: f64::NAN,
                });
            }
        }

        // Shifted moments M_n = sum w (t - t*)^n, n = 0..3.
        let mut m = [0.0f64; 4];
        let add = |tau: f64, m: &mut [f64; 4]| {
            let (l, v) = log_w(tau);
            let w = (l - peak).exp();
            if w == 0.0 {
                return;
            }
            let u = v.exp() - t_star;
            let mut p = w;
            for slot in m.iter_mut() {
                *slot += p;
                p *= u;
            }
        };
        for j in -(k_lo as i64)..=(k_hi as i64) {
            add(tau_star + j as f64 * h0, &mut m);
        }
        let mut prev = self.finish(x, t_star, peak, h0, &m);
        let mut h = h0;
        let mut rel_change = f64::INFINITY;
        for level in 1..=MAX_LEVELS {
            h *= 0.5;
            let n_lo = (k_lo as i64) << level;
            let n_hi = (k_hi as i64) << level;
            let mut j = -n_lo + 1;
            while j <= n_hi {
                add(tau_star + j as f64 * h, &mut m);
                j += 2;
            }
            let next = self.finish(x, t_star, peak, h, &m);
            rel_change = max_rel_change(&prev, &next);
            prev = next;
            if rel_change <= self.tol {
                prev.rel_err = rel_change;
                return Ok(prev);
            }
        }
        Err(Error::QuadratureNonConvergence { x, rel_change })
    }

    fn finish(&self, x: f64, t_star: f64, peak: f64, h: f64, m: &[f64; 4]) -> PsiValues {
        let k = self.kappa;
        let s0 = m[0];
        let e1 = m[1] / s0;
        let e2 = m[2] / s0;
        let e3 = m[3] / s0;
        // Central moments of t under p.
        let var = e2 - e1 * e1;
        let mu3 = e3 - 3.0 * e1 * e2 + 2.0 * e1 * e1 * e1;
        let mean = t_star + e1;
        let et2 = var + mean * mean;
        let et3 = mu3 + 3.0 * mean * var + mean * mean * mean;
        // Variance of t under the density tilted by t, from shifted moments.
        let t0 = e1 + t_star;
        let t1 = e2 + t_star * e1;
        let t2 = e3 + t_star * e2;
        let tilt_var = t2 / t0 - (t1 / t0) * (t1 / t0);
        let r1 = k * mean;
        PsiValues {
            x,
            ln_psi: (h * s0).ln() + peak - self.ln_gamma_a,
            r1,
            r2: k * k * et2,
            r3: k * k * k * et3,
            q0n: k * k * var,
            q0pn: k * k * k * (mu3 + 2.0 * mean * var),
            q1n: r1 * r1 * k * k * tilt_var,
            rel_err: f64::NAN,
        }
    }

    /// Normalized ODE residual `(sigma^2/2) psi'' + k(mu - x) psi' - rho psi` divided by `psi`.
    pub fn ode_residual_ratio(&self, v: &PsiValues) -> f64 {
        let p = &self.params;
        0.5 * p.sigma * p.sigma * v.r2 + p.k * (p.mu - v.x) * v.r1 - p.rho
    }
}

fn positive(what: &'static str, x: f64, value: f64) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositive { what, x, value })
    }
}

fn max_rel_change(a: &PsiValues, b: &PsiValues) -> f64 {
    let rel = |p: f64, q: f64| (p - q).abs() / q.abs().max(1e-300);
    [
        (a.ln_psi - b.ln_psi).abs(),
        rel(a.r1, b.r1),
        rel(a.r2, b.r2),
        rel(a.r3, b.r3),
        rel(a.q0n, b.q0n),
        rel(a.q1n, b.q1n),
        (a.q0pn - b.q0pn).abs() / (b.q0n.abs() * b.r1.abs()).max(1e-300),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> PsiEvaluator {
        PsiEvaluator::new(ModelParams::reference())
    }

    #[test]
    fn gaussian_integral_at_mu() {
        let e = reference();
        let v = e.eval(1.0).unwrap();
        assert!((v.psi() - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
        assert!((v.deriv(1) - 2f64.sqrt()).abs() < 1e-12);
        // t^2 e^{-t^2/2} integrates to sqrt(pi/2); prefactor kappa^2 = 2.
        assert!((v.deriv(2) - 2.0 * (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-11);
        // t^3 e^{-t^2/2} integrates to 2; prefactor kappa^3.
        assert!((v.deriv(3) - 2.0 * 2f64.powf(1.5)).abs() < 1e-11);
    }

    #[test]
    fn ode_residual_on_sample_points() {
        let e = reference();
        for x in [-2.0, 0.0, 1.0, 3.0] {
            let v = e.eval(x).unwrap();
            let res = e.ode_residual_ratio(&v) * v.psi();
            assert!(res.abs() <= 1e-9 * v.psi().max(1.0), "x={x} residual {res}");
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let p = ModelParams {
            k: 0.7,
            mu: 0.3,
            sigma: 1.3,
            beta: 0.5,
            rho: 0.4,
            c: 1.0,
            theta: 1.0,
        };
        let e = PsiEvaluator::new(p);
        let h = 1e-4;
        for x in [-3.0, -0.5, 0.3, 1.7, 4.0] {
            for n in 0..3 {
                let fd = (e.psi(x + h, n).unwrap() - e.psi(x - h, n).unwrap()) / (2.0 * h);
                let an = e.psi(x, n + 1).unwrap();
                assert!(
                    (fd - an).abs() <= 1e-7 * an.abs(),
                    "x={x} n={n}: {fd} vs {an}"
                );
            }
            let fd = (e.q0(x + h).unwrap() - e.q0(x - h).unwrap()) / (2.0 * h);
            let an = e.eval(x).unwrap().q0_prime();
            assert!((fd - an).abs() <= 1e-6 * an.abs());
        }
    }

    #[test]
    fn q0_matches_difference_reconstruction() {
        let e = reference();
        let h = 1e-4;
        for x in [-1.0, 0.5, 2.0, 4.0] {
            let f = |z: f64| e.psi(z, 0).unwrap();
            let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
            let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
            let q0_fd = f(x) * d2 - d1 * d1;
            let q0 = e.q0(x).unwrap();
            assert!((q0_fd - q0).abs() <= 1e-5 * q0, "x={x}: {q0_fd} vs {q0}");
        }
    }

    #[test]
    fn extreme_arguments_stay_finite() {
        let e = reference();
        for x in [-40.0, -10.0, 15.0, 40.0] {
            let v = e.eval(x).unwrap();
            assert!(
                v.ln_psi.is_finite() && v.q0n > 0.0 && v.q1n > 0.0,
                "x={x}: {v:?}"
            );
            let res = e.ode_residual_ratio(&v);
            assert!(res.abs() < 1e-7 * (1.0 + x.abs()), "x={x} residual {res}");
        }
    }

    #[test]
    fn non_integer_shape_uses_gamma_normalization() {
        // a = 1/2, b = 0: int t^{-1/2} e^{-t^2/2} dt = 2^{-3/4} Gamma(1/4).
        let p = ModelParams {
            rho: 0.5,
            ..ModelParams::reference()
        };
        let e = PsiEvaluator::new(p);
        let want = 2f64.powf(-0.75) * statrs::function::gamma::gamma(0.25)
            / statrs::function::gamma::gamma(0.5);
        assert!((e.psi(1.0, 0).unwrap() - want).abs() < 1e-11 * want);
    }

    #[test]
    fn rejects_bad_order_and_nan() {
        let e = reference();
        assert!(e.psi(0.0, 4).is_err());
        assert!(e.eval(f64::NAN).is_err());
    }
}
