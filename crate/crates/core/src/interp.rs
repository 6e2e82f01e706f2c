//! Monotone piecewise cubic Hermite interpolation (Fritsch–Carlson).

use crate::error::{Error, Result};

/// Cubic Hermite interpolant on strictly increasing knots.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    /// Interpolant with PCHIP slopes (weighted harmonic means, zero at extrema).
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_knots(&xs, &ys)?;
        let ds = pchip_slopes(&xs, &ys);
        Ok(MonotoneCubic { xs, ys, ds })
    }

    /// Interpolant with prescribed slopes, limited so that each monotone segment stays monotone.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, mut ds: Vec<f64>) -> Result<Self> {
        check_knots(&xs, &ys)?;
        if ds.len() != xs.len() {
            return Err(Error::Domain(
                "slope table length differs from knot count".into(),
            ));
        }
        limit_slopes(&xs, &ys, &mut ds);
        Ok(MonotoneCubic { xs, ys, ds })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.ds
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    /// Value at `x`; linear extension with the end slopes outside the knots.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.ds[0] * (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.ds[n - 1] * (x - self.xs[n - 1]);
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.ds[i] + h01 * self.ys[i + 1] + h11 * h * self.ds[i + 1]
    }

    /// First derivative at `x`.
    pub fn deriv(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ds[0];
        }
        if x >= self.xs[n - 1] {
            return self.ds[n - 1];
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let dy = self.ys[i + 1] - self.ys[i];
        (6.0 * t - 6.0 * t2) * dy / h
            + (3.0 * t2 - 4.0 * t + 1.0) * self.ds[i]
            + (3.0 * t2 - 2.0 * t) * self.ds[i + 1]
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[1] > w[0])
    }

    /// Inverse of an increasing interpolant on `[y_first, y_last]`, extended linearly outside.
    pub fn inverse(&self, y: f64) -> f64 {
        let n = self.ys.len();
        if y <= self.ys[0] {
            return self.xs[0] + (y - self.ys[0]) / self.ds[0].max(f64::MIN_POSITIVE);
        }
        if y >= self.ys[n - 1] {
            return self.xs[n - 1] + (y - self.ys[n - 1]) / self.ds[n - 1].max(f64::MIN_POSITIVE);
        }
        let i = match self.ys.partition_point(|&v| v <= y) {
            0 => 0,
            j => (j - 1).min(n - 2),
        };
        let (mut lo, mut hi) = (self.xs[i], self.xs[i + 1]);
        let span = self.ys[i + 1] - self.ys[i];
        let mut x = lo + (hi - lo) * (y - self.ys[i]) / span;
        for _ in 0..200 {
            let f = self.eval(x) - y;
            if f.abs() <= 1e-15 * (1.0 + y.abs()) || hi - lo <= 1e-16 * (1.0 + x.abs()) {
                return x;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.deriv(x);
            let newton = x - f / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }
}

fn check_knots(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(Error::Domain(
            "monotone cubic needs at least two knots with matching values".into(),
        ));
    }
    if !xs.windows(2).all(|w| w[1] > w[0]) || xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "knots must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

fn limit_slopes(xs: &[f64], ys: &[f64], ds: &mut [f64]) {
    for i in 0..xs.len() - 1 {
        let delta = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        if delta == 0.0 {
            ds[i] = 0.0;
            ds[i + 1] = 0.0;
            continue;
        }
        if ds[i] * delta < 0.0 {
            ds[i] = 0.0;
        }
        if ds[i + 1] * delta < 0.0 {
            ds[i + 1] = 0.0;
        }
        let a = ds[i] / delta;
        let b = ds[i + 1] / delta;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            ds[i] = tau * a * delta;
            ds[i + 1] = tau * b * delta;
        }
    }
}
