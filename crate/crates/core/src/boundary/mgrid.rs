//! Option-value coefficient `m1` on a triangular grid, by integration along grid lines.
//!
//! * diagonal `OC`: `dm/ds = -2 beta psi'/psi(F~) m + (beta k s + rho (rho+k)(c - R~1)) / (rho (rho+k) psi(F~))`,
//!   from `m(C) = 0`;
//! * upper half, rows of fixed `y2`: `dm/dy1 = -beta psi'/psi(F~1) m + (c - R~1(F~1, y)) / psi(F~1)`,
//!   from the diagonal (`y2 <= theta/2`) or from the face where `m = 0`;
//! * lower half, columns of fixed `y1`: `dm/dy2 = -beta psi'/psi(F~2) m + beta k y1 / (rho (rho+k) psi(F~2))`,
//!   likewise.

use serde::Serialize;

use super::curve::BoundaryCurve;
use super::gap;
use crate::error::{Error, Result};
use crate::params::{ModelParams, SimplexPoint};
use crate::psi::PsiEvaluator;

const BLOWUP: f64 = 1e6;

/// Consistency diagnostics collected while solving.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MGridDiagnostics {
    /// Largest mismatch between the diagonal ODE and the sum of one-sided derivatives
    /// (along-line from the half ODE, cross from finite differences) at interior diagonal nodes.
    pub diagonal_jump: f64,
    /// Smallest `m1` over nodes with `y2 >= theta/2`.
    pub min_m_upper_band: f64,
}

/// Tabulated `m1` with one-sided gradient tables for each half.
#[derive(Debug, Clone)]
pub struct MGrid {
    params: ModelParams,
    n: usize,
    h: f64,
    m: Vec<f64>,
    d1_up: Vec<f64>,
    d2_up: Vec<f64>,
    d1_lo: Vec<f64>,
    d2_lo: Vec<f64>,
    diag_rhs: Vec<f64>,
    pub diagnostics: MGridDiagnostics,
}

/// Linear ODE coefficients `(a, f)` in `dm = (-a m + f) dt`.
#[derive(Clone, Copy)]
struct Coef {
    a: f64,
    f: f64,
}

struct Coefs<'a> {
    psi: &'a PsiEvaluator,
    curve: &'a BoundaryCurve,
    p: ModelParams,
}

impl Coefs<'_> {
    fn upper(&self, y1: f64, y2: f64) -> Result<Coef> {
        let y = SimplexPoint::new(y1.min(y2), y2);
        let z = self.curve.eval(y.y1, y.y2) + self.p.beta * y.total();
        let v = self.psi.eval(z)?;
        Ok(Coef {
            a: self.p.beta * v.r1,
            f: gap(&self.p, z, y) * (-v.ln_psi).exp(),
        })
    }

    fn lower(&self, y1: f64, y2: f64) -> Result<Coef> {
        let p = &self.p;
        let y2 = y2.min(y1);
        let z = self.curve.eval(y2, y1) + p.beta * (y1 + y2);
        let v = self.psi.eval(z)?;
        Ok(Coef {
            a: p.beta * v.r1,
            f: p.beta * p.k * y1 / (p.rho * (p.rho + p.k)) * (-v.ln_psi).exp(),
        })
    }

    fn diagonal(&self, s: f64) -> Result<Coef> {
        let p = &self.p;
        let z = self.curve.diag(s) + 2.0 * p.beta * s;
        let v = self.psi.eval(z)?;
        let rk = p.rho + p.k;
        let g = gap(p, z, SimplexPoint::new(s, s));
        Ok(Coef {
            a: 2.0 * p.beta * v.r1,
            f: (p.beta * p.k * s + p.rho * rk * g) / (p.rho * rk) * (-v.ln_psi).exp(),
        })
    }
}

/// RK4 step of `m' = -a m + f` over `dt` with coefficients at start, midpoint and end.
fn rk4_linear(m: f64, dt: f64, c0: Coef, cm: Coef, c1: Coef) -> f64 {
    let k1 = -c0.a * m + c0.f;
    let k2 = -cm.a * (m + 0.5 * dt * k1) + cm.f;
    let k3 = -cm.a * (m + 0.5 * dt * k2) + cm.f;
    let k4 = -c1.a * (m + dt * k3) + c1.f;
    m + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Derivative from values `v[lo..=hi]` (indices on a line, spacing `h`) at index `at`.
fn line_derivative(v: impl Fn(usize) -> f64, at: usize, lo: usize, hi: usize, h: f64) -> f64 {
    if at > lo && at < hi {
        (v(at + 1) - v(at - 1)) / (2.0 * h)
    } else if at + 2 <= hi {
        (-3.0 * v(at) + 4.0 * v(at + 1) - v(at + 2)) / (2.0 * h)
    } else if at >= lo + 2 {
        (3.0 * v(at) - 4.0 * v(at - 1) + v(at - 2)) / (2.0 * h)
    } else if at < hi {
        (v(at + 1) - v(at)) / h
    } else if at > lo {
        (v(at) - v(at - 1)) / h
    } else {
        f64::NAN
    }
}

/// Integrates the three characteristic ODEs on a grid of step `theta/(2n)`.
pub fn solve_m(psi: &PsiEvaluator, curve: &BoundaryCurve, n: usize) -> Result<MGrid> {
    if n < 2 {
        return Err(Error::Domain(format!("m grid needs n >= 2, got {n}")));
    }
    let p = *psi.params();
    let h = 0.5 * p.theta / n as f64;
    let size = 2 * n + 1;
    let nan = vec![f64::NAN; size * size];
    let mut g = MGrid {
        params: p,
        n,
        h,
        m: nan.clone(),
        d1_up: nan.clone(),
        d2_up: nan.clone(),
        d1_lo: nan.clone(),
        d2_lo: nan,
        diag_rhs: vec![f64::NAN; n + 1],
        diagnostics: MGridDiagnostics {
            diagonal_jump: 0.0,
            min_m_upper_band: f64::INFINITY,
        },
    };
    let co = Coefs { psi, curve, p };
    let blowup = |i: usize, j: usize, v: f64| -> Result<()> {
        if v.abs() > BLOWUP || !v.is_finite() {
            Err(Error::Blowup {
                y1: i as f64 * h,
                y2: j as f64 * h,
                value: v,
            })
        } else {
            Ok(())
        }
    };

    // Diagonal.
    let mut c1 = co.diagonal(n as f64 * h)?;
    let mut md = 0.0;
    g.set(n, n, 0.0);
    g.diag_rhs[n] = c1.f;
    for i in (0..n).rev() {
        let s1 = (i + 1) as f64 * h;
        let cm = co.diagonal(s1 - 0.5 * h)?;
        let c0 = co.diagonal(s1 - h)?;
        md = rk4_linear(md, -h, c1, cm, c0);
        blowup(i, i, md)?;
        g.set(i, i, md);
        g.diag_rhs[i] = -c0.a * md + c0.f;
        c1 = c0;
    }

    // Upper half: rows j, integrating in y1 downwards.
    for j in 1..=2 * n {
        let y2 = j as f64 * h;
        let start = if j <= n { j } else { 2 * n - j };
        let mut m = if j <= n { g.get(j, j) } else { 0.0 };
        if j > n {
            g.set(start, j, 0.0);
        }
        let mut c1 = co.upper(start as f64 * h, y2)?;
        {
            let k = g.idx(start, j);
            g.d1_up[k] = -c1.a * m + c1.f;
        }
        for i in (0..start).rev() {
            let y1 = (i + 1) as f64 * h;
            let cm = co.upper(y1 - 0.5 * h, y2)?;
            let c0 = co.upper(y1 - h, y2)?;
            m = rk4_linear(m, -h, c1, cm, c0);
            blowup(i, j, m)?;
            g.set(i, j, m);
            {
                let k = g.idx(i, j);
                g.d1_up[k] = -c0.a * m + c0.f;
            }
            c1 = c0;
        }
    }
    g.d1_up[0] = -co.upper(0.0, 0.0)?.a * g.get(0, 0) + co.upper(0.0, 0.0)?.f;

    // Lower half: columns i, integrating in y2 downwards.
    for i in 1..=2 * n {
        let y1 = i as f64 * h;
        let start = if i <= n { i } else { 2 * n - i };
        let mut m = if i <= n { g.get(i, i) } else { 0.0 };
        if i > n {
            g.set(i, start, 0.0);
        }
        let mut c1 = co.lower(y1, start as f64 * h)?;
        {
            let k = g.idx(i, start);
            g.d2_lo[k] = -c1.a * m + c1.f;
        }
        for j in (0..start).rev() {
            let y2 = (j + 1) as f64 * h;
            let cm = co.lower(y1, y2 - 0.5 * h)?;
            let c0 = co.lower(y1, y2 - h)?;
            m = rk4_linear(m, -h, c1, cm, c0);
            blowup(i, j, m)?;
            // Columns meet the upper-half rows only on the diagonal.
            g.set(i, j, m);
            {
                let k = g.idx(i, j);
                g.d2_lo[k] = -c0.a * m + c0.f;
            }
            c1 = c0;
        }
    }
    let c00 = co.lower(0.0, 0.0)?;
    g.d2_lo[0] = -c00.a * g.get(0, 0) + c00.f;

    g.fill_cross_derivatives();
    Ok(g)
}

impl MGrid {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (2 * self.n + 1) + j
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.m[k] = v;
    }

    /// Node value at `(i h, j h)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[self.idx(i, j)]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `d/ds m(s, s)` at diagonal node `i` from the diagonal ODE.
    pub fn diagonal_rhs(&self, i: usize) -> f64 {
        self.diag_rhs[i]
    }

    /// One-sided gradient at node `(i, j)` for the half `upper` (`y2 >= y1`) or lower.
    pub fn node_gradient(&self, i: usize, j: usize, upper: bool) -> (f64, f64) {
        let k = self.idx(i, j);
        if upper {
            (self.d1_up[k], self.d2_up[k])
        } else {
            (self.d1_lo[k], self.d2_lo[k])
        }
    }

    fn fill_cross_derivatives(&mut self) {
        let n = self.n;
        let h = self.h;
        let mut jump: f64 = 0.0;
        let mut min_band = f64::INFINITY;
        for i in 0..=2 * n {
            for j in 0..=2 * n - i {
                if j >= n {
                    min_band = min_band.min(self.get(i, j));
                }
                if j >= i {
                    // Upper half, cross derivative in y2 at fixed y1 = i h.
                    let k = self.idx(i, j);
                    self.d2_up[k] = if i == j {
                        self.diag_rhs[i] - self.d1_up[k]
                    } else {
                        let (lo, hi) = if j <= n { (i, n) } else { (n, 2 * n - i) };
                        line_derivative(|jj| self.get(i, jj), j, lo, hi, h)
                    };
                }
                if i >= j {
                    // Lower half, cross derivative in y1 at fixed y2 = j h.
                    let k = self.idx(i, j);
                    self.d1_lo[k] = if i == j {
                        self.diag_rhs[i] - self.d2_lo[k]
                    } else {
                        let (lo, hi) = if i <= n { (j, n) } else { (n, 2 * n - j) };
                        line_derivative(|ii| self.get(ii, j), i, lo, hi, h)
                    };
                }
            }
        }
        for i in 1..n.saturating_sub(1) {
            let k = self.idx(i, i);
            let up = self.d1_up[k] + line_derivative(|jj| self.get(i, jj), i, i, n, h);
            let lo = self.d2_lo[k] + line_derivative(|ii| self.get(ii, i), i, i, n, h);
            jump = jump
                .max((up - self.diag_rhs[i]).abs())
                .max((lo - self.diag_rhs[i]).abs());
        }
        self.diagnostics = MGridDiagnostics {
            diagonal_jump: jump,
            min_m_upper_band: min_band,
        };
    }

    /// Interpolation weights: up to four `(i, j, w)` triples and whether the cell is in the upper half.
    fn stencil(&self, y: SimplexPoint) -> ([(usize, usize, f64); 4], bool) {
        let n2 = 2 * self.n;
        let u = (y.y1 / self.h).clamp(0.0, n2 as f64);
        let v = (y.y2 / self.h).clamp(0.0, n2 as f64);
        let mut i0 = (u.floor() as usize).min(n2 - 1);
        let mut j0 = (v.floor() as usize).min(n2 - 1);
        if i0 + j0 > n2 - 1 {
            // Outside the simplex by rounding: pull back into the last cell.
            if i0 > j0 {
                i0 = n2 - 1 - j0;
            } else {
                j0 = n2 - 1 - i0;
            }
        }
        let (a, b) = (
            (u - i0 as f64).clamp(0.0, 1.0),
            (v - j0 as f64).clamp(0.0, 1.0),
        );
        let upper = y.y2 >= y.y1;
        if i0 == j0 {
            // Split along the diagonal.
            if upper {
                let (a, b) = (a.min(b), b);
                return (
                    [
                        (i0, j0, 1.0 - b),
                        (i0, j0 + 1, b - a),
                        (i0 + 1, j0 + 1, a),
                        (i0, j0, 0.0),
                    ],
                    true,
                );
            }
            let (a, b) = (a, b.min(a));
            return (
                [
                    (i0, j0, 1.0 - a),
                    (i0 + 1, j0, a - b),
                    (i0 + 1, j0 + 1, b),
                    (i0, j0, 0.0),
                ],
                false,
            );
        }
        if i0 + j0 + 2 > n2 {
            // Cell cut by the face: lower-left triangle.
            let s = a + b;
            let (a, b) = if s > 1.0 { (a / s, b / s) } else { (a, b) };
            return (
                [
                    (i0, j0, 1.0 - a - b),
                    (i0 + 1, j0, a),
                    (i0, j0 + 1, b),
                    (i0, j0, 0.0),
                ],
                upper,
            );
        }
        (
            [
                (i0, j0, (1.0 - a) * (1.0 - b)),
                (i0 + 1, j0, a * (1.0 - b)),
                (i0, j0 + 1, (1.0 - a) * b),
                (i0 + 1, j0 + 1, a * b),
            ],
            upper,
        )
    }

    /// `m1(y)` by piecewise linear/bilinear interpolation.
    pub fn value(&self, y: SimplexPoint) -> f64 {
        let (st, _) = self.stencil(y);
        st.iter()
            .map(|&(i, j, w)| if w == 0.0 { 0.0 } else { w * self.get(i, j) })
            .sum()
    }

    /// One-sided gradient at `y`, from the table of the half containing `y`.
    pub fn gradient(&self, y: SimplexPoint) -> (f64, f64) {
        let (st, upper) = self.stencil(y);
        let mut g = (0.0, 0.0);
        for &(i, j, w) in &st {
            if w != 0.0 {
                let (a, b) = self.node_gradient(i, j, upper);
                g.0 += w * a;
                g.1 += w * b;
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BoundaryConfig, BoundaryCurve};

    fn solved(n: usize) -> (PsiEvaluator, BoundaryCurve, MGrid) {
        let psi = PsiEvaluator::new(ModelParams::reference());
        let c = BoundaryCurve::solve(
            &psi,
            &BoundaryConfig {
                n,
                ..Default::default()
            },
        )
        .unwrap();
        let m = solve_m(&psi, &c, n).unwrap();
        (psi, c, m)
    }

    #[test]
    fn boundary_data_hold() {
        let (_, _, g) = solved(20);
        let n = g.n();
        assert_eq!(g.get(n, n), 0.0);
        for i in 0..=2 * n {
            assert_eq!(g.get(i, 2 * n - i), 0.0);
        }
        assert!(g.diagnostics.diagonal_jump < 1e-3, "{:?}", g.diagnostics);
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let (_, _, g) = solved(10);
        let h = g.h();
        for i in 0..=20 {
            for j in 0..=(20 - i) {
                let y = SimplexPoint::new(i as f64 * h, j as f64 * h);
                assert!((g.value(y) - g.get(i, j)).abs() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn independent_quadrature_oracle_for_a_row() {
        // m on row y2 = 0.75 solves a linear ODE with m = 0 on the face; compare with the
        // variation-of-constants integral evaluated by composite Simpson.
        let (psi, c, g) = solved(20);
        let p = ModelParams::reference();
        let y2 = 0.75;
        let a = |y1: f64| {
            let z = c.eval(y1, y2) + p.beta * (y1 + y2);
            p.beta * psi.eval(z).unwrap().r1
        };
        let f = |y1: f64| {
            let z = c.eval(y1, y2) + p.beta * (y1 + y2);
            gap(&p, z, SimplexPoint::new(y1, y2)) / psi.eval(z).unwrap().psi()
        };
        let simpson = |fun: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
            let n = 200;
            let h = (hi - lo) / n as f64;
            let mut s = fun(lo) + fun(hi);
            for k in 1..n {
                s += fun(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        // m(y1) = -int_{y1}^{w} exp(int_{y1}^{r} a) f(r) dr, w = 0.25.
        let y1 = 0.05;
        let want = -simpson(&|r: f64| (simpson(&a, y1, r)).exp() * f(r), y1, 0.25);
        let got = g.get(2, 30);
        assert!((got - want).abs() < 1e-7, "{got} vs {want}");
    }

    #[test]
    fn refinement_order_at_least_two() {
        // Nodes shared by n = 10, 20, 40: coordinates in units of theta/20.
        let probes = [(0, 0), (2, 2), (1, 4), (2, 12), (0, 15), (6, 3), (13, 1)];
        let grids: Vec<MGrid> = [10, 20, 40].iter().map(|&n| solved(n).2).collect();
        let at = |g: &MGrid, (a, b): (usize, usize)| {
            let r = g.n() / 10;
            g.get(a * r, b * r)
        };
        let mut e1: f64 = 0.0;
        let mut e2: f64 = 0.0;
        for &q in &probes {
            e1 = e1.max((at(&grids[0], q) - at(&grids[1], q)).abs());
            e2 = e2.max((at(&grids[1], q) - at(&grids[2], q)).abs());
        }
        let order = (e1 / e2).log2();
        assert!(order >= 2.0, "observed order {order} ({e1:e}, {e2:e})");
    }
}
