//! Assembled boundary `G(own, other)` and the strategy map built on it.

use serde::Serialize;

use super::diagonal::{solve_diagonal, DiagonalTable, SlopeRule};
use super::side::{solve_side_ab, SideRoot};
use crate::error::Result;
use crate::interp::MonotoneCubic;
use crate::params::{ModelParams, Player, SimplexPoint, EPS_GEOM};
use crate::psi::PsiEvaluator;
use crate::roots::monotone_newton;

/// How `G` is filled between the diagonal and the face anchors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FillRule {
    /// For `other <= theta/2`, `G = g((2 own + other)/3)` with `g` the diagonal, the
    /// structure of the one-shot boundary. For `other > theta/2`, linear in `other`
    /// between `g((2 own + theta/2)/3)` and the face value. Strictly increasing in both
    /// variables; has a jump at `C` between the diagonal and face anchors.
    Blended,
    /// Linear in `other` at fixed `own` between the diagonal value `g(own)` and the face
    /// value. Continuous at `C`, but not increasing in `own` near `C` when the face
    /// anchor lies above the diagonal one.
    OwnLevelLines,
}

/// Boundary solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryConfig {
    /// Steps on `[0, theta/2]` for both anchor tables.
    pub n: usize,
    pub slope_rule: SlopeRule,
    pub fill: FillRule,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            n: 400,
            slope_rule: SlopeRule::ChainRule,
            fill: FillRule::Blended,
        }
    }
}

/// Result of the monotonicity probe over the half simplex.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub probe_points: usize,
    /// Grid neighbours where `G` fails to increase in `own` / in `other`.
    pub own_violations: usize,
    pub other_violations: usize,
    /// First offending `(own, other)` if any.
    pub first_violation: Option<(f64, f64)>,
    pub min_slope_own: f64,
    pub min_slope_other: f64,
    /// Face anchor at `C` minus diagonal anchor at `C`.
    pub gap_at_c: f64,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.own_violations == 0 && self.other_violations == 0
    }
}

/// Tabulated boundary of player 1 on `{own <= other}`.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    params: ModelParams,
    fill: FillRule,
    diagonal: DiagonalTable,
    side: Vec<SideRoot>,
    diag: MonotoneCubic,
    face: MonotoneCubic,
}

impl BoundaryCurve {
    /// Solves both anchor families and assembles the curve.
    pub fn solve(psi: &PsiEvaluator, cfg: &BoundaryConfig) -> Result<Self> {
        let p = *psi.params();
        let diagonal = solve_diagonal(psi, cfg.n, cfg.slope_rule)?;
        let half = 0.5 * p.theta;
        let side = (0..=cfg.n)
            .map(|k| {
                let w = half * k as f64 / cfg.n as f64;
                solve_side_ab(psi, SimplexPoint::new(w, p.theta - w))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_tables(p, cfg.fill, diagonal, side)
    }

    pub fn from_tables(
        params: ModelParams,
        fill: FillRule,
        diagonal: DiagonalTable,
        side: Vec<SideRoot>,
    ) -> Result<Self> {
        let diag = MonotoneCubic::with_slopes(
            diagonal.s.clone(),
            diagonal.f.clone(),
            diagonal.df(params.beta),
        )?;
        let face = MonotoneCubic::with_slopes(
            side.iter().map(|r| r.y.y1).collect(),
            side.iter().map(|r| r.f).collect(),
            side.iter().map(|r| r.slope).collect(),
        )?;
        Ok(BoundaryCurve {
            params,
            fill,
            diagonal,
            side,
            diag,
            face,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn fill(&self) -> FillRule {
        self.fill
    }

    pub fn diagonal_table(&self) -> &DiagonalTable {
        &self.diagonal
    }

    pub fn side_table(&self) -> &[SideRoot] {
        &self.side
    }

    /// `F(s, s)`.
    pub fn diag(&self, s: f64) -> f64 {
        self.diag.eval(s)
    }

    pub fn diag_deriv(&self, s: f64) -> f64 {
        self.diag.deriv(s)
    }

    /// Diagonal target `F^{-1}(x)`: the level `s` in `[0, theta/2]` with `F(s, s) = x`, clamped.
    pub fn diag_inverse(&self, x: f64) -> f64 {
        let half = 0.5 * self.params.theta;
        if x <= self.diag.eval(0.0) {
            return 0.0;
        }
        if x >= self.diag.eval(half) {
            return half;
        }
        self.diag.inverse(x).clamp(0.0, half)
    }

    /// Face value `F(w, theta - w)` for `w` in `[0, theta/2]`.
    pub fn face(&self, w: f64) -> f64 {
        self.face.eval(w)
    }

    /// Face anchor at `C` minus the diagonal anchor at `C`.
    pub fn gap_at_c(&self) -> f64 {
        let half = 0.5 * self.params.theta;
        self.face(half) - self.diag(half)
    }

    /// Shifted face root at `C`, the value the face condition alone would assign there.
    pub fn face_ftilde_at_c(&self) -> f64 {
        self.side.last().map(|r| r.ftilde).unwrap_or(f64::NAN)
    }

    fn clamp_domain(&self, own: f64, other: f64) -> (f64, f64) {
        let theta = self.params.theta;
        let other = other.clamp(0.0, theta);
        let own = own.clamp(0.0, other.min(theta - other).max(0.0));
        (own, other)
    }

    /// `G(own, other)` for `own <= other`, `own + other <= theta` (inputs are clamped).
    pub fn eval(&self, own: f64, other: f64) -> f64 {
        self.eval_with_partials(own, other).0
    }

    /// `(G, dG/down, dG/dother)`.
    pub fn eval_with_partials(&self, own: f64, other: f64) -> (f64, f64, f64) {
        let (own, other) = self.clamp_domain(own, other);
        let half = 0.5 * self.params.theta;
        match self.fill {
            FillRule::Blended => {
                if other <= half {
                    let u = (2.0 * own + other) / 3.0;
                    let d = self.diag.deriv(u);
                    (self.diag.eval(u), 2.0 * d / 3.0, d / 3.0)
                } else {
                    let u = (2.0 * own + half) / 3.0;
                    let hv = self.diag.eval(u);
                    let hd = 2.0 * self.diag.deriv(u) / 3.0;
                    let sv = self.face.eval(own);
                    let sd = self.face.deriv(own);
                    let a = other - half;
                    let b = half - own;
                    if b <= 0.0 {
                        return (hv, hd, 0.0);
                    }
                    let lam = a / b;
                    (
                        hv + (sv - hv) * lam,
                        hd * (1.0 - lam) + sd * lam + (sv - hv) * a / (b * b),
                        (sv - hv) / b,
                    )
                }
            }
            FillRule::OwnLevelLines => {
                let len = self.params.theta - 2.0 * own;
                let gv = self.diag.eval(own);
                let gd = self.diag.deriv(own);
                if len <= 0.0 {
                    return (gv, gd, 0.0);
                }
                let sv = self.face.eval(own);
                let sd = self.face.deriv(own);
                let t = (other - own) / len;
                let dt_down = (-len + 2.0 * (other - own)) / (len * len);
                (
                    gv + (sv - gv) * t,
                    gd + (sd - gd) * t + (sv - gv) * dt_down,
                    (sv - gv) / len,
                )
            }
        }
    }

    /// Boundary `F_i(y)` of `player` on its half `y_i <= y_j`.
    pub fn f_player(&self, player: Player, y: SimplexPoint) -> f64 {
        let (own, other) = y.own_other(player);
        self.eval(own, other)
    }

    /// Shifted boundary `F~_i(y) = F_i(y) + beta <1, y>`.
    pub fn ftilde_player(&self, player: Player, y: SimplexPoint) -> f64 {
        self.f_player(player, y) + self.params.beta * y.total()
    }

    /// Price below which a player with levels `(own, other)` waits: `G` if
    /// `own <= other`, the diagonal value `g(own)` above the diagonal, and `+inf`
    /// from half capacity on or when no capacity is left.
    pub fn threshold(&self, own: f64, other: f64) -> f64 {
        let theta = self.params.theta;
        if own + other >= theta - EPS_GEOM {
            return f64::INFINITY;
        }
        if own <= other {
            self.eval(own, other)
        } else if own < 0.5 * theta {
            self.diag.eval(own)
        } else {
            f64::INFINITY
        }
    }

    /// Strategy map `F^{-1}(x, r)`: the smallest own level `s` that puts the player back
    /// into the waiting region at price `x` when the opponent holds `r`, capped at
    /// `theta/2 ^ (theta - r)`.
    pub fn f_bold_inverse(&self, x: f64, r: f64) -> f64 {
        let theta = self.params.theta;
        let half = 0.5 * theta;
        let r = r.clamp(0.0, theta);
        let cap = half.min(theta - r);
        if cap <= 0.0 {
            return 0.0;
        }
        if x <= self.eval(0.0, r) {
            return 0.0;
        }
        let top = r.min(cap);
        if x <= self.eval(top, r) {
            return self.section_inverse(x, r, top);
        }
        if r < half {
            if x < self.diag.eval(half) {
                return self.diag.inverse(x).clamp(r, half);
            }
            return half;
        }
        cap
    }

    /// Solves `G(s, r) = x` for `s` in `[0, top]`, given that a solution exists.
    fn section_inverse(&self, x: f64, r: f64, top: f64) -> f64 {
        let half = 0.5 * self.params.theta;
        if self.fill == FillRule::Blended && r <= half {
            return ((3.0 * self.diag.inverse(x) - r) / 2.0).clamp(0.0, top);
        }
        let (g0, _, _) = self.eval_with_partials(0.0, r);
        let (g1, _, _) = self.eval_with_partials(top, r);
        let guess = top * ((x - g0) / (g1 - g0)).clamp(0.0, 1.0);
        monotone_newton(
            |s| {
                let (v, d, _) = self.eval_with_partials(s, r);
                (v, d)
            },
            x,
            0.0,
            top,
            guess,
            1e-14 * self.params.theta,
        )
    }

    /// Player-`i` target level given the opponent's level.
    pub fn target(&self, x: f64, own: f64, other: f64) -> f64 {
        own.max(self.f_bold_inverse(x, other))
    }

    /// Monotonicity probe of `G` on an `n x n` grid of the half simplex.
    pub fn admissibility(&self, n: usize) -> AdmissibilityReport {
        let theta = self.params.theta;
        let h = theta / n as f64;
        let mut rep = AdmissibilityReport {
            probe_points: 0,
            own_violations: 0,
            other_violations: 0,
            first_violation: None,
            min_slope_own: f64::INFINITY,
            min_slope_other: f64::INFINITY,
            gap_at_c: self.gap_at_c(),
        };
        // Stay off the single point C, where the fill may be multi-valued.
        let valid = |a: usize, b: usize| a <= b && a + b <= n && !(2 * a == n && 2 * b == n);
        for b in 0..=n {
            for a in 0..=b {
                if !valid(a, b) {
                    continue;
                }
                let (own, other) = (a as f64 * h, b as f64 * h);
                let (v, d_own, d_other) = self.eval_with_partials(own, other);
                rep.probe_points += 1;
                rep.min_slope_own = rep.min_slope_own.min(d_own);
                if a != b {
                    rep.min_slope_other = rep.min_slope_other.min(d_other);
                }
                if valid(a + 1, b) && self.eval((a + 1) as f64 * h, other) <= v {
                    rep.own_violations += 1;
                    rep.first_violation.get_or_insert((own, other));
                }
                if valid(a, b + 1) && self.eval(own, (b + 1) as f64 * h) <= v {
                    rep.other_violations += 1;
                    rep.first_violation.get_or_insert((own, other));
                }
            }
        }
        rep
    }

    /// Estimated Lipschitz constant of `F^{-1}(., r)`: inverse of the smallest
    /// own-direction slope of the waiting threshold over an `n x n` probe.
    pub fn lipschitz_kappa(&self, n: usize) -> f64 {
        let half = 0.5 * self.params.theta;
        let mut min_slope = f64::INFINITY;
        for k in 0..=n {
            let s = half * k as f64 / n as f64;
            min_slope = min_slope.min(self.diag.deriv(s));
        }
        let rep = self.admissibility(n);
        1.0 / min_slope.min(rep.min_slope_own)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn curve(fill: FillRule) -> BoundaryCurve {
        static CACHE: OnceLock<(DiagonalTable, Vec<SideRoot>)> = OnceLock::new();
        let (d, s) = CACHE.get_or_init(|| {
            let psi = PsiEvaluator::new(ModelParams::reference());
            let c = BoundaryCurve::solve(
                &psi,
                &BoundaryConfig {
                    n: 50,
                    ..Default::default()
                },
            )
            .unwrap();
            (c.diagonal.clone(), c.side.clone())
        });
        BoundaryCurve::from_tables(ModelParams::reference(), fill, d.clone(), s.clone()).unwrap()
    }

    #[test]
    fn anchors_are_reproduced() {
        let c = curve(FillRule::Blended);
        assert_eq!(c.diag(0.5), 1.5);
        assert_eq!(c.eval(0.5, 0.5), 1.5);
        assert!((c.eval(0.25, 0.75) - (2.4597018659 - 0.5)).abs() < 1e-8);
        assert!((c.gap_at_c() - 0.5646).abs() < 1e-3);
        assert!((c.face_ftilde_at_c() - 2.5646).abs() < 1e-3);
    }

    #[test]
    fn partials_match_differences() {
        for fill in [FillRule::Blended, FillRule::OwnLevelLines] {
            let c = curve(fill);
            let h = 1e-6;
            for &(a, b) in &[(0.1, 0.3), (0.2, 0.45), (0.1, 0.7), (0.3, 0.6), (0.05, 0.9)] {
                let (_, da, db) = c.eval_with_partials(a, b);
                let fa = (c.eval(a + h, b) - c.eval(a - h, b)) / (2.0 * h);
                let fb = (c.eval(a, b + h) - c.eval(a, b - h)) / (2.0 * h);
                assert!(
                    (da - fa).abs() < 1e-5 && (db - fb).abs() < 1e-5,
                    "{fill:?} ({a},{b})"
                );
            }
        }
    }

    #[test]
    fn blended_fill_is_admissible_and_own_level_fill_is_not() {
        let rep = curve(FillRule::Blended).admissibility(100);
        assert!(rep.admissible(), "{rep:?}");
        assert!(rep.min_slope_own > 0.0 && rep.min_slope_other > 0.0);
        let rep = curve(FillRule::OwnLevelLines).admissibility(100);
        assert!(!rep.admissible());
        assert!(rep.own_violations > 0);
    }

    #[test]
    fn strategy_map_branches() {
        let c = curve(FillRule::Blended);
        // Zero branch.
        assert_eq!(c.f_bold_inverse(c.eval(0.0, 0.3) - 1e-3, 0.3), 0.0);
        // Cap branches.
        assert_eq!(c.f_bold_inverse(10.0, 0.3), 0.5);
        assert!((c.f_bold_inverse(10.0, 0.8) - 0.2).abs() < 1e-15);
        // Sectional branch reproduces G.
        for &(s, r) in &[(0.1, 0.3), (0.05, 0.7), (0.2, 0.6)] {
            let x = c.eval(s, r);
            assert!((c.f_bold_inverse(x, r) - s).abs() < 1e-10, "({s},{r})");
        }
        // Diagonal branch.
        let x = c.diag(0.4);
        assert!((c.f_bold_inverse(x, 0.2) - 0.4).abs() < 1e-10);
    }

    #[test]
    fn strategy_map_is_lipschitz_and_monotone() {
        for fill in [FillRule::Blended, FillRule::OwnLevelLines] {
            let c = curve(fill);
            let kappa = c.lipschitz_kappa(100);
            let n = 100;
            for i in 0..=n {
                let r = i as f64 / n as f64;
                let mut last: Option<(f64, f64)> = None;
                for j in 0..=n {
                    let x = 0.5 + 2.0 * j as f64 / n as f64;
                    let v = c.f_bold_inverse(x, r);
                    if let Some((x0, v0)) = last {
                        assert!(v >= v0 - 1e-12);
                        if fill == FillRule::Blended {
                            assert!((v - v0).abs() <= kappa * (x - x0) + 1e-12, "r={r} x={x}");
                        }
                    }
                    last = Some((x, v));
                    if fill == FillRule::Blended && i < n {
                        assert!(c.f_bold_inverse(x, r + 1.0 / n as f64) <= v + 1e-12);
                    }
                }
            }
        }
    }
}
