//! Candidate value functions of the dynamic game and their residual diagnostics.
//!
//! Player 1's value is `V1(x, y) = v1(x, T) - c (T1 - y1)` where `T` are the
//! post-lump levels given by the strategy map and `v1 = m1 psi(x + beta <1,y>) + R1`.
//! Player 2's value is the reflection `V2(x, y1, y2) = V1(x, y2, y1)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{rtilde1, solve_m, solve_side_ab, BoundaryConfig, BoundaryCurve, MGrid};
use crate::error::Result;
use crate::params::{reflect, ModelParams, Player, SimplexPoint, EPS_GEOM};
use crate::psi::{PsiEvaluator, PsiValues};
use crate::region::{JointLabel, Membership, Region};

pub use crate::static_game::r_i;

/// Solver settings for a value field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValueConfig {
    pub boundary: BoundaryConfig,
    /// Steps on `[0, theta/2]` for the `m1` grid.
    pub m_n: usize,
}

impl Default for ValueConfig {
    fn default() -> Self {
        ValueConfig {
            boundary: BoundaryConfig::default(),
            m_n: 100,
        }
    }
}

/// `V1` and its first derivatives at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueDerivs {
    pub v: f64,
    pub dx: f64,
    pub dy1: f64,
    pub dy2: f64,
}

/// `v1 = m psi(z) + R1` evaluated at `(x, y)` with `z = x + beta <1,y>`.
struct Cont {
    m: f64,
    dm: (f64, f64),
    psi: PsiValues,
    y: SimplexPoint,
}

/// Solved boundary, `m1` table and the evaluator they were built with.
#[derive(Debug, Clone)]
pub struct ValueField {
    params: ModelParams,
    psi: PsiEvaluator,
    curve: BoundaryCurve,
    mgrid: MGrid,
}

impl ValueField {
    pub fn solve(params: ModelParams, cfg: &ValueConfig) -> Result<Self> {
        let psi = PsiEvaluator::new(crate::params::validate(params)?);
        let curve = BoundaryCurve::solve(&psi, &cfg.boundary)?;
        let mgrid = solve_m(&psi, &curve, cfg.m_n)?;
        Ok(Self::from_parts(psi, curve, mgrid))
    }

    pub fn from_parts(psi: PsiEvaluator, curve: BoundaryCurve, mgrid: MGrid) -> Self {
        ValueField {
            params: *psi.params(),
            psi,
            curve,
            mgrid,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn psi(&self) -> &PsiEvaluator {
        &self.psi
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn mgrid(&self) -> &MGrid {
        &self.mgrid
    }

    fn membership(&self, x: f64, own: f64, other: f64) -> Membership {
        let theta = self.params.theta;
        if own + other >= theta - EPS_GEOM {
            return Membership::Saturated;
        }
        if own <= other {
            if x < self.curve.threshold(own, other) {
                Membership::Free
            } else {
                Membership::Install
            }
        } else if own >= 0.5 * theta {
            Membership::Saturated
        } else if x < self.curve.threshold(own, other) {
            Membership::Prolonged
        } else {
            Membership::Install
        }
    }

    /// Waiting/installation classification of both players.
    pub fn classify(&self, x: f64, y: SimplexPoint) -> Region {
        Region::new(
            self.membership(x, y.y1, y.y2),
            self.membership(x, y.y2, y.y1),
        )
    }

    /// Levels right after the time-zero lumps of both players.
    pub fn targets(&self, x: f64, y: SimplexPoint) -> SimplexPoint {
        SimplexPoint::new(
            self.curve.target(x, y.y1, y.y2),
            self.curve.target(x, y.y2, y.y1),
        )
    }

    fn cont(&self, x: f64, y: SimplexPoint) -> Result<Cont> {
        let z = x + self.params.beta * y.total();
        Ok(Cont {
            m: self.mgrid.value(y),
            dm: self.mgrid.gradient(y),
            psi: self.psi.eval(z)?,
            y,
        })
    }

    fn r1_partials(&self, x: f64, y: SimplexPoint) -> (f64, f64) {
        let p = &self.params;
        let den = p.rho * (p.rho + p.k);
        (
            (x * p.rho + p.mu * p.k - p.beta * p.k * (y.total() + y.y1)) / den,
            -p.beta * p.k * y.y1 / den,
        )
    }

    /// `(d/dy1, d/dy2)` of `v1` at `(x, c.y)`.
    fn cont_gradient(&self, x: f64, c: &Cont) -> (f64, f64) {
        let psi = c.psi.psi();
        let shift = c.m * self.params.beta * c.psi.r1 * psi;
        let (r1, r2) = self.r1_partials(x, c.y);
        (c.dm.0 * psi + shift + r1, c.dm.1 * psi + shift + r2)
    }

    /// Continuation value `v1(x, y) = m1(y) psi(x + beta <1,y>) + R1(x, y)`.
    pub fn v1(&self, x: f64, y: SimplexPoint) -> Result<f64> {
        let z = x + self.params.beta * y.total();
        Ok(self.mgrid.value(y) * self.psi.eval(z)?.psi() + r_i(&self.params, x, y, Player::One))
    }

    /// `V_i(x, y)`.
    pub fn value(&self, x: f64, y: SimplexPoint, player: Player) -> Result<f64> {
        Ok(self.derivs(x, y, player)?.v)
    }

    /// `V_i` with its first derivatives. The `y` derivatives use the smooth-fit
    /// structure: `c` in the own installation region, `0` along the opponent's
    /// installation direction, and the analytic gradient of `v1` otherwise.
    pub fn derivs(&self, x: f64, y: SimplexPoint, player: Player) -> Result<ValueDerivs> {
        match player {
            Player::One => self.derivs1(x, y),
            Player::Two => {
                let d = self.derivs1(x, reflect(y))?;
                Ok(ValueDerivs {
                    v: d.v,
                    dx: d.dx,
                    dy1: d.dy2,
                    dy2: d.dy1,
                })
            }
        }
    }

    fn derivs1(&self, x: f64, y: SimplexPoint) -> Result<ValueDerivs> {
        let p = &self.params;
        let region = self.classify(x, y);
        let t = self.targets(x, y);
        let c = self.cont(x, t)?;
        let psi = c.psi.psi();
        let v = c.m * psi + r_i(p, x, t, Player::One) - p.c * (t.y1 - y.y1);
        let dx = c.m * c.psi.r1 * psi + t.y1 / (p.rho + p.k);
        let (g1, g2) = self.cont_gradient(x, &c);
        Ok(ValueDerivs {
            v,
            dx,
            dy1: if region.player1.waits() { g1 } else { p.c },
            dy2: if region.player2.waits() { g2 } else { 0.0 },
        })
    }

    /// `(sigma^2/2) V_xx + k(mu - beta <1,y> - x) V_x - rho V + x y1` for player 1.
    /// Analytic from `psi` derivatives in the joint waiting region; elsewhere central
    /// differences of `V1` in `x` with step `1e-4`.
    pub fn residual_pde(&self, x: f64, y: SimplexPoint) -> Result<f64> {
        let p = &self.params;
        let drift = p.k * (p.mu - p.beta * y.total() - x);
        let half_var = 0.5 * p.sigma * p.sigma;
        if self.classify(x, y).label == JointLabel::WW {
            let c = self.cont(x, y)?;
            let psi = c.psi.psi();
            let r1 = r_i(p, x, y, Player::One);
            let r1x = y.y1 / (p.rho + p.k);
            let v = c.m * psi + r1;
            let vx = c.m * c.psi.r1 * psi + r1x;
            let vxx = c.m * c.psi.r2 * psi;
            return Ok(half_var * vxx + drift * vx - p.rho * v + x * y.y1);
        }
        let h = 1e-4;
        let f = |x: f64| self.value(x, y, Player::One);
        let (vm, v0, vp) = (f(x - h)?, f(x)?, f(x + h)?);
        Ok(
            half_var * (vp - 2.0 * v0 + vm) / (h * h) + drift * (vp - vm) / (2.0 * h) - p.rho * v0
                + x * y.y1,
        )
    }

    /// Smooth-fit residuals `(d_y1 v1(F1(u), u) - c, d_y2 v1(F2(l), l))` where `u` is `y`
    /// moved into the half `y1 <= y2` and `l` its mirror image, using the one-sided
    /// gradient tables of the respective halves.
    pub fn residual_smooth_fit(&self, y: SimplexPoint) -> Result<(f64, f64)> {
        let u = SimplexPoint::new(y.y1.min(y.y2), y.y1.max(y.y2));
        let l = reflect(u);
        let xu = self.curve.eval(u.y1, u.y2);
        let xl = self.curve.eval(l.y2, l.y1);
        let cu = self.cont(xu, u)?;
        let cl = self.cont(xl, l)?;
        Ok((
            self.cont_gradient(xu, &cu).0 - self.params.c,
            self.cont_gradient(xl, &cl).1,
        ))
    }

    /// Largest smooth-fit residuals over the grid nodes, own fit on the upper half and
    /// opponent fit on the lower half.
    pub fn node_smooth_fit_residuals(&self) -> Result<(f64, f64)> {
        let g = &self.mgrid;
        let (n, h) = (g.n(), g.h());
        let mut worst = (0.0f64, 0.0f64);
        for i in 0..=2 * n {
            for j in 0..=2 * n - i {
                let y = SimplexPoint::new(i as f64 * h, j as f64 * h);
                if j >= i {
                    let x = self.curve.eval(y.y1, y.y2);
                    let dm = g.node_gradient(i, j, true);
                    let r = self.fit_at_node(x, y, g.get(i, j), dm)?.0 - self.params.c;
                    worst.0 = worst.0.max(r.abs());
                }
                if i >= j {
                    let x = self.curve.eval(y.y2, y.y1);
                    let dm = g.node_gradient(i, j, false);
                    let r = self.fit_at_node(x, y, g.get(i, j), dm)?.1;
                    worst.1 = worst.1.max(r.abs());
                }
            }
        }
        Ok(worst)
    }

    fn fit_at_node(&self, x: f64, y: SimplexPoint, m: f64, dm: (f64, f64)) -> Result<(f64, f64)> {
        let z = x + self.params.beta * y.total();
        let c = Cont {
            m,
            dm,
            psi: self.psi.eval(z)?,
            y,
        };
        Ok(self.cont_gradient(x, &c))
    }

    /// Diagonal condition at `C`: `(d_y1 + d_y2) m1(C) + 2 (R~1(F~(C), C) - c) / psi(F~(C))`,
    /// with the directional derivative from a backward three-point difference along the diagonal.
    pub fn diagonal_condition_residual(&self) -> Result<f64> {
        let g = &self.mgrid;
        let (n, h) = (g.n(), g.h());
        let dsum =
            (3.0 * g.get(n, n) - 4.0 * g.get(n - 1, n - 1) + g.get(n - 2, n - 2)) / (2.0 * h);
        let cpt = self.params.corner_c();
        let zc = self.curve.diag(cpt.y1) + self.params.beta * cpt.total();
        let psi = self.psi.eval(zc)?.psi();
        Ok(dsum + 2.0 * (rtilde1(&self.params, zc, cpt) - self.params.c) / psi)
    }

    /// Probe box with the default price range and a `ny x ny` triangular `y` grid.
    pub fn default_probe_box(&self, nx: usize, ny: usize) -> ProbeBox {
        let p = &self.params;
        let sd = p.stationary_sd();
        let half = p.corner_c().y1;
        ProbeBox {
            x_lo: (p.mu - 4.0 * sd).min(self.curve.diag(0.0) - 1.0),
            x_hi: (p.mu + 4.0 * sd).max(self.curve.diag(half) + 1.0),
            nx,
            ny,
        }
    }

    /// Full diagnostic sweep over `probe`.
    pub fn probe(&self, probe: &ProbeBox) -> Result<ProbeReport> {
        let theta = self.params.theta;
        let ys: Vec<SimplexPoint> = (0..=probe.ny)
            .flat_map(|i| (0..=probe.ny - i).map(move |j| (i, j)))
            .map(|(i, j)| {
                let h = theta / probe.ny as f64;
                SimplexPoint::new(i as f64 * h, j as f64 * h)
            })
            .collect();
        let parts: Vec<ProbeReport> = ys
            .par_iter()
            .map(|&y| self.probe_column(probe, y))
            .collect::<Result<_>>()?;
        let mut rep = ProbeReport::empty();
        for part in parts {
            rep.merge(part);
        }
        rep.interface = self.interface_jumps(probe.ny)?;
        Ok(rep)
    }

    fn probe_column(&self, probe: &ProbeBox, y: SimplexPoint) -> Result<ProbeReport> {
        let p = &self.params;
        let mut rep = ProbeReport::empty();
        let margin = 2.0 * self.mgrid.h();
        let interior =
            y.y1.min(y.y2) >= 0.0 && (y.y1 - y.y2).abs() >= margin && p.theta - y.total() >= margin;
        let m_here = self.mgrid.value(y);
        let mut last: Option<(f64, f64)> = None;
        let dy = 1e-4 * p.theta;
        for k in 0..=probe.nx {
            let x = probe.x_lo + (probe.x_hi - probe.x_lo) * k as f64 / probe.nx as f64;
            let region = self.classify(x, y);
            let d = self.derivs1(x, y)?;
            let stats = &mut rep.regions[label_index(region.label)];
            stats.states += 1;
            rep.states += 1;
            rep.growth_k = rep.growth_k.max(d.v.abs() / (1.0 + x.abs()));
            if let Some((x0, dx0)) = last {
                rep.lipschitz_l = rep.lipschitz_l.max((d.dx - dx0).abs() / (x - x0));
            }
            last = Some((x, d.dx));

            if m_here < 0.0 {
                rep.negative_m_states += 1;
                rep.first_negative_m.get_or_insert((x, y.y1, y.y2));
            } else if d.v < r_i(p, x, y, Player::One) - 1e-12 {
                rep.option_violations += 1;
            }

            // No admissible increase of y1 on the saturated face.
            if region.label == JointLabel::WW && y.total() < p.theta - EPS_GEOM {
                let excess = d.dy1 - p.c;
                stats.dy1_excess_max = stats.dy1_excess_max.max(excess);
                if excess > 1e-8 {
                    rep.inequality_violations += 1;
                    rep.first_inequality_violation
                        .get_or_insert((x, y.y1, y.y2));
                }
            }
            if region.label == JointLabel::WW {
                let thr = self
                    .curve
                    .threshold(y.y1, y.y2)
                    .min(self.curve.threshold(y.y2, y.y1));
                if interior && x <= thr - margin {
                    let r = self.residual_pde(x, y)?.abs() / (1.0 + x.abs());
                    rep.pde_interior_max = rep.pde_interior_max.max(r);
                    stats.pde_max = stats.pde_max.max(r);
                    stats.pde_sum += r;
                    stats.pde_count += 1;
                }
            }
            if region.player2 == Membership::Install && y.y2 >= dy && y.total() + dy <= p.theta {
                let lo = SimplexPoint::new(y.y1, y.y2 - dy);
                let hi = SimplexPoint::new(y.y1, y.y2 + dy);
                if self.classify(x, lo) == region && self.classify(x, hi) == region {
                    let fd = (self.value(x, hi, Player::One)? - self.value(x, lo, Player::One)?)
                        / (2.0 * dy);
                    rep.dy2_in_i2_max = rep.dy2_in_i2_max.max(fd.abs());
                    stats.dy2_abs_max = stats.dy2_abs_max.max(fd.abs());
                }
            }
        }
        Ok(rep)
    }

    /// Jumps of `V1`, `d_x V1` and `d_xx V1` across the boundaries, from central
    /// differences with step `1e-4 theta` on either side of the interface.
    pub fn interface_jumps(&self, ny: usize) -> Result<InterfaceJumps> {
        let p = &self.params;
        let eps = 1e-4 * p.theta;
        let h = p.theta / ny as f64;
        let mut out = InterfaceJumps::default();
        let f = |x: f64, y: SimplexPoint| self.value(x, y, Player::One);
        for i in 0..=ny {
            for j in 0..=ny - i {
                let y = SimplexPoint::new(i as f64 * h, j as f64 * h);
                if y.total() >= p.theta - eps {
                    continue;
                }
                // Own boundary of player 1, then that of player 2.
                for (xb, own) in [
                    (self.curve.threshold(y.y1, y.y2), true),
                    (self.curve.threshold(y.y2, y.y1), false),
                ] {
                    if !xb.is_finite() {
                        continue;
                    }
                    let (a, b) = (xb - eps, xb + eps);
                    let jump_v = (f(b, y)? - f(a, y)?).abs();
                    let d1 = |x: f64| -> Result<(f64, f64)> {
                        let (vm, v0, vp) = (f(x - eps, y)?, f(x, y)?, f(x + eps, y)?);
                        Ok(((vp - vm) / (2.0 * eps), (vp - 2.0 * v0 + vm) / (eps * eps)))
                    };
                    let (da, dda) = d1(a - eps)?;
                    let (db, ddb) = d1(b + eps)?;
                    let slot = if own { &mut out.own } else { &mut out.other };
                    slot.value = slot.value.max(jump_v);
                    slot.dx = slot.dx.max((db - da).abs());
                    slot.dxx = slot.dxx.max((ddb - dda).abs());
                    if i == j {
                        out.diagonal_value = out.diagonal_value.max(jump_v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Rows for the value CSV over `probe`.
    pub fn grid(&self, probe: &ProbeBox) -> Result<Vec<ValueRow>> {
        let theta = self.params.theta;
        let h = theta / probe.ny as f64;
        let ys: Vec<SimplexPoint> = (0..=probe.ny)
            .flat_map(|i| (0..=probe.ny - i).map(move |j| (i, j)))
            .map(|(i, j)| SimplexPoint::new(i as f64 * h, j as f64 * h))
            .collect();
        let cols: Vec<Vec<ValueRow>> = ys
            .par_iter()
            .map(|&y| {
                (0..=probe.nx)
                    .map(|k| {
                        let x = probe.x_lo + (probe.x_hi - probe.x_lo) * k as f64 / probe.nx as f64;
                        let d = self.derivs1(x, y)?;
                        Ok(ValueRow {
                            x,
                            y1: y.y1,
                            y2: y.y2,
                            region: self.classify(x, y).label,
                            v1: d.v,
                            v2: self.value(x, y, Player::Two)?,
                            dv1dy1: d.dy1,
                            dv1dy2: d.dy2,
                            pde_residual: self.residual_pde(x, y)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(cols.into_iter().flatten().collect())
    }
}

/// Price range and `y` resolution of a probe sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeBox {
    pub x_lo: f64,
    pub x_hi: f64,
    /// Price intervals.
    pub nx: usize,
    /// Triangular `y` grid with `ny` intervals per side.
    pub ny: usize,
}

/// One output row of the value grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ValueRow {
    pub x: f64,
    pub y1: f64,
    pub y2: f64,
    pub region: JointLabel,
    pub v1: f64,
    pub v2: f64,
    pub dv1dy1: f64,
    pub dv1dy2: f64,
    pub pde_residual: f64,
}

/// Per-region residual statistics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegionStats {
    pub label: JointLabel,
    pub states: usize,
    /// Relative PDE residual `|.|/(1+|x|)` over interior probes.
    pub pde_max: f64,
    pub pde_sum: f64,
    pub pde_count: usize,
    /// Largest `d_y1 V1 - c`.
    pub dy1_excess_max: f64,
    /// Largest `|d_y2 V1|` by central differences where player 2 installs.
    pub dy2_abs_max: f64,
}

impl RegionStats {
    pub fn pde_mean(&self) -> f64 {
        if self.pde_count == 0 {
            f64::NAN
        } else {
            self.pde_sum / self.pde_count as f64
        }
    }
}

/// Jumps across one family of interfaces.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Jumps {
    pub value: f64,
    pub dx: f64,
    pub dxx: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct InterfaceJumps {
    /// Across player 1's boundary.
    pub own: Jumps,
    /// Across player 2's boundary.
    pub other: Jumps,
    /// Value jump across the joint installation interface on the diagonal.
    pub diagonal_value: f64,
}

/// Diagnostics of one probe sweep. Constants are reported, not asserted.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub states: usize,
    /// Growth constant `K` with `|V1| <= K (1 + |x|)`.
    pub growth_k: f64,
    /// Lipschitz constant `L` of `d_x V1` in `x`.
    pub lipschitz_l: f64,
    /// States with `m1(y) < 0`, where `V1 >= R1` is not expected.
    pub negative_m_states: usize,
    pub first_negative_m: Option<(f64, f64, f64)>,
    /// States with `m1(y) >= 0` and `V1 < R1`.
    pub option_violations: usize,
    /// Joint waiting states with `d_y1 V1 > c`.
    pub inequality_violations: usize,
    pub first_inequality_violation: Option<(f64, f64, f64)>,
    /// Largest `|d_y2 V1|` where player 2 installs.
    pub dy2_in_i2_max: f64,
    /// Largest relative PDE residual over interior joint waiting probes.
    pub pde_interior_max: f64,
    pub regions: [RegionStats; 4],
    pub interface: InterfaceJumps,
}

fn label_index(l: JointLabel) -> usize {
    match l {
        JointLabel::WW => 0,
        JointLabel::WI => 1,
        JointLabel::IW => 2,
        JointLabel::II => 3,
    }
}

impl ProbeReport {
    fn empty() -> Self {
        let stats = |label| RegionStats {
            label,
            states: 0,
            pde_max: 0.0,
            pde_sum: 0.0,
            pde_count: 0,
            dy1_excess_max: f64::NEG_INFINITY,
            dy2_abs_max: 0.0,
        };
        ProbeReport {
            states: 0,
            growth_k: 0.0,
            lipschitz_l: 0.0,
            negative_m_states: 0,
            first_negative_m: None,
            option_violations: 0,
            inequality_violations: 0,
            first_inequality_violation: None,
            dy2_in_i2_max: 0.0,
            pde_interior_max: 0.0,
            regions: [
                stats(JointLabel::WW),
                stats(JointLabel::WI),
                stats(JointLabel::IW),
                stats(JointLabel::II),
            ],
            interface: InterfaceJumps::default(),
        }
    }

    fn merge(&mut self, o: ProbeReport) {
        self.states += o.states;
        self.growth_k = self.growth_k.max(o.growth_k);
        self.lipschitz_l = self.lipschitz_l.max(o.lipschitz_l);
        self.negative_m_states += o.negative_m_states;
        if self.first_negative_m.is_none() {
            self.first_negative_m = o.first_negative_m;
        }
        self.option_violations += o.option_violations;
        self.inequality_violations += o.inequality_violations;
        if self.first_inequality_violation.is_none() {
            self.first_inequality_violation = o.first_inequality_violation;
        }
        self.dy2_in_i2_max = self.dy2_in_i2_max.max(o.dy2_in_i2_max);
        self.pde_interior_max = self.pde_interior_max.max(o.pde_interior_max);
        for (a, b) in self.regions.iter_mut().zip(o.regions) {
            a.states += b.states;
            a.pde_max = a.pde_max.max(b.pde_max);
            a.pde_sum += b.pde_sum;
            a.pde_count += b.pde_count;
            a.dy1_excess_max = a.dy1_excess_max.max(b.dy1_excess_max);
            a.dy2_abs_max = a.dy2_abs_max.max(b.dy2_abs_max);
        }
    }
}

/// Limit of `d_y1 V1 - c` on the face under a twice differentiable closure at price `x`:
/// `x/(rho+k) + k(mu - beta theta)/(rho (rho+k)) - c`.
pub fn remark_limit(p: &ModelParams, x: f64) -> f64 {
    let rk = p.rho + p.k;
    x / rk + p.k * (p.mu - p.beta * p.theta) / (p.rho * rk) - p.c
}

/// [`remark_limit`] at the face root for `y = (theta/4, 3 theta/4)`.
pub fn remark_inconsistency_check(psi: &PsiEvaluator) -> Result<f64> {
    let p = psi.params();
    let root = solve_side_ab(psi, SimplexPoint::new(0.25 * p.theta, 0.75 * p.theta))?;
    Ok(remark_limit(p, root.ftilde))
}

/// [`remark_limit`] with the root replaced by `F(C) + beta theta`.
pub fn remark_inconsistency_diagnostic(p: &ModelParams) -> f64 {
    remark_limit(p, crate::boundary::f_at_c(p) + p.beta * p.theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn field() -> &'static ValueField {
        static F: OnceLock<ValueField> = OnceLock::new();
        F.get_or_init(|| {
            ValueField::solve(
                ModelParams::reference(),
                &ValueConfig {
                    boundary: BoundaryConfig {
                        n: 100,
                        ..Default::default()
                    },
                    m_n: 40,
                },
            )
            .unwrap()
        })
    }

    #[test]
    fn r_i_examples() {
        let p = ModelParams::reference();
        let y = SimplexPoint::new(0.5, 0.5);
        assert!((r_i(&p, 1.0, y, Player::One) - 0.375).abs() < 1e-15);
        assert_eq!(r_i(&p, 1.0, SimplexPoint::new(0.0, 0.3), Player::One), 0.0);
    }

    #[test]
    fn classification_examples() {
        let f = field();
        let o = SimplexPoint::new(0.0, 0.0);
        assert_eq!(
            f.classify(f.curve().diag(0.0) - 1.0, o).label,
            JointLabel::WW
        );
        assert_eq!(f.classify(10.0, o).label, JointLabel::II);
        for x in [-3.0, 0.0, 1.5, 4.0] {
            assert_eq!(
                f.classify(x, SimplexPoint::new(0.6, 0.3)).player1,
                Membership::Saturated
            );
        }
    }

    #[test]
    fn value_reduces_to_continuation_and_face_values() {
        let f = field();
        let p = f.params();
        let y = SimplexPoint::new(0.1, 0.2);
        let x = 0.3;
        assert_eq!(f.classify(x, y).label, JointLabel::WW);
        assert_eq!(f.value(x, y, Player::One).unwrap(), f.v1(x, y).unwrap());
        let face = SimplexPoint::new(0.3, 0.7);
        for x in [-1.0, 0.5, 1.0] {
            let v = f.value(x, face, Player::One).unwrap();
            assert!((v - r_i(p, x, face, Player::One)).abs() < 1e-14);
        }
    }

    #[test]
    fn joint_installation_targets_the_diagonal() {
        let f = field();
        let y = SimplexPoint::new(0.05, 0.1);
        let x = f.curve().diag(0.3);
        assert_eq!(f.classify(x, y).label, JointLabel::II);
        let t = f.targets(x, y);
        assert!((t.y1 - 0.3).abs() < 1e-10 && (t.y2 - 0.3).abs() < 1e-10);
        let big = f.targets(100.0, y);
        assert_eq!((big.y1, big.y2), (0.5, 0.5));
    }

    #[test]
    fn pde_residual_vanishes_in_joint_waiting_region() {
        let f = field();
        for &(x, y1, y2) in &[
            (0.0, 0.1, 0.2),
            (0.9, 0.05, 0.4),
            (-2.0, 0.3, 0.1),
            (0.5, 0.2, 0.7),
        ] {
            let y = SimplexPoint::new(y1, y2);
            assert_eq!(f.classify(x, y).label, JointLabel::WW);
            let r = f.residual_pde(x, y).unwrap();
            assert!(r.abs() <= 1e-6 * (1.0 + x.abs()), "{r} at ({x},{y1},{y2})");
        }
    }

    #[test]
    fn r1_alone_solves_the_inhomogeneous_equation() {
        let p = ModelParams::reference();
        for &(x, y1, y2) in &[(0.0, 0.1, 0.2), (3.0, 0.5, 0.4), (-2.0, 0.0, 1.0)] {
            let y = SimplexPoint::new(y1, y2);
            let r = r_i(&p, x, y, Player::One);
            let rx = y1 / (p.rho + p.k);
            let res = p.k * (p.mu - p.beta * y.total() - x) * rx - p.rho * r + x * y1;
            assert!(res.abs() < 1e-14);
        }
    }

    #[test]
    fn smooth_fit_holds_at_nodes() {
        let (a, b) = field().node_smooth_fit_residuals().unwrap();
        assert!(a <= 1e-10 && b <= 1e-10, "{a} {b}");
    }

    #[test]
    fn diagonal_condition_at_c() {
        let r = field().diagonal_condition_residual().unwrap();
        assert!(r.abs() <= 1e-4, "{r}");
    }

    #[test]
    fn remark_values() {
        let psi = PsiEvaluator::new(ModelParams::reference());
        let v = remark_inconsistency_check(&psi).unwrap();
        assert!((v - 0.47985).abs() < 1e-4, "{v}");
        assert!(v > 0.4);
        let p = ModelParams::reference();
        assert!((remark_inconsistency_diagnostic(&p) - 0.25).abs() < 1e-14);
        assert!(remark_limit(&p, 2.5) > remark_limit(&p, 2.4));
    }

    #[test]
    fn interfaces_are_continuous() {
        let j = field().interface_jumps(20).unwrap();
        assert!(j.own.value < 1e-3 && j.other.value < 1e-3, "{j:?}");
        assert!(j.diagonal_value < 1e-3, "{j:?}");
    }

    #[test]
    fn value_grid_has_expected_rows() {
        let f = field();
        let probe = ProbeBox {
            x_lo: -1.0,
            x_hi: 3.0,
            nx: 4,
            ny: 4,
        };
        let rows = f.grid(&probe).unwrap();
        assert_eq!(rows.len(), 15 * 5);
        assert!(rows.iter().all(|r| r.v1.is_finite() && r.v2.is_finite()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reflection_identity(x in -2.0f64..4.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let f = field();
            let y = SimplexPoint::new(a * (1.0 - b), (1.0 - a) * (1.0 - b));
            let v2 = f.value(x, y, Player::Two).unwrap();
            let v1 = f.value(x, reflect(y), Player::One).unwrap();
            prop_assert_eq!(v1, v2);
            let r1 = f.classify(x, y);
            let r2 = f.classify(x, reflect(y));
            prop_assert_eq!((r1.player1, r1.player2), (r2.player2, r2.player1));
        }

        #[test]
        fn targets_land_in_joint_waiting_closure(x in -2.0f64..4.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let f = field();
            let y = SimplexPoint::new(a * (1.0 - b), (1.0 - a) * (1.0 - b));
            let t = f.targets(x, y);
            prop_assert!(t.y1 >= y.y1 && t.y2 >= y.y2);
            prop_assert!(t.total() <= 1.0 + 1e-12);
            for (own, other) in [(t.y1, t.y2), (t.y2, t.y1)] {
                prop_assert!(x <= f.curve().threshold(own, other) + 1e-9);
            }
        }
    }
}
