use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{PayoffEstimate, SimConfig};
use crate::boundary::BoundaryCurve;
use crate::error::{Error, Result};
use crate::params::{ModelParams, SimplexPoint};

/// Installation rule of one player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Policy {
    /// Reflected equilibrium strategy.
    Equilibrium,
    /// Equilibrium strategy with the own boundary moved up by the given amount.
    Shift(f64),
    /// Equilibrium strategy plus an extra lump at time zero.
    ExtraLump(f64),
    /// A single lump of the given size at time zero, nothing afterwards.
    LumpOnly(f64),
    Never,
}

impl Policy {
    /// Boundary shift if the policy reflects after time zero.
    fn reflect_shift(self) -> Option<f64> {
        match self {
            Policy::Equilibrium | Policy::ExtraLump(_) => Some(0.0),
            Policy::Shift(d) => Some(d),
            Policy::LumpOnly(_) | Policy::Never => None,
        }
    }
}

/// Policies of both players; index 0 is player 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arm {
    pub policies: [Policy; 2],
}

impl Arm {
    pub const EQUILIBRIUM: Arm = Arm {
        policies: [Policy::Equilibrium, Policy::Equilibrium],
    };
    pub const ZERO_CONTROL: Arm = Arm {
        policies: [Policy::Never, Policy::Never],
    };

    pub fn lump_only(i1: f64, i2: f64) -> Arm {
        Arm {
            policies: [Policy::LumpOnly(i1), Policy::LumpOnly(i2)],
        }
    }
}

/// Per-path, per-arm result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSummary {
    pub payoff: [f64; 2],
    /// Levels right after time zero and at the horizon.
    pub initial: [f64; 2],
    pub terminal: [f64; 2],
    pub max_abs_x: f64,
    /// Largest single-step increment of either control after time zero.
    pub max_increment: f64,
    /// Largest `X - F` over post-update states of reflecting players.
    pub boundary_excess: f64,
    /// Largest `Y1 + Y2 - theta`.
    pub simplex_excess: f64,
    /// False if any level ever decreased.
    pub monotone: bool,
}

/// Full trajectory of one arm on one path.
#[derive(Debug, Clone, Serialize)]
pub struct SimPath {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    /// Cumulative controls including the time-zero lump.
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
}

/// Results of all arms over all paths.
#[derive(Debug, Clone)]
pub struct SimBatch {
    pub params: ModelParams,
    pub cfg: SimConfig,
    pub arms: Vec<Arm>,
    /// `paths[arm][path]`.
    pub paths: Vec<Vec<PathSummary>>,
}

impl SimBatch {
    /// Samples of one arm and player, averaged over antithetic pairs.
    fn samples(&self, arm: usize, player: usize) -> Vec<f64> {
        let v: Vec<f64> = self.paths[arm].iter().map(|s| s.payoff[player]).collect();
        if self.cfg.antithetic {
            v.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect()
        } else {
            v
        }
    }

    /// `theta max|X| e^{-rho T} / rho` over the paths of `arm`.
    pub fn truncation_bound(&self, arm: usize) -> f64 {
        let p = &self.params;
        let mx = self.paths[arm]
            .iter()
            .map(|s| s.max_abs_x)
            .fold(0.0, f64::max);
        p.theta * mx * (-p.rho * self.cfg.horizon).exp() / p.rho
    }

    /// Payoff of `player` (0 or 1) under `arm`.
    pub fn estimate(&self, arm: usize, player: usize) -> PayoffEstimate {
        PayoffEstimate::from_samples(&self.samples(arm, player), self.truncation_bound(arm))
    }

    /// Paired difference `arm_a - arm_b` for `player` on common noise.
    pub fn paired_difference(&self, arm_a: usize, arm_b: usize, player: usize) -> PayoffEstimate {
        let a = self.samples(arm_a, player);
        let b = self.samples(arm_b, player);
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        PayoffEstimate::from_samples(
            &d,
            self.truncation_bound(arm_a) + self.truncation_bound(arm_b),
        )
    }

    /// Worst invariant gauges of one arm:
    /// `(max boundary excess, max simplex excess, all monotone, max post-zero increment)`.
    pub fn invariants(&self, arm: usize) -> (f64, f64, bool, f64) {
        self.paths[arm].iter().fold(
            (f64::NEG_INFINITY, f64::NEG_INFINITY, true, 0.0),
            |acc, s| {
                (
                    acc.0.max(s.boundary_excess),
                    acc.1.max(s.simplex_excess),
                    acc.2 && s.monotone,
                    acc.3.max(s.max_increment),
                )
            },
        )
    }
}

struct Player {
    shift: Option<f64>,
    thr: f64,
}

fn threshold(curve: &BoundaryCurve, pl: &Player, own: f64, other: f64) -> f64 {
    match pl.shift {
        Some(d) => curve.threshold(own, other) + d,
        None => f64::INFINITY,
    }
}

/// Time-zero levels of all players from the pre-lump state.
fn initial_levels(curve: &BoundaryCurve, x0: f64, y0: [f64; 2], pols: [Policy; 2]) -> [f64; 2] {
    let theta = curve.params().theta;
    let mut t = [0.0; 2];
    for i in 0..2 {
        let (own, other) = (y0[i], y0[1 - i]);
        t[i] = match pols[i] {
            Policy::Equilibrium | Policy::ExtraLump(_) => curve.target(x0, own, other),
            Policy::Shift(d) => curve.target(x0 - d, own, other),
            Policy::LumpOnly(a) => own + a.max(0.0),
            Policy::Never => own,
        };
    }
    for i in 0..2 {
        if let Policy::ExtraLump(l) = pols[i] {
            t[i] += l.max(0.0);
        }
    }
    for i in 0..2 {
        if matches!(pols[i], Policy::ExtraLump(_) | Policy::LumpOnly(_)) {
            t[i] = t[i].min(theta - t[1 - i]).max(y0[i]);
        }
    }
    t
}

struct Ctx<'a> {
    curve: &'a BoundaryCurve,
    p: ModelParams,
    cfg: SimConfig,
    x0: f64,
    y0: [f64; 2],
}

impl Ctx<'_> {
    /// Runs all arms on path `index`; records the trajectory of arm 0 into `rec` when given.
    fn run(&self, arms: &[Arm], index: usize, mut rec: Option<&mut SimPath>) -> Vec<PathSummary> {
        let p = &self.p;
        let dt = self.cfg.dt;
        let steps = self.cfg.steps();
        let sdt = p.sigma * dt.sqrt();
        let decay = (-p.rho * dt).exp();
        let (stream, sign) = if self.cfg.antithetic {
            ((index / 2) as u64, if index % 2 == 1 { -1.0 } else { 1.0 })
        } else {
            (index as u64, 1.0)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(stream);

        struct State {
            x: f64,
            y: [f64; 2],
            pl: [Player; 2],
            prev_f: [f64; 2],
            sum: PathSummary,
        }
        let mut st: Vec<State> = arms
            .iter()
            .map(|arm| {
                let y = initial_levels(self.curve, self.x0, self.y0, arm.policies);
                let mut pl = arm.policies.map(|policy| Player {
                    shift: policy.reflect_shift(),
                    thr: 0.0,
                });
                for i in 0..2 {
                    pl[i].thr = threshold(self.curve, &pl[i], y[i], y[1 - i]);
                }
                let lump_cost = [0, 1].map(|i| p.c * (y[i] - self.y0[i]));
                let f0 = [self.x0 * y[0], self.x0 * y[1]];
                State {
                    x: self.x0,
                    y,
                    pl,
                    prev_f: f0,
                    sum: PathSummary {
                        payoff: [-lump_cost[0], -lump_cost[1]],
                        initial: y,
                        terminal: y,
                        max_abs_x: self.x0.abs(),
                        max_increment: 0.0,
                        boundary_excess: f64::NEG_INFINITY,
                        simplex_excess: y[0] + y[1] - p.theta,
                        monotone: y[0] >= self.y0[0] && y[1] >= self.y0[1],
                    },
                }
            })
            .collect();
        if let Some(r) = rec.as_deref_mut() {
            let y = st[0].y;
            *r = SimPath {
                times: vec![0.0],
                x: vec![self.x0],
                y1: vec![y[0]],
                y2: vec![y[1]],
                i1: vec![y[0] - self.y0[0]],
                i2: vec![y[1] - self.y0[1]],
            };
        }

        let mut disc = 1.0;
        for n in 1..=steps {
            let z: f64 = sign * rng.sample::<f64, _>(StandardNormal);
            let disc_prev = disc;
            disc *= decay;
            for s in st.iter_mut() {
                let drift = p.k * (p.mu - p.beta * (s.y[0] + s.y[1]) - s.x);
                s.x += drift * dt + sdt * z;
                let x = s.x;
                if x > s.pl[0].thr || x > s.pl[1].thr {
                    let old = s.y;
                    for i in 0..2 {
                        if x > s.pl[i].thr {
                            let d = s.pl[i].shift.unwrap_or(0.0);
                            let t = self.curve.f_bold_inverse(x - d, old[1 - i]);
                            if t > s.y[i] {
                                s.y[i] = t;
                            }
                        }
                    }
                    for i in 0..2 {
                        let inc = s.y[i] - old[i];
                        s.sum.max_increment = s.sum.max_increment.max(inc);
                        s.sum.monotone &= inc >= 0.0;
                    }
                    for i in 0..2 {
                        s.pl[i].thr = threshold(self.curve, &s.pl[i], s.y[i], s.y[1 - i]);
                        if s.pl[i].shift.is_some() {
                            s.sum.boundary_excess = s.sum.boundary_excess.max(x - s.pl[i].thr);
                        }
                    }
                    s.sum.simplex_excess = s.sum.simplex_excess.max(s.y[0] + s.y[1] - p.theta);
                    for i in 0..2 {
                        s.sum.payoff[i] -= p.c * disc * (s.y[i] - old[i]);
                    }
                }
                s.sum.max_abs_x = s.sum.max_abs_x.max(x.abs());
                for i in 0..2 {
                    let f = x * s.y[i];
                    s.sum.payoff[i] += 0.5 * dt * (disc_prev * s.prev_f[i] + disc * f);
                    s.prev_f[i] = f;
                }
            }
            if let Some(r) = rec.as_deref_mut() {
                let s = &st[0];
                r.times.push(n as f64 * dt);
                r.x.push(s.x);
                r.y1.push(s.y[0]);
                r.y2.push(s.y[1]);
                r.i1.push(s.y[0] - self.y0[0]);
                r.i2.push(s.y[1] - self.y0[1]);
            }
        }
        st.into_iter()
            .map(|mut s| {
                s.sum.terminal = s.y;
                s.sum
            })
            .collect()
    }
}

fn context<'a>(
    curve: &'a BoundaryCurve,
    x0: f64,
    y0: SimplexPoint,
    cfg: &SimConfig,
) -> Result<Ctx<'a>> {
    let p = *curve.params();
    cfg.validate(&p)?;
    if !x0.is_finite() {
        return Err(Error::SimConfig(format!(
            "initial price must be finite, got {x0}"
        )));
    }
    let y0 = SimplexPoint::checked(y0.y1, y0.y2, p.theta)?;
    Ok(Ctx {
        curve,
        p,
        cfg: *cfg,
        x0,
        y0: [y0.y1, y0.y2],
    })
}

/// Simulates every arm on `cfg.n_paths` paths with common noise per path index.
pub fn simulate(
    curve: &BoundaryCurve,
    x0: f64,
    y0: SimplexPoint,
    arms: &[Arm],
    cfg: &SimConfig,
) -> Result<SimBatch> {
    let ctx = context(curve, x0, y0, cfg)?;
    let per_path: Vec<Vec<PathSummary>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| ctx.run(arms, i, None))
        .collect();
    let mut paths = vec![Vec::with_capacity(cfg.n_paths); arms.len()];
    for row in per_path {
        for (a, s) in row.into_iter().enumerate() {
            paths[a].push(s);
        }
    }
    Ok(SimBatch {
        params: ctx.p,
        cfg: *cfg,
        arms: arms.to_vec(),
        paths,
    })
}

/// Full trajectory of `arm` on path `index`.
pub fn simulate_path(
    curve: &BoundaryCurve,
    x0: f64,
    y0: SimplexPoint,
    arm: Arm,
    cfg: &SimConfig,
    index: usize,
) -> Result<(SimPath, PathSummary)> {
    let ctx = context(curve, x0, y0, cfg)?;
    let mut rec = SimPath {
        times: vec![],
        x: vec![],
        y1: vec![],
        y2: vec![],
        i1: vec![],
        i2: vec![],
    };
    let sum = ctx.run(&[arm], index, Some(&mut rec))[0];
    Ok((rec, sum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::BoundaryConfig;
    use crate::params::Player as P;
    use crate::psi::PsiEvaluator;
    use crate::static_game::{r_i, static_equilibrium, static_payoff, StaticState};
    use std::sync::OnceLock;

    fn curve() -> &'static BoundaryCurve {
        static C: OnceLock<BoundaryCurve> = OnceLock::new();
        C.get_or_init(|| {
            let psi = PsiEvaluator::new(ModelParams::reference());
            BoundaryCurve::solve(
                &psi,
                &BoundaryConfig {
                    n: 100,
                    ..Default::default()
                },
            )
            .unwrap()
        })
    }

    fn cfg(dt: f64, n: usize) -> SimConfig {
        SimConfig::new(&ModelParams::reference(), dt, n, 7).unwrap()
    }

    #[test]
    fn zero_capacity_gives_zero_payoff() {
        let b = simulate(
            curve(),
            0.3,
            SimplexPoint::new(0.0, 0.0),
            &[Arm::ZERO_CONTROL],
            &cfg(1e-2, 20),
        )
        .unwrap();
        assert!(b.paths[0].iter().all(|s| s.payoff == [0.0, 0.0]));
    }

    #[test]
    fn zero_control_matches_closed_form() {
        let p = ModelParams::reference();
        let y = SimplexPoint::new(0.3, 0.2);
        let b = simulate(curve(), 1.2, y, &[Arm::ZERO_CONTROL], &cfg(2e-3, 4000)).unwrap();
        for (i, pl) in [P::One, P::Two].into_iter().enumerate() {
            let e = b.estimate(0, i);
            let want = r_i(&p, 1.2, y, pl);
            assert!(
                (e.mean - want).abs() <= 3.0 * e.std_error,
                "{e:?} vs {want}"
            );
        }
    }

    #[test]
    fn lump_only_matches_static_payoff() {
        let p = ModelParams::reference();
        let s = StaticState::new(1.6, 0.1, 0.2);
        let inst = static_equilibrium(&p, &s);
        let b = simulate(
            curve(),
            s.x,
            s.y,
            &[Arm::lump_only(inst.i1, inst.i2)],
            &cfg(2e-3, 4000),
        )
        .unwrap();
        let e = b.estimate(0, 0);
        let want = static_payoff(&p, &s, &inst, P::One).unwrap();
        assert!(
            (e.mean - want).abs() <= 3.0 * e.std_error,
            "{e:?} vs {want}"
        );
    }

    #[test]
    fn ou_mean_far_below_boundary() {
        let p = ModelParams::reference();
        let mut c = cfg(1e-2, 2000);
        c.horizon = 1.0;
        let (x0, y) = (-4.0, SimplexPoint::new(0.1, 0.1));
        let mut xs = Vec::new();
        for i in 0..c.n_paths {
            let (path, sum) = simulate_path(curve(), x0, y, Arm::EQUILIBRIUM, &c, i).unwrap();
            assert_eq!(sum.terminal, [0.1, 0.1]);
            xs.push(*path.x.last().unwrap());
        }
        let e = PayoffEstimate::from_samples(&xs, 0.0);
        let mean = p.mu - p.beta * 0.2;
        let want = mean + (x0 - mean) * (-p.k * c.horizon).exp();
        // Euler recursion mean differs from the exact one by O(dt).
        let em = mean + (x0 - mean) * (1.0 - p.k * c.dt).powi(c.steps() as i32);
        assert!(
            (e.mean - em).abs() <= 3.0 * e.std_error,
            "{} vs {em}",
            e.mean
        );
        assert!((em - want).abs() < 0.01);
    }

    #[test]
    fn joint_installation_lumps_to_diagonal() {
        let c = curve();
        let x0 = c.diag(0.3);
        let b = simulate(
            c,
            x0,
            SimplexPoint::new(0.0, 0.1),
            &[Arm::EQUILIBRIUM],
            &cfg(1e-2, 2),
        )
        .unwrap();
        let s = b.paths[0][0];
        assert!((s.initial[0] - 0.3).abs() < 1e-10 && (s.initial[1] - 0.3).abs() < 1e-10);
    }

    #[test]
    fn path_invariants_and_merge() {
        let c = curve();
        let cf = cfg(1e-3, 1);
        let (path, sum) = simulate_path(
            c,
            1.2,
            SimplexPoint::new(0.05, 0.2),
            Arm::EQUILIBRIUM,
            &cf,
            3,
        )
        .unwrap();
        assert!(sum.monotone && sum.simplex_excess <= 1e-12 && sum.boundary_excess <= 1e-9);
        let mut merged = false;
        for k in 1..path.x.len() {
            assert!(path.y1[k] >= path.y1[k - 1] && path.y2[k] >= path.y2[k - 1]);
            let (a, b) = (path.y1[k], path.y2[k]);
            if merged {
                assert_eq!(a, b, "levels separated after merging");
            }
            merged |= a == b;
        }
    }

    #[test]
    fn swapping_players_swaps_payoffs_exactly() {
        let c = curve();
        let cf = cfg(5e-3, 50);
        let a = simulate(
            c,
            1.3,
            SimplexPoint::new(0.1, 0.25),
            &[Arm::EQUILIBRIUM],
            &cf,
        )
        .unwrap();
        let b = simulate(
            c,
            1.3,
            SimplexPoint::new(0.25, 0.1),
            &[Arm::EQUILIBRIUM],
            &cf,
        )
        .unwrap();
        for (s, t) in a.paths[0].iter().zip(&b.paths[0]) {
            assert_eq!(s.payoff[0], t.payoff[1]);
            assert_eq!(s.payoff[1], t.payoff[0]);
        }
    }

    #[test]
    fn higher_start_price_never_lowers_capacity() {
        let c = curve();
        let cf = cfg(5e-3, 40);
        let y = SimplexPoint::new(0.1, 0.2);
        let lo = simulate(c, 1.0, y, &[Arm::EQUILIBRIUM], &cf).unwrap();
        let hi = simulate(c, 1.4, y, &[Arm::EQUILIBRIUM], &cf).unwrap();
        for (s, t) in lo.paths[0].iter().zip(&hi.paths[0]) {
            assert!(
                t.terminal[0] >= s.terminal[0] - 1e-12 && t.terminal[1] >= s.terminal[1] - 1e-12
            );
        }
    }

    #[test]
    fn deterministic_given_seed_and_antithetic_pairs() {
        let c = curve();
        let mut cf = cfg(1e-2, 10);
        let y = SimplexPoint::new(0.1, 0.2);
        let a = simulate(c, 1.0, y, &[Arm::ZERO_CONTROL], &cf).unwrap();
        let b = simulate(c, 1.0, y, &[Arm::ZERO_CONTROL], &cf).unwrap();
        assert_eq!(a.paths, b.paths);
        cf.antithetic = true;
        let (p0, _) = simulate_path(c, 1.0, y, Arm::ZERO_CONTROL, &cf, 0).unwrap();
        let (p1, _) = simulate_path(c, 1.0, y, Arm::ZERO_CONTROL, &cf, 1).unwrap();
        // Without control the OU recursion is affine in the noise.
        let m = ModelParams::reference();
        let mean_path_end = {
            let mut x = 1.0;
            let mu = m.mu - m.beta * 0.3;
            for _ in 0..cf.steps() {
                x += m.k * (mu - x) * cf.dt;
            }
            x
        };
        let end = p0.x.len() - 1;
        assert!((0.5 * (p0.x[end] + p1.x[end]) - mean_path_end).abs() < 1e-9);
    }
}
