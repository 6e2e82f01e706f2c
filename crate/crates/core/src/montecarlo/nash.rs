use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use super::sim::{simulate, Arm, Policy};
use super::{PayoffEstimate, SimConfig};
use crate::error::{Error, Result};
use crate::params::{Player, SimplexPoint};
use crate::valuefn::ValueField;

/// Unilateral deviation of the tested player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Deviation {
    /// Own boundary moved by the given amount.
    Shift(f64),
    /// Extra lump at time zero on top of the equilibrium lump.
    Lump(f64),
    Never,
}

impl Deviation {
    fn policy(self) -> Policy {
        match self {
            Deviation::Shift(d) => Policy::Shift(d),
            Deviation::Lump(l) => Policy::ExtraLump(l),
            Deviation::Never => Policy::Never,
        }
    }

    /// Shifts `+-0.05`, `+-0.1`; lumps `0.05`, `0.1`, `0.2`; never installing.
    pub fn standard_family() -> Vec<Deviation> {
        vec![
            Deviation::Shift(0.05),
            Deviation::Shift(-0.05),
            Deviation::Shift(0.1),
            Deviation::Shift(-0.1),
            Deviation::Lump(0.05),
            Deviation::Lump(0.1),
            Deviation::Lump(0.2),
            Deviation::Never,
        ]
    }
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deviation::Shift(d) => write!(f, "shift:{d}"),
            Deviation::Lump(l) => write!(f, "lump:{l}"),
            Deviation::Never => f.write_str("never"),
        }
    }
}

impl FromStr for Deviation {
    type Err = Error;

    /// Parses `shift:<v>`, `lump:<v>` or `never`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::SimConfig(format!(
                "unknown deviation '{s}', expected shift:<v>, lump:<v> or never"
            ))
        };
        if s == "never" {
            return Ok(Deviation::Never);
        }
        let (kind, val) = s.split_once(':').ok_or_else(bad)?;
        let v: f64 = val.parse().map_err(|_| bad())?;
        if !v.is_finite() {
            return Err(bad());
        }
        match kind {
            "shift" => Ok(Deviation::Shift(v)),
            "lump" if v >= 0.0 => Ok(Deviation::Lump(v)),
            _ => Err(bad()),
        }
    }
}

/// One deviation arm against the equilibrium on common noise.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeviationResult {
    pub deviation: Deviation,
    pub payoff: PayoffEstimate,
    /// Deviation payoff minus equilibrium payoff, path by path.
    pub difference: PayoffEstimate,
    /// `difference.mean <= 2 difference.std_error`.
    pub no_gain: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NashReport {
    pub player: usize,
    pub x0: f64,
    pub y0: SimplexPoint,
    pub equilibrium: PayoffEstimate,
    pub value: f64,
    /// Discretization allowance `C sqrt(dt)`.
    pub allowance: f64,
    /// `|MC - V| <= 3 std_error + allowance`.
    pub value_matches: bool,
    pub arms: Vec<DeviationResult>,
}

impl NashReport {
    pub fn passed(&self) -> bool {
        self.value_matches && self.arms.iter().all(|a| a.no_gain)
    }
}

/// Equilibrium payoff of `player` against [`ValueField::value`] and the paired payoff
/// differences of each deviation, with the opponent on the equilibrium strategy.
/// `c_disc` scales the `sqrt(dt)` allowance for the reflected scheme.
pub fn nash_test(
    field: &ValueField,
    x0: f64,
    y0: SimplexPoint,
    player: Player,
    deviations: &[Deviation],
    cfg: &SimConfig,
    c_disc: f64,
) -> Result<NashReport> {
    let i = player.index() - 1;
    let mut arms = vec![Arm::EQUILIBRIUM];
    for d in deviations {
        let mut a = Arm::EQUILIBRIUM;
        a.policies[i] = d.policy();
        arms.push(a);
    }
    let batch = simulate(field.curve(), x0, y0, &arms, cfg)?;
    let equilibrium = batch.estimate(0, i);
    let value = field.value(x0, y0, player)?;
    let allowance = c_disc * cfg.dt.sqrt();
    let results = deviations
        .iter()
        .enumerate()
        .map(|(k, &deviation)| {
            let difference = batch.paired_difference(k + 1, 0, i);
            DeviationResult {
                deviation,
                payoff: batch.estimate(k + 1, i),
                difference,
                no_gain: difference.mean <= 2.0 * difference.std_error,
            }
        })
        .collect();
    Ok(NashReport {
        player: player.index(),
        x0,
        y0,
        equilibrium,
        value,
        allowance,
        value_matches: (equilibrium.mean - value).abs() <= 3.0 * equilibrium.std_error + allowance,
        arms: results,
    })
}
