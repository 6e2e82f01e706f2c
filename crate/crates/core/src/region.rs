//! Region labels shared by the one-shot and the dynamic game.

use serde::Serialize;
use std::fmt;

/// Why a player waits, or that they install.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Membership {
    /// Own level not above the opponent's, price below the boundary.
    Free,
    /// Own level above the opponent's but below half capacity, price below the diagonal boundary.
    Prolonged,
    /// Own level at or above half capacity, or no capacity left.
    Saturated,
    Install,
}

impl Membership {
    pub fn waits(self) -> bool {
        self != Membership::Install
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Membership::Free => "free",
            Membership::Prolonged => "prol",
            Membership::Saturated => "sat",
            Membership::Install => "install",
        }
    }
}

/// Joint label; the first letter refers to player 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JointLabel {
    WW,
    WI,
    IW,
    II,
}

impl JointLabel {
    pub fn from_memberships(m1: Membership, m2: Membership) -> Self {
        match (m1.waits(), m2.waits()) {
            (true, true) => JointLabel::WW,
            (true, false) => JointLabel::WI,
            (false, true) => JointLabel::IW,
            (false, false) => JointLabel::II,
        }
    }
}

impl fmt::Display for JointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JointLabel::WW => "W1W2",
            JointLabel::WI => "W1I2",
            JointLabel::IW => "I1W2",
            JointLabel::II => "I1I2",
        };
        f.write_str(s)
    }
}

/// Classification of one state for both players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Region {
    pub label: JointLabel,
    pub player1: Membership,
    pub player2: Membership,
}

impl Region {
    pub fn new(player1: Membership, player2: Membership) -> Self {
        Region {
            label: JointLabel::from_memberships(player1, player2),
            player1,
            player2,
        }
    }

    /// True if either player waits because of saturation.
    pub fn saturating(&self) -> bool {
        self.player1 == Membership::Saturated || self.player2 == Membership::Saturated
    }
}
