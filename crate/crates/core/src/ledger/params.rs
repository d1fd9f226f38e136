use std::fmt;

use serde::{Deserialize, Serialize};

use super::Money;

/// The monetary variables of the contracts.
///
/// | field | meaning |
/// |-------|---------|
/// | `w`  | wage the client pays each cloud |
/// | `c`  | a cloud's cost of actually computing `f(x)` |
/// | `ch` | the TTP's fee for resolving a dispute |
/// | `d`  | deposit each cloud puts into the Prisoner's contract |
/// | `t`  | deposit each colluder puts into the Colluder's contract |
/// | `b`  | bribe the ringleader pays the follower |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub w: Money,
    pub c: Money,
    pub ch: Money,
    pub d: Money,
    pub t: Money,
    pub b: Money,
}

/// One of the five relations the parameters must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Violation {
    WageCoversCost,
    FeeExceedsWages,
    DepositExceedsCostAndFee,
    BribeBelowCost,
    ColluderDepositLargeEnough,
}

impl Violation {
    pub const ALL: [Violation; 5] = [
        Violation::WageCoversCost,
        Violation::FeeExceedsWages,
        Violation::DepositExceedsCostAndFee,
        Violation::BribeBelowCost,
        Violation::ColluderDepositLargeEnough,
    ];

    pub fn relation(self) -> &'static str {
        match self {
            Violation::WageCoversCost => "w >= c",
            Violation::FeeExceedsWages => "ch > 2w",
            Violation::DepositExceedsCostAndFee => "d > c + ch",
            Violation::BribeBelowCost => "b < c",
            Violation::ColluderDepositLargeEnough => "t > z + d - b",
        }
    }

    /// Structural relations keep the model meaningful at all (a cloud that is
    /// paid less than its cost never takes the job; a TTP cheaper than two
    /// wages makes the second cloud pointless). The other three are exactly
    /// the levers the equilibrium analysis probes, so the analysis accepts
    /// parameters that break them and reports what fails.
    pub fn is_structural(self) -> bool {
        matches!(self, Violation::WageCoversCost | Violation::FeeExceedsWages)
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.relation())
    }
}

impl Serialize for Violation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.relation())
    }
}

impl Params {
    pub fn new(w: u64, c: u64, ch: u64, d: u64, t: u64, b: u64) -> Self {
        Params { w: Money(w), c: Money(c), ch: Money(ch), d: Money(d), t: Money(t), b: Money(b) }
    }

    /// The worked example used throughout the docs and tests.
    pub fn example() -> Self {
        Params::new(100, 10, 201, 212, 309, 5)
    }

    /// `z = w − c + d − ch`: an honest cloud's payoff when the other cheats.
    pub fn z(&self) -> i64 {
        self.w.as_i64() - self.c.as_i64() + self.d.as_i64() - self.ch.as_i64()
    }

    pub fn holds(&self, v: Violation) -> bool {
        let (w, c, ch, d, t, b) =
            (self.w.as_i64(), self.c.as_i64(), self.ch.as_i64(), self.d.as_i64(), self.t.as_i64(), self.b.as_i64());
        match v {
            Violation::WageCoversCost => w >= c,
            Violation::FeeExceedsWages => ch > 2 * w,
            Violation::DepositExceedsCostAndFee => d > c + ch,
            Violation::BribeBelowCost => b < c,
            Violation::ColluderDepositLargeEnough => t > self.z() + d - b,
        }
    }

    /// Every violated relation, in a fixed order. Empty iff the parameters are
    /// valid.
    pub fn validate(&self) -> Vec<Violation> {
        Violation::ALL.into_iter().filter(|v| !self.holds(*v)).collect()
    }

    pub fn structural_violations(&self) -> Vec<Violation> {
        self.validate().into_iter().filter(|v| v.is_structural()).collect()
    }

    /// The client's deposit into the Traitor's contract, `w + 2d − ch`.
    /// Negative only when `d` is implausibly small.
    pub fn traitor_escrow(&self) -> Option<Money> {
        (self.w + self.d * 2).checked_sub(self.ch)
    }
}

/// Free-function spelling of [`Params::validate`].
pub fn validate_params(p: &Params) -> Vec<Violation> {
    p.validate()
}
