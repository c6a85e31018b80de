//! Herfindahl-Hirschman concentration and the horizontal-merger screen.
//!
//! Shares are percentages. The screen classifies the post-merger market
//! (below 1500 unconcentrated, 1500 to 2500 moderately, above 2500 highly
//! concentrated) and combines that with the HHI increase `2 * s_a * s_b`.
//! The printed thresholds leave an increase of exactly 100 or 200 unassigned;
//! here the stricter band starts strictly above the printed number, so 100
//! already warrants scrutiny and 200 still means scrutiny rather than a
//! presumption of market power.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const UNCONCENTRATED_BELOW: f64 = 1500.0;
pub const HIGHLY_ABOVE: f64 = 2500.0;
pub const SMALL_CHANGE_BELOW: f64 = 100.0;
pub const PRESUMPTION_ABOVE: f64 = 200.0;
const SHARE_SUM_SLACK: f64 = 1e-9;

pub const BOUNDARY_NOTE: &str = "an HHI increase of exactly 100 is treated as eligible for scrutiny; \
     an increase of exactly 200 is treated as scrutiny, not presumption";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MergerError {
    #[error("market share {index} is {value}; shares must be finite and non-negative")]
    NegativeShare { index: usize, value: f64 },
    #[error("market shares sum to {0}, more than 100")]
    SumExceeds100(f64),
    #[error("no market shares given")]
    Empty,
    #[error("merging index {index} out of range for {len} firms")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("a firm cannot merge with itself (index {0})")]
    SameFirm(usize),
}

fn validate_shares(shares: &[f64]) -> Result<(), MergerError> {
    if shares.is_empty() {
        return Err(MergerError::Empty);
    }
    for (index, &value) in shares.iter().enumerate() {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(MergerError::NegativeShare { index, value });
        }
    }
    let sum: f64 = shares.iter().sum();
    if sum > 100.0 + SHARE_SUM_SLACK {
        return Err(MergerError::SumExceeds100(sum));
    }
    Ok(())
}

/// `HHI = sum S_i^2` over percentage shares.
pub fn hhi(shares: &[f64]) -> Result<f64, MergerError> {
    validate_shares(shares)?;
    Ok(shares.iter().map(|s| s * s).sum())
}

/// HHI increase from merging firms with shares `s_a` and `s_b`.
pub fn delta_hhi(s_a: f64, s_b: f64) -> f64 {
    2.0 * s_a * s_b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioData")]
pub struct MergerScenario {
    shares: Vec<f64>,
    merging: [usize; 2],
}

#[derive(Deserialize)]
struct ScenarioData {
    shares: Vec<f64>,
    merging: [usize; 2],
}

impl TryFrom<ScenarioData> for MergerScenario {
    type Error = MergerError;

    fn try_from(d: ScenarioData) -> Result<Self, MergerError> {
        MergerScenario::new(d.shares, d.merging[0], d.merging[1])
    }
}

impl MergerScenario {
    /// `a` and `b` are zero-based indices into `shares`.
    pub fn new(shares: Vec<f64>, a: usize, b: usize) -> Result<Self, MergerError> {
        validate_shares(&shares)?;
        for index in [a, b] {
            if index >= shares.len() {
                return Err(MergerError::IndexOutOfRange {
                    index,
                    len: shares.len(),
                });
            }
        }
        if a == b {
            return Err(MergerError::SameFirm(a));
        }
        Ok(Self {
            shares,
            merging: [a, b],
        })
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn merging(&self) -> (usize, usize) {
        (self.merging[0], self.merging[1])
    }

    /// Share list after the merger: the pair is replaced by one firm at the lower index.
    pub fn merged_shares(&self) -> Vec<f64> {
        let (a, b) = self.merging();
        let (keep, drop) = (a.min(b), a.max(b));
        let mut out = self.shares.clone();
        out[keep] += out[drop];
        out.remove(drop);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarketClass {
    Unconcentrated,
    ModeratelyConcentrated,
    HighlyConcentrated,
}

impl MarketClass {
    pub fn of(hhi: f64) -> Self {
        if hhi < UNCONCENTRATED_BELOW {
            MarketClass::Unconcentrated
        } else if hhi <= HIGHLY_ABOVE {
            MarketClass::ModeratelyConcentrated
        } else {
            MarketClass::HighlyConcentrated
        }
    }
}

/// Ordered from most to least lenient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MergerAction {
    NoFurtherAnalysis,
    PotentialConcernScrutiny,
    PresumedEnhancesMarketPower,
}

impl fmt::Display for MergerAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MergerAction::NoFurtherAnalysis => "no further analysis required",
            MergerAction::PotentialConcernScrutiny => "potentially raises significant competitive concerns; warrants scrutiny",
            MergerAction::PresumedEnhancesMarketPower => "presumed likely to enhance market power",
        })
    }
}

/// Which row of the guideline table decided the action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiredRule {
    SmallChange,
    UnconcentratedMarket,
    ModeratelyConcentratedIncrease,
    HighlyConcentratedModerateIncrease,
    HighlyConcentratedLargeIncrease,
}

/// The guideline table: `(post-merger HHI, increase) -> (class, action, rule)`.
pub fn classify(post_hhi: f64, delta: f64) -> (MarketClass, MergerAction, FiredRule) {
    let class = MarketClass::of(post_hhi);
    let (action, rule) = if delta < SMALL_CHANGE_BELOW {
        (MergerAction::NoFurtherAnalysis, FiredRule::SmallChange)
    } else {
        match class {
            MarketClass::Unconcentrated => (MergerAction::NoFurtherAnalysis, FiredRule::UnconcentratedMarket),
            MarketClass::ModeratelyConcentrated => (
                MergerAction::PotentialConcernScrutiny,
                FiredRule::ModeratelyConcentratedIncrease,
            ),
            MarketClass::HighlyConcentrated if delta <= PRESUMPTION_ABOVE => (
                MergerAction::PotentialConcernScrutiny,
                FiredRule::HighlyConcentratedModerateIncrease,
            ),
            MarketClass::HighlyConcentrated => (
                MergerAction::PresumedEnhancesMarketPower,
                FiredRule::HighlyConcentratedLargeIncrease,
            ),
        }
    };
    (class, action, rule)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HhiVerdict {
    pub shares: Vec<f64>,
    pub merging: [usize; 2],
    pub merging_shares: [f64; 2],
    pub pre_hhi: f64,
    pub delta_hhi: f64,
    pub post_hhi: f64,
    /// Sum of listed shares; below 100 when a fringe is left out.
    pub coverage: f64,
    pub market_class: MarketClass,
    pub action: MergerAction,
    pub fired_rule: FiredRule,
    pub boundary_note: String,
}

pub fn screen(scenario: &MergerScenario) -> HhiVerdict {
    let (a, b) = scenario.merging();
    let shares = scenario.shares();
    let pre_hhi: f64 = shares.iter().map(|s| s * s).sum();
    let delta = delta_hhi(shares[a], shares[b]);
    let post_hhi = pre_hhi + delta;
    let (market_class, action, fired_rule) = classify(post_hhi, delta);
    HhiVerdict {
        shares: shares.to_vec(),
        merging: [a, b],
        merging_shares: [shares[a], shares[b]],
        pre_hhi,
        delta_hhi: delta,
        post_hhi,
        coverage: shares.iter().sum(),
        market_class,
        action,
        fired_rule,
        boundary_note: BOUNDARY_NOTE.to_string(),
    }
}
