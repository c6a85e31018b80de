//! Technology content coefficient (TCC) and technology content added (TCA).
//!
//! A transformation facility is scored on technoware, inforware, humanware and
//! orgaware, each in `[1, 9]`. The coefficient is the multiplicative form
//! `TCC = alpha * T^b1 * I^b2 * H^b3 * O^b4`, where `alpha` is the national
//! climate factor and the intensities satisfy `0 < b_i` and `sum b_i < 1`.
//! TCA discounts economic value added by technology quality: `TCA = TCC/9 * EVA`.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const SCORE_MIN: f64 = 1.0;
pub const SCORE_MAX: f64 = 9.0;
/// Smallest accepted intensity; keeps `b_i > 0` checkable in floating point.
pub const BETA_MIN: f64 = 1e-6;
/// Largest accepted `sum b_i`.
pub const BETA_SUM_MAX: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldViolation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TechError {
    #[error("invalid technology profile: {}", join(.0))]
    InvalidProfile(Vec<FieldViolation>),
    #[error("TCC must lie in [0, 9], got {0}")]
    TccOutOfRange(f64),
    #[error("EVA must be non-negative and finite, got {0}")]
    InvalidEva(f64),
    #[error("scaling by (1 + {k}) moves {field} to {value}, outside [1, 9]")]
    ScaledOutOfRange { field: &'static str, value: f64, k: f64 },
}

fn join(v: &[FieldViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Competitive technology classes, ordered by increasing competitive impact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TechClass {
    Base,
    Key,
    Pacing,
    Emerging,
}

impl TechClass {
    pub const ALL: [TechClass; 4] = [TechClass::Base, TechClass::Key, TechClass::Pacing, TechClass::Emerging];

    /// Pacing and emerging technologies: the "last two types".
    pub fn is_advanced(self) -> bool {
        self >= TechClass::Pacing
    }
}

impl fmt::Display for TechClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TechClass::Base => "base",
            TechClass::Key => "key",
            TechClass::Pacing => "pacing",
            TechClass::Emerging => "emerging",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "T")]
    Technoware,
    #[serde(rename = "I")]
    Inforware,
    #[serde(rename = "H")]
    Humanware,
    #[serde(rename = "O")]
    Orgaware,
}

impl Component {
    pub const ALL: [Component; 4] = [
        Component::Technoware,
        Component::Inforware,
        Component::Humanware,
        Component::Orgaware,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> &'static str {
        ["T", "I", "H", "O"][self.index()]
    }
}

/// Analyst-supplied technology scores. JSON field names follow the short
/// symbols: `{T, I, H, O, beta: [4], alpha, eva, tech_class}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechnologyProfile {
    #[serde(rename = "T")]
    pub technoware: f64,
    #[serde(rename = "I")]
    pub inforware: f64,
    #[serde(rename = "H")]
    pub humanware: f64,
    #[serde(rename = "O")]
    pub orgaware: f64,
    #[serde(rename = "beta")]
    pub betas: [f64; 4],
    #[serde(rename = "alpha")]
    pub alpha_climate: f64,
    pub eva: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tech_class: Option<TechClass>,
    /// Where the score-9 "best practice" datum comes from (industry or global).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_practice_reference: Option<String>,
}

impl TechnologyProfile {
    pub fn scores(&self) -> [f64; 4] {
        [self.technoware, self.inforware, self.humanware, self.orgaware]
    }

    pub fn score(&self, c: Component) -> f64 {
        self.scores()[c.index()]
    }

    pub fn with_score(&self, c: Component, value: f64) -> Self {
        let mut p = self.clone();
        match c {
            Component::Technoware => p.technoware = value,
            Component::Inforware => p.inforware = value,
            Component::Humanware => p.humanware = value,
            Component::Orgaware => p.orgaware = value,
        }
        p
    }

    pub fn beta_sum(&self) -> f64 {
        self.betas.iter().sum()
    }

    /// Every violated invariant, one entry per offending field.
    pub fn violations(&self) -> Vec<FieldViolation> {
        let mut out = Vec::new();
        let mut bad = |field: &str, message: String| {
            out.push(FieldViolation {
                field: field.to_string(),
                message,
            })
        };
        for c in Component::ALL {
            let v = self.score(c);
            if !(SCORE_MIN..=SCORE_MAX).contains(&v) {
                bad(c.symbol(), format!("score {v} outside [1, 9]"));
            }
        }
        for (i, &b) in self.betas.iter().enumerate() {
            if !(BETA_MIN..1.0).contains(&b) {
                bad(&format!("beta[{i}]"), format!("intensity {b} outside (0, 1)"));
            }
        }
        let sum = self.beta_sum();
        if sum.is_nan() || sum > BETA_SUM_MAX {
            bad("beta", format!("intensities sum to {sum}, must be below 1"));
        }
        if !(0.0..=1.0).contains(&self.alpha_climate) {
            bad("alpha", format!("climate factor {} outside [0, 1]", self.alpha_climate));
        }
        if !(self.eva >= 0.0 && self.eva.is_finite()) {
            bad("eva", format!("economic value added {} must be non-negative", self.eva));
        }
        out
    }

    pub fn validate(&self) -> Result<(), TechError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(TechError::InvalidProfile(v))
        }
    }
}

fn tcc_unchecked(p: &TechnologyProfile) -> f64 {
    p.scores()
        .iter()
        .zip(&p.betas)
        .fold(p.alpha_climate, |acc, (x, b)| acc * x.powf(*b))
}

/// `TCC = alpha * T^b1 * I^b2 * H^b3 * O^b4`, in `[0, 9)`.
pub fn tcc(p: &TechnologyProfile) -> Result<f64, TechError> {
    p.validate()?;
    Ok(tcc_unchecked(p))
}

/// `TCA = (TCC / 9) * EVA`.
pub fn tca(tcc_value: f64, eva: f64) -> Result<f64, TechError> {
    if !(0.0..=SCORE_MAX).contains(&tcc_value) {
        return Err(TechError::TccOutOfRange(tcc_value));
    }
    if !(eva >= 0.0 && eva.is_finite()) {
        return Err(TechError::InvalidEva(eva));
    }
    Ok(tcc_value / SCORE_MAX * eva)
}

/// `d(TCC)/dx = b_x * TCC / x` for the selected component.
pub fn component_elasticity(p: &TechnologyProfile, c: Component) -> Result<f64, TechError> {
    let t = tcc(p)?;
    Ok(p.betas[c.index()] * t / p.score(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub k: f64,
    /// `(TCC(scaled) - TCC) / TCC`.
    pub relative_change: f64,
    /// First-order prediction `k * sum b_i`.
    pub predicted: f64,
    pub beta_sum: f64,
}

/// Scales all four scores by `(1 + k)` and compares the proportional TCC
/// change with `k * sum b_i`. With `sum b_i < 1` the change stays below `k`
/// (decreasing returns to scale).
pub fn validate_scaling_property(p: &TechnologyProfile, k: f64) -> Result<ScalingReport, TechError> {
    let base = tcc(p)?;
    let mut scaled = p.clone();
    for c in Component::ALL {
        let v = p.score(c) * (1.0 + k);
        if !(SCORE_MIN..=SCORE_MAX).contains(&v) {
            return Err(TechError::ScaledOutOfRange {
                field: c.symbol(),
                value: v,
                k,
            });
        }
        scaled = scaled.with_score(c, v);
    }
    let after = tcc_unchecked(&scaled);
    let relative_change = if base == 0.0 { 0.0 } else { (after - base) / base };
    Ok(ScalingReport {
        k,
        relative_change,
        predicted: k * p.beta_sum(),
        beta_sum: p.beta_sum(),
    })
}

/// TCC, TCA and all four elasticities in one pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechAssessment {
    pub tcc: f64,
    pub tca: f64,
    pub elasticities: Elasticities,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elasticities {
    #[serde(rename = "T")]
    pub technoware: f64,
    #[serde(rename = "I")]
    pub inforware: f64,
    #[serde(rename = "H")]
    pub humanware: f64,
    #[serde(rename = "O")]
    pub orgaware: f64,
}

/// What the CLI and HTTP tools print: the assessment, plus the scaling check when asked for.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TccReport {
    #[serde(flatten)]
    pub assessment: TechAssessment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingReport>,
}

pub fn assess(p: &TechnologyProfile) -> Result<TechAssessment, TechError> {
    let t = tcc(p)?;
    let e = |c: Component| p.betas[c.index()] * t / p.score(c);
    Ok(TechAssessment {
        tcc: t,
        tca: tca(t, p.eva)?,
        elasticities: Elasticities {
            technoware: e(Component::Technoware),
            inforware: e(Component::Inforware),
            humanware: e(Component::Humanware),
            orgaware: e(Component::Orgaware),
        },
    })
}
