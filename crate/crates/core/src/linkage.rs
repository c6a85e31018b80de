//! Rasmussen dispersion indices, coefficients of variation and key sectors.
//!
//! `U_j` (power of dispersion) is the normalized column sum of the Leontief
//! inverse, the backward linkage; `U_i` (sensitivity of dispersion) is the
//! normalized row sum, the forward linkage. Both are scaled by the overall
//! mean of `B`, so each vector averages exactly one. The `V` coefficients
//! measure how unevenly a sector's requirements are spread.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::io_core::LeontiefInverse;

/// `U_j = ((1/n) b_.j) / ((1/n^2) sum b_ij)`
pub fn power_of_dispersion(b: &LeontiefInverse) -> Vec<f64> {
    normalized_means(b.col_sums(), b.overall_mean())
}

/// `U_i = ((1/n) b_i.) / ((1/n^2) sum b_ij)`
pub fn sensitivity_of_dispersion(b: &LeontiefInverse) -> Vec<f64> {
    normalized_means(b.row_sums(), b.overall_mean())
}

fn normalized_means(sums: &[f64], overall_mean: f64) -> Vec<f64> {
    let n = sums.len() as f64;
    sums.iter().map(|s| (s / n) / overall_mean).collect()
}

/// Sample standard deviation (divisor `n - 1`) over the mean.
fn sample_cv(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1.0)).sqrt() / mean
}

/// `(V_j, V_i)`: column-wise and row-wise coefficients of variation of `B`.
pub fn variation_coefficients(b: &LeontiefInverse) -> (Vec<f64>, Vec<f64>) {
    let m = b.matrix();
    let backward = (0..m.cols()).map(|j| sample_cv(&m.column(j))).collect();
    let forward = (0..m.rows()).map(|i| sample_cv(m.row(i))).collect();
    (backward, forward)
}

/// How "relatively low" variation is decided at the key-sector gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum VThresholdRule {
    /// At or below the median of the respective `V` vector.
    #[default]
    Median,
    /// Fixed cut-offs for `V_j` and `V_i`.
    Fixed { backward: f64, forward: f64 },
}

impl VThresholdRule {
    /// Resolved `(theta_backward, theta_forward)`.
    pub fn thresholds(&self, v_backward: &[f64], v_forward: &[f64]) -> (f64, f64) {
        match *self {
            VThresholdRule::Median => (median(v_backward), median(v_forward)),
            VThresholdRule::Fixed { backward, forward } => (backward, forward),
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len().is_multiple_of(2) {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    }
}

/// Relative slack on every key-sector comparison. Values that are equal in
/// exact arithmetic (two sectors with the same V, a U of exactly 1) come out
/// of the inverse a few ulps apart depending on sector order; without slack
/// the flag would depend on that noise.
pub const KEY_SECTOR_TIE_TOL: f64 = 1e-12;

/// Flags sector `k` iff `U_j[k] > 1`, `U_i[k] > 1`, `V_j[k] <= theta_b` and `V_i[k] <= theta_f`,
/// each up to [`KEY_SECTOR_TIE_TOL`].
pub fn key_sectors(
    u_backward: &[f64],
    u_forward: &[f64],
    v_backward: &[f64],
    v_forward: &[f64],
    thresholds: (f64, f64),
) -> Vec<bool> {
    let (theta_b, theta_f) = thresholds;
    let above_one = |u: f64| u > 1.0 + KEY_SECTOR_TIE_TOL;
    let within = |v: f64, theta: f64| v <= theta + KEY_SECTOR_TIE_TOL * theta.abs().max(1.0);
    (0..u_backward.len())
        .map(|k| {
            above_one(u_backward[k])
                && above_one(u_forward[k])
                && within(v_backward[k], theta_b)
                && within(v_forward[k], theta_f)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageReport {
    pub sector_labels: Vec<String>,
    pub u_backward: Vec<f64>,
    pub u_forward: Vec<f64>,
    pub v_backward: Vec<f64>,
    pub v_forward: Vec<f64>,
    pub key_sector: Vec<bool>,
    pub v_rule: VThresholdRule,
    /// `(theta_backward, theta_forward)` actually applied.
    pub v_threshold_used: (f64, f64),
}

impl LinkageReport {
    pub fn compute(b: &LeontiefInverse, v_rule: VThresholdRule) -> Self {
        let u_backward = power_of_dispersion(b);
        let u_forward = sensitivity_of_dispersion(b);
        let (v_backward, v_forward) = variation_coefficients(b);
        let v_threshold_used = v_rule.thresholds(&v_backward, &v_forward);
        let key_sector = key_sectors(&u_backward, &u_forward, &v_backward, &v_forward, v_threshold_used);
        Self {
            sector_labels: b.sector_labels().to_vec(),
            u_backward,
            u_forward,
            v_backward,
            v_forward,
            key_sector,
            v_rule,
            v_threshold_used,
        }
    }

    pub fn len(&self) -> usize {
        self.sector_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sector_labels.is_empty()
    }

    /// `sector,U_backward,U_forward,V_backward,V_forward,key_sector`, six decimals.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["sector", "U_backward", "U_forward", "V_backward", "V_forward", "key_sector"])?;
        for k in 0..self.len() {
            w.write_record([
                self.sector_labels[k].clone(),
                format!("{:.6}", self.u_backward[k]),
                format!("{:.6}", self.u_forward[k]),
                format!("{:.6}", self.v_backward[k]),
                format!("{:.6}", self.v_forward[k]),
                self.key_sector[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
