//! Interconnectedness measures over normalized coefficient shares.
//!
//! Each row (sales) or column (purchases) of a coefficient matrix is turned
//! into shares summing to one. Over those shares we compute the concentration
//! measure `G = sqrt(n (1 - sum c^2))`, which runs from 0 (a single tie) to
//! `sqrt(n - 1)` (perfectly even ties), and the Shannon entropy in nats, which
//! runs from 0 to `ln n`. `GI` blends the ranks of a linkage index and of `G`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::io_core::{IoTable, LeontiefInverse, TechCoefMatrix};
use crate::linkage::LinkageReport;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StructureError {
    #[error("line {line} sums to zero and cannot be normalized")]
    ZeroLine { line: usize },
    #[error("alpha_rank_weight must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("final-demand shares are only defined for row (sales) orientation")]
    FinalDemandNeedsRows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Each row divided by its row sum: how a sector's sales are spread.
    Row,
    /// Each column divided by its column sum: how a sector's purchases are spread.
    Column,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroLinePolicy {
    /// All-zero lines are flagged and left out of every statistic.
    #[default]
    Exclude,
    Error,
}

/// Shares matrix with one normalized line per sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedShares {
    pub orientation: Orientation,
    pub includes_final_demand: bool,
    lines: Vec<Vec<f64>>,
    excluded: Vec<bool>,
}

impl NormalizedShares {
    /// Shares of line `k`, or `None` when the line was all zero.
    pub fn line(&self, k: usize) -> Option<&[f64]> {
        if self.excluded[k] {
            None
        } else {
            Some(&self.lines[k])
        }
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Number of entries per line (`n`, or `n + 1` with final demand).
    pub fn line_len(&self) -> usize {
        self.lines.first().map_or(0, Vec::len)
    }

    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    fn map_lines(&self, f: impl Fn(&[f64]) -> f64) -> Vec<Option<f64>> {
        (0..self.len()).map(|k| self.line(k).map(&f)).collect()
    }
}

fn shares_from_lines(
    raw: Vec<Vec<f64>>,
    orientation: Orientation,
    includes_final_demand: bool,
    policy: ZeroLinePolicy,
) -> Result<NormalizedShares, StructureError> {
    let mut lines = Vec::with_capacity(raw.len());
    let mut excluded = Vec::with_capacity(raw.len());
    for (k, line) in raw.into_iter().enumerate() {
        let total: f64 = line.iter().sum();
        if total > 0.0 {
            lines.push(line.iter().map(|v| v / total).collect());
            excluded.push(false);
        } else {
            if policy == ZeroLinePolicy::Error {
                return Err(StructureError::ZeroLine { line: k + 1 });
            }
            lines.push(vec![0.0; line.len()]);
            excluded.push(true);
        }
    }
    Ok(NormalizedShares {
        orientation,
        includes_final_demand,
        lines,
        excluded,
    })
}

/// Row- or column-normalizes a coefficient (or total-requirements) matrix.
pub fn normalize(
    source: &Matrix,
    orientation: Orientation,
    policy: ZeroLinePolicy,
) -> Result<NormalizedShares, StructureError> {
    let raw = match orientation {
        Orientation::Row => source.to_rows(),
        Orientation::Column => (0..source.cols()).map(|j| source.column(j)).collect(),
    };
    shares_from_lines(raw, orientation, false, policy)
}

/// Row shares over `(Z_i1, .., Z_in, F_i)`: intermediate sales plus final demand.
///
/// Lines are divided by their own total, which equals `X_i` up to the table's
/// row-balance tolerance, so every line sums to one exactly.
pub fn normalize_with_final_demand(
    table: &IoTable,
    policy: ZeroLinePolicy,
) -> Result<NormalizedShares, StructureError> {
    let raw = (0..table.len())
        .map(|i| {
            let mut line = table.flows().row(i).to_vec();
            line.push(table.final_demand()[i]);
            line
        })
        .collect();
    shares_from_lines(raw, Orientation::Row, true, policy)
}

/// `G = sqrt(n_line (1 - sum c^2))` per line.
pub fn concentration_g(shares: &NormalizedShares) -> Vec<Option<f64>> {
    let n = shares.line_len() as f64;
    shares.map_lines(|c| {
        let sum_sq: f64 = c.iter().map(|x| x * x).sum();
        (n * (1.0 - sum_sq)).max(0.0).sqrt()
    })
}

/// Coefficient of variation with divisor `n` (population form) of raw values.
/// For shares of those values, `G^2 + V_n^2 = n - 1`.
pub fn variation_n_divisor(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Shannon entropy in nats, `sum c ln(1/c)` with `0 ln 0 = 0`.
pub fn entropy(shares: &NormalizedShares) -> Vec<Option<f64>> {
    shares.map_lines(|c| {
        c.iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| -x * x.ln())
            .sum::<f64>()
            .max(0.0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EntropyUnit {
    #[default]
    Nats,
    Bits,
    /// `H / ln(n_line)`, in `[0, 1]`.
    Normalized,
}

impl EntropyUnit {
    pub fn convert(self, h_nats: f64, line_len: usize) -> f64 {
        match self {
            EntropyUnit::Nats => h_nats,
            EntropyUnit::Bits => h_nats / std::f64::consts::LN_2,
            EntropyUnit::Normalized => h_nats / (line_len as f64).ln(),
        }
    }
}

/// Descending ranks (1 = largest); tied values share their average rank.
pub fn descending_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralIndex {
    pub alpha_rank_weight: f64,
    pub ranks_u: Vec<f64>,
    pub ranks_g: Vec<f64>,
    /// `alpha RG + (1 - alpha) RU`; smaller is better, like the ranks.
    pub gi: Vec<f64>,
}

pub const DEFAULT_ALPHA_RANK_WEIGHT: f64 = 0.5;

pub fn general_index(u: &[f64], g: &[f64], alpha_rank_weight: f64) -> Result<GeneralIndex, StructureError> {
    if !(0.0..=1.0).contains(&alpha_rank_weight) {
        return Err(StructureError::AlphaOutOfRange(alpha_rank_weight));
    }
    if u.len() != g.len() {
        return Err(StructureError::Dimension(format!(
            "{} linkage values but {} concentration values",
            u.len(),
            g.len()
        )));
    }
    let ranks_u = descending_ranks(u);
    let ranks_g = descending_ranks(g);
    let gi = ranks_u
        .iter()
        .zip(&ranks_g)
        .map(|(ru, rg)| alpha_rank_weight * rg + (1.0 - alpha_rank_weight) * ru)
        .collect();
    Ok(GeneralIndex {
        alpha_rank_weight,
        ranks_u,
        ranks_g,
        gi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyVariant {
    #[default]
    IntermediateOnly,
    /// Row entropy over intermediate sales plus final demand.
    WithFinalDemand,
}

impl EntropyVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            EntropyVariant::IntermediateOnly => "intermediate-only",
            EntropyVariant::WithFinalDemand => "with-final-demand",
        }
    }
}

impl std::str::FromStr for EntropyVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "intermediate-only" => Ok(Self::IntermediateOnly),
            "with-final-demand" => Ok(Self::WithFinalDemand),
            other => Err(format!(
                "unknown entropy variant {other:?} (expected intermediate-only or with-final-demand)"
            )),
        }
    }
}

/// Which matrix the shares are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Direct coefficients `A`.
    #[default]
    Coefficients,
    /// Leontief inverse `B`.
    TotalRequirements,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureOptions {
    pub basis: Basis,
    pub entropy_variant: EntropyVariant,
    pub alpha_rank_weight: f64,
}

impl Default for StructureOptions {
    fn default() -> Self {
        Self {
            basis: Basis::Coefficients,
            entropy_variant: EntropyVariant::IntermediateOnly,
            alpha_rank_weight: DEFAULT_ALPHA_RANK_WEIGHT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GiOrientation {
    /// Backward linkage `U_j` ranked with column (purchases) concentration.
    #[default]
    Backward,
    /// Forward linkage `U_i` ranked with row (sales) concentration.
    Forward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub sector_labels: Vec<String>,
    pub basis: Basis,
    pub entropy_variant: EntropyVariant,
    pub entropy_unit: EntropyUnit,
    pub g_row: Vec<Option<f64>>,
    pub g_col: Vec<Option<f64>>,
    pub h_row: Vec<Option<f64>>,
    pub h_col: Vec<Option<f64>>,
    pub alpha_rank_weight: f64,
    pub backward: GeneralIndex,
    pub forward: GeneralIndex,
}

impl StructureReport {
    pub fn compute(
        table: &IoTable,
        a: &TechCoefMatrix,
        b: &LeontiefInverse,
        linkage: &LinkageReport,
        opts: StructureOptions,
    ) -> Result<Self, StructureError> {
        let n = table.len();
        if a.len() != n || b.len() != n || linkage.len() != n {
            return Err(StructureError::Dimension(
                "table, coefficients, inverse and linkage report disagree on sector count".into(),
            ));
        }
        let source = match opts.basis {
            Basis::Coefficients => a.matrix(),
            Basis::TotalRequirements => b.matrix(),
        };
        let rows = normalize(source, Orientation::Row, ZeroLinePolicy::Exclude)?;
        let cols = normalize(source, Orientation::Column, ZeroLinePolicy::Exclude)?;
        let g_row = concentration_g(&rows);
        let g_col = concentration_g(&cols);
        let h_row = match opts.entropy_variant {
            EntropyVariant::IntermediateOnly => entropy(&rows),
            EntropyVariant::WithFinalDemand => {
                entropy(&normalize_with_final_demand(table, ZeroLinePolicy::Exclude)?)
            }
        };
        let h_col = entropy(&cols);

        // an all-zero line has no ties at all: rank it with the most concentrated
        let g_or_zero = |g: &[Option<f64>]| g.iter().map(|v| v.unwrap_or(0.0)).collect::<Vec<_>>();
        let backward = general_index(&linkage.u_backward, &g_or_zero(&g_col), opts.alpha_rank_weight)?;
        let forward = general_index(&linkage.u_forward, &g_or_zero(&g_row), opts.alpha_rank_weight)?;

        Ok(Self {
            sector_labels: table.sector_labels().to_vec(),
            basis: opts.basis,
            entropy_variant: opts.entropy_variant,
            entropy_unit: EntropyUnit::Nats,
            g_row,
            g_col,
            h_row,
            h_col,
            alpha_rank_weight: opts.alpha_rank_weight,
            backward,
            forward,
        })
    }

    pub fn len(&self) -> usize {
        self.sector_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sector_labels.is_empty()
    }

    /// `sector,G_row,G_col,H_row,H_col,RU,RG,GI` with six decimals, preceded
    /// by a `#` line recording the entropy variant, basis, unit and GI orientation.
    /// Excluded (all-zero) lines are left blank.
    pub fn write_csv<W: Write>(&self, mut writer: W, orientation: GiOrientation) -> std::io::Result<()> {
        let gi = match orientation {
            GiOrientation::Backward => &self.backward,
            GiOrientation::Forward => &self.forward,
        };
        writeln!(
            writer,
            "# entropy_variant={} basis={} entropy_unit=nats gi_orientation={} alpha_rank_weight={}",
            self.entropy_variant.as_str(),
            match self.basis {
                Basis::Coefficients => "coefficients",
                Basis::TotalRequirements => "total-requirements",
            },
            match orientation {
                GiOrientation::Backward => "backward",
                GiOrientation::Forward => "forward",
            },
            self.alpha_rank_weight
        )?;
        let mut w = csv::Writer::from_writer(writer);
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.6}"));
        w.write_record(["sector", "G_row", "G_col", "H_row", "H_col", "RU", "RG", "GI"])?;
        for k in 0..self.len() {
            w.write_record([
                self.sector_labels[k].clone(),
                opt(self.g_row[k]),
                opt(self.g_col[k]),
                opt(self.h_row[k]),
                opt(self.h_col[k]),
                format!("{:.6}", gi.ranks_u[k]),
                format!("{:.6}", gi.ranks_g[k]),
                format!("{:.6}", gi.gi[k]),
            ])?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_line(values: &[f64]) -> NormalizedShares {
        let m = Matrix::from_rows(&[values.to_vec()]).unwrap();
        normalize(&m, Orientation::Row, ZeroLinePolicy::Error).unwrap()
    }

    #[test]
    fn proportional_row_shares() {
        let s = one_line(&[0.2, 0.3]);
        let c = s.line(0).unwrap();
        assert!((c[0] - 0.4).abs() < 1e-15 && (c[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn final_demand_shares_divide_by_output() {
        let t = IoTable::new(
            vec!["a".into(), "b".into()],
            Matrix::from_rows(&[vec![20.0, 30.0], vec![40.0, 10.0]]).unwrap(),
            vec![50.0, 50.0],
            vec![100.0, 100.0],
        )
        .unwrap();
        let s = normalize_with_final_demand(&t, ZeroLinePolicy::Error).unwrap();
        assert!(s.includes_final_demand);
        assert_eq!(s.line_len(), 3);
        assert_eq!(s.line(0).unwrap(), [0.2, 0.3, 0.5]);
    }

    #[test]
    fn zero_line_flagged_or_rejected() {
        let m = Matrix::from_rows(&[vec![0.2, 0.3], vec![0.0, 0.0]]).unwrap();
        let s = normalize(&m, Orientation::Row, ZeroLinePolicy::Exclude).unwrap();
        assert_eq!(s.excluded(), [false, true]);
        assert!(s.line(1).is_none());
        assert_eq!(concentration_g(&s)[1], None);
        assert_eq!(entropy(&s)[1], None);
        assert_eq!(
            normalize(&m, Orientation::Row, ZeroLinePolicy::Error),
            Err(StructureError::ZeroLine { line: 2 })
        );
    }

    #[test]
    fn column_orientation_uses_column_sums() {
        let m = Matrix::from_rows(&[vec![0.2, 0.3], vec![0.6, 0.1]]).unwrap();
        let s = normalize(&m, Orientation::Column, ZeroLinePolicy::Error).unwrap();
        let c0 = s.line(0).unwrap();
        assert!((c0[0] - 0.25).abs() < 1e-15 && (c0[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn g_anchor_values() {
        assert_eq!(concentration_g(&one_line(&[0.0, 5.0, 0.0]))[0], Some(0.0));
        let g = concentration_g(&one_line(&[1.0; 4]))[0].unwrap();
        assert!((g - 3f64.sqrt()).abs() < 1e-12);
        let g = concentration_g(&one_line(&[0.5, 0.3, 0.2]))[0].unwrap();
        assert!((g - 1.86f64.sqrt()).abs() < 1e-12);
        assert!((g - 1.3638181697).abs() < 1e-9);
    }

    #[test]
    fn entropy_anchor_values() {
        assert_eq!(entropy(&one_line(&[0.0, 1.0, 0.0]))[0], Some(0.0));
        let h = entropy(&one_line(&[2.0; 5]))[0].unwrap();
        assert!((h - 5f64.ln()).abs() < 1e-12);
        let h = entropy(&one_line(&[0.4, 0.6]))[0].unwrap();
        assert!((h - 0.6730116670).abs() < 1e-9);
    }

    #[test]
    fn entropy_unit_conversion() {
        let h = 4f64.ln();
        assert!((EntropyUnit::Bits.convert(h, 4) - 2.0).abs() < 1e-12);
        assert!((EntropyUnit::Normalized.convert(h, 4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ranks_descending_with_average_ties() {
        assert_eq!(descending_ranks(&[3.0, 1.0, 2.0]), vec![1.0, 3.0, 2.0]);
        assert_eq!(descending_ranks(&[1.0, 5.0, 5.0, 0.0]), vec![3.0, 1.5, 1.5, 4.0]);
        assert_eq!(descending_ranks(&[7.0; 3]), vec![2.0; 3]);
    }

    #[test]
    fn gi_endpoints_and_ties() {
        let u = [1.2, 1.0, 0.8];
        let g = [0.5, 1.5, 1.0];
        let gi0 = general_index(&u, &g, 0.0).unwrap();
        assert_eq!(gi0.gi, gi0.ranks_u);
        let gi1 = general_index(&u, &g, 1.0).unwrap();
        assert_eq!(gi1.gi, gi1.ranks_g);
        assert!(matches!(
            general_index(&u, &g, 1.5),
            Err(StructureError::AlphaOutOfRange(_))
        ));
        assert!(general_index(&u, &g[..2], 0.5).is_err());
    }

    #[test]
    fn equal_linkage_larger_g_ranks_better() {
        let gi = general_index(&[1.1, 1.1], &[1.4, 0.9], 0.5).unwrap();
        assert_eq!(gi.ranks_u, vec![1.5, 1.5]);
        assert_eq!(gi.ranks_g, vec![1.0, 2.0]);
        assert!((gi.gi[1] - gi.gi[0] - 0.5).abs() < 1e-15);
        assert!(gi.gi[0] < gi.gi[1]);
    }

    #[test]
    fn matching_ranks_reduce_to_ru() {
        let gi = general_index(&[3.0, 2.0, 1.0], &[30.0, 20.0, 10.0], 0.37).unwrap();
        for (a, b) in gi.gi.iter().zip(&gi.ranks_u) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn variation_identity_on_fixed_line() {
        let raw = [0.2, 0.05, 0.0, 0.4];
        let s = one_line(&raw);
        let g = concentration_g(&s)[0].unwrap();
        let v = variation_n_divisor(&raw);
        assert!((g * g + v * v - 3.0).abs() < 1e-12);
    }
}
