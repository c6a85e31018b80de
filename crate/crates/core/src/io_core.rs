//! Input-output tables: ingestion, validation, technical coefficients and the
//! Leontief inverse.
//!
//! A table holds the interindustry flows `Z` (row `i` sells to column `j`),
//! final demand `F` and gross output `X`, with the accounting identity
//! `X_i = sum_j Z_ij + F_i`. Technical coefficients are `a_ij = Z_ij / X_j`
//! and the Leontief inverse is `B = (I - A)^-1`, so that `X = B F`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::matrix::{spectral_bracket_nonneg, Matrix, MatrixError};

/// Relative tolerance on `X_i = sum_j Z_ij + F_i`. Published tables are rounded.
pub const ROW_BALANCE_REL_TOL: f64 = 1e-6;
/// A productive coefficient matrix must have spectral radius below `1 - PRODUCTIVITY_MARGIN`.
pub const PRODUCTIVITY_MARGIN: f64 = 1e-9;
/// Maximum entry of `(I - A)·B - I` accepted for a computed inverse.
pub const INVERSE_RESIDUAL_TOL: f64 = 1e-9;

const SPECTRAL_MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IoError {
    #[error("cannot read table: {0}")]
    Io(String),
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("bad header: {0}")]
    Header(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("sector {row} ({label}), column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        label: String,
        column: String,
        value: String,
    },
    #[error("sector {row} ({label}), column {column}: value {value} is not finite")]
    NonFinite {
        row: usize,
        label: String,
        column: String,
        value: f64,
    },
    #[error("sector {row} ({label}), column {column}: negative entry {value}")]
    NegativeEntry {
        row: usize,
        label: String,
        column: String,
        value: f64,
    },
    #[error("sector {row}: row label {found:?} does not match header label {expected:?}")]
    LabelMismatch {
        row: usize,
        expected: String,
        found: String,
    },
    #[error("duplicate sector label {label:?} (sectors {first} and {second})")]
    DuplicateLabel {
        label: String,
        first: usize,
        second: usize,
    },
    #[error(
        "sector {row} ({label}): row balance violated, gross output {gross_output} but \
         intermediate sales + final demand = {row_total} (relative error {relative_error:.3e})"
    )]
    RowBalance {
        row: usize,
        label: String,
        gross_output: f64,
        row_total: f64,
        relative_error: f64,
    },
    #[error("sector {row} ({label}): gross output must be strictly positive, found {value}")]
    NonPositiveOutput { row: usize, label: String, value: f64 },
    #[error("coefficient matrix is not productive (spectral radius >= {spectral_radius:.12})")]
    NonProductive { spectral_radius: f64 },
    #[error("I - A is singular: {0}")]
    Singular(MatrixError),
    #[error("inverse residual {residual:.3e} exceeds {INVERSE_RESIDUAL_TOL:e}")]
    IllConditioned { residual: f64 },
}

/// Supported on-disk table encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    /// `sector,<label_1>,...,<label_n>,final_demand,gross_output` then one row per sector.
    #[default]
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IoTableData")]
pub struct IoTable {
    sector_labels: Vec<String>,
    flows: Matrix,
    final_demand: Vec<f64>,
    gross_output: Vec<f64>,
}

#[derive(Deserialize)]
struct IoTableData {
    sector_labels: Vec<String>,
    flows: Vec<Vec<f64>>,
    final_demand: Vec<f64>,
    gross_output: Vec<f64>,
}

impl TryFrom<IoTableData> for IoTable {
    type Error = IoError;

    fn try_from(d: IoTableData) -> Result<Self, IoError> {
        let n = d.sector_labels.len();
        if d.flows.len() != n {
            return Err(IoError::Dimension(format!(
                "{n} labels but {} flow rows",
                d.flows.len()
            )));
        }
        for (i, row) in d.flows.iter().enumerate() {
            if row.len() != n {
                return Err(IoError::Dimension(format!(
                    "flow row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
        }
        let flows = Matrix::from_rows(&d.flows).map_err(|e| IoError::Dimension(e.to_string()))?;
        IoTable::new(d.sector_labels, flows, d.final_demand, d.gross_output)
    }
}

impl IoTable {
    pub fn new(
        sector_labels: Vec<String>,
        flows: Matrix,
        final_demand: Vec<f64>,
        gross_output: Vec<f64>,
    ) -> Result<Self, IoError> {
        let n = sector_labels.len();
        if n < 2 {
            return Err(IoError::Dimension(format!(
                "an input-output table needs at least 2 sectors, found {n}"
            )));
        }
        if flows.rows() != n || flows.cols() != n {
            return Err(IoError::Dimension(format!(
                "flow matrix is {}x{}, expected {n}x{n}",
                flows.rows(),
                flows.cols()
            )));
        }
        if final_demand.len() != n || gross_output.len() != n {
            return Err(IoError::Dimension(format!(
                "final demand has {} entries and gross output {}, expected {n}",
                final_demand.len(),
                gross_output.len()
            )));
        }

        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(n);
        for (i, label) in sector_labels.iter().enumerate() {
            if let Some(first) = seen.insert(label.as_str(), i + 1) {
                return Err(IoError::DuplicateLabel {
                    label: label.clone(),
                    first,
                    second: i + 1,
                });
            }
        }

        let check = |row: usize, column: &str, value: f64| -> Result<(), IoError> {
            let label = sector_labels[row].clone();
            if !value.is_finite() {
                return Err(IoError::NonFinite {
                    row: row + 1,
                    label,
                    column: column.to_string(),
                    value,
                });
            }
            if value < 0.0 {
                return Err(IoError::NegativeEntry {
                    row: row + 1,
                    label,
                    column: column.to_string(),
                    value,
                });
            }
            Ok(())
        };
        for i in 0..n {
            for j in 0..n {
                check(i, &sector_labels[j], flows[(i, j)])?;
            }
            check(i, "final_demand", final_demand[i])?;
            check(i, "gross_output", gross_output[i])?;
        }

        for i in 0..n {
            let x = gross_output[i];
            if x <= 0.0 {
                return Err(IoError::NonPositiveOutput {
                    row: i + 1,
                    label: sector_labels[i].clone(),
                    value: x,
                });
            }
            let total: f64 = flows.row(i).iter().sum::<f64>() + final_demand[i];
            let rel = (x - total).abs() / x;
            if rel > ROW_BALANCE_REL_TOL {
                return Err(IoError::RowBalance {
                    row: i + 1,
                    label: sector_labels[i].clone(),
                    gross_output: x,
                    row_total: total,
                    relative_error: rel,
                });
            }
        }

        Ok(Self {
            sector_labels,
            flows,
            final_demand,
            gross_output,
        })
    }

    pub fn len(&self) -> usize {
        self.sector_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sector_labels.is_empty()
    }

    pub fn sector_labels(&self) -> &[String] {
        &self.sector_labels
    }

    pub fn flows(&self) -> &Matrix {
        &self.flows
    }

    pub fn final_demand(&self) -> &[f64] {
        &self.final_demand
    }

    pub fn gross_output(&self) -> &[f64] {
        &self.gross_output
    }

    /// Parses the CSV table layout. Row labels must repeat the header labels in order.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, IoError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);

        let header = rdr.headers().map_err(csv_error)?.clone();
        let cells: Vec<&str> = header.iter().collect();
        if cells.len() < 3 {
            return Err(IoError::Header(format!(
                "expected `sector,<labels...>,final_demand,gross_output`, found {} columns",
                cells.len()
            )));
        }
        if !cells[0].eq_ignore_ascii_case("sector") {
            return Err(IoError::Header(format!(
                "first column must be `sector`, found {:?}",
                cells[0]
            )));
        }
        let k = cells.len();
        if cells[k - 2] != "final_demand" || cells[k - 1] != "gross_output" {
            return Err(IoError::Header(format!(
                "last two columns must be `final_demand,gross_output`, found {:?},{:?}",
                cells[k - 2],
                cells[k - 1]
            )));
        }
        let labels: Vec<String> = cells[1..k - 2].iter().map(|s| s.to_string()).collect();
        let n = labels.len();

        let mut flows = Vec::with_capacity(n);
        let mut final_demand = Vec::with_capacity(n);
        let mut gross_output = Vec::with_capacity(n);
        for (r, record) in rdr.records().enumerate() {
            let record = record.map_err(csv_error)?;
            let row = r + 1;
            if row > n {
                return Err(IoError::Dimension(format!(
                    "header declares {n} sectors but the file has more data rows"
                )));
            }
            if record.len() != k {
                return Err(IoError::Csv {
                    line: record.position().map_or(0, |p| p.line()),
                    message: format!("expected {k} fields, found {}", record.len()),
                });
            }
            let label = record.get(0).unwrap_or_default().to_string();
            if label != labels[r] {
                return Err(IoError::LabelMismatch {
                    row,
                    expected: labels[r].clone(),
                    found: label,
                });
            }
            let parse = |idx: usize, column: &str| -> Result<f64, IoError> {
                let raw = record.get(idx).unwrap_or_default();
                raw.parse::<f64>().map_err(|_| IoError::Parse {
                    row,
                    label: label.clone(),
                    column: column.to_string(),
                    value: raw.to_string(),
                })
            };
            let mut z = Vec::with_capacity(n);
            for j in 0..n {
                z.push(parse(j + 1, &labels[j])?);
            }
            flows.push(z);
            final_demand.push(parse(n + 1, "final_demand")?);
            gross_output.push(parse(n + 2, "gross_output")?);
        }
        if flows.len() != n {
            return Err(IoError::Dimension(format!(
                "header declares {n} sectors but the file has {} data rows",
                flows.len()
            )));
        }
        if n < 2 {
            return Err(IoError::Dimension(format!(
                "an input-output table needs at least 2 sectors, found {n}"
            )));
        }
        let flows = Matrix::from_rows(&flows).map_err(|e| IoError::Dimension(e.to_string()))?;
        Self::new(labels, flows, final_demand, gross_output)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), IoError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["sector".to_string()];
        header.extend(self.sector_labels.iter().cloned());
        header.push("final_demand".into());
        header.push("gross_output".into());
        w.write_record(&header).map_err(csv_error)?;
        for i in 0..self.len() {
            let mut rec = vec![self.sector_labels[i].clone()];
            rec.extend(self.flows.row(i).iter().map(|v| v.to_string()));
            rec.push(self.final_demand[i].to_string());
            rec.push(self.gross_output[i].to_string());
            w.write_record(&rec).map_err(csv_error)?;
        }
        w.flush().map_err(|e| IoError::Io(e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    IoError::Csv {
        line,
        message: e.to_string(),
    }
}

/// Reads and validates a table file.
pub fn load_io_table(path: impl AsRef<Path>, format: TableFormat) -> Result<IoTable, IoError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
    match format {
        TableFormat::Csv => IoTable::from_csv_reader(file),
    }
}

/// Direct input requirements per unit of gross output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TechCoefData")]
pub struct TechCoefMatrix {
    sector_labels: Vec<String>,
    a: Matrix,
    /// Upper bound on the spectral radius established by the productivity check.
    spectral_radius_bound: f64,
}

#[derive(Deserialize)]
struct TechCoefData {
    sector_labels: Vec<String>,
    a: Matrix,
}

impl TryFrom<TechCoefData> for TechCoefMatrix {
    type Error = IoError;

    fn try_from(d: TechCoefData) -> Result<Self, IoError> {
        TechCoefMatrix::new(d.sector_labels, d.a)
    }
}

impl TechCoefMatrix {
    /// Wraps an existing coefficient matrix after checking non-negativity and productivity.
    pub fn new(sector_labels: Vec<String>, a: Matrix) -> Result<Self, IoError> {
        let n = sector_labels.len();
        if !a.is_square() || a.rows() != n {
            return Err(IoError::Dimension(format!(
                "coefficient matrix is {}x{} for {n} labels",
                a.rows(),
                a.cols()
            )));
        }
        if n < 2 {
            return Err(IoError::Dimension(format!("need at least 2 sectors, found {n}")));
        }
        for i in 0..n {
            for j in 0..n {
                let v = a[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(IoError::NegativeEntry {
                        row: i + 1,
                        label: sector_labels[i].clone(),
                        column: sector_labels[j].clone(),
                        value: v,
                    });
                }
            }
        }
        let spectral_radius_bound = check_productive(&a)?;
        Ok(Self {
            sector_labels,
            a,
            spectral_radius_bound,
        })
    }

    pub fn sector_labels(&self) -> &[String] {
        &self.sector_labels
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.sector_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sector_labels.is_empty()
    }

    pub fn spectral_radius_bound(&self) -> f64 {
        self.spectral_radius_bound
    }

    /// `a_i.`
    pub fn row_sums(&self) -> Vec<f64> {
        self.a.row_sums()
    }

    /// `a_.j`
    pub fn col_sums(&self) -> Vec<f64> {
        self.a.col_sums()
    }
}

/// Returns an upper bound on the spectral radius, or `NonProductive`.
fn check_productive(a: &Matrix) -> Result<f64, IoError> {
    let threshold = 1.0 - PRODUCTIVITY_MARGIN;
    let bracket = spectral_bracket_nonneg(a, Some(threshold), 1e-13, SPECTRAL_MAX_ITER);
    if bracket.upper < threshold {
        return Ok(bracket.upper);
    }
    if bracket.lower >= threshold {
        return Err(IoError::NonProductive {
            spectral_radius: bracket.lower,
        });
    }
    // Undecided (reducible A keeps the bounds apart). For nonnegative A,
    // rho(A) < 1 iff (I - A)^-1 exists and is entrywise nonnegative.
    let non_productive = IoError::NonProductive {
        spectral_radius: bracket.upper,
    };
    let inv = Matrix::identity(a.rows())
        .sub(a)
        .and_then(|m| m.inverse())
        .map_err(|_| non_productive.clone())?;
    let floor = -1e-12 * inv.max_abs().max(1.0);
    if inv.as_slice().iter().any(|&v| v < floor) {
        return Err(non_productive);
    }
    Ok(bracket.estimate().min(bracket.upper))
}

/// `a_ij = Z_ij / X_j`, followed by the productivity check.
pub fn technical_coefficients(t: &IoTable) -> Result<TechCoefMatrix, IoError> {
    let n = t.len();
    let mut a = Matrix::zeros(n, n);
    for j in 0..n {
        let x = t.gross_output[j];
        if x <= 0.0 {
            return Err(IoError::NonPositiveOutput {
                row: j + 1,
                label: t.sector_labels[j].clone(),
                value: x,
            });
        }
        for i in 0..n {
            a[(i, j)] = t.flows[(i, j)] / x;
        }
    }
    TechCoefMatrix::new(t.sector_labels.clone(), a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeontiefInverse {
    sector_labels: Vec<String>,
    b: Matrix,
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
    overall_mean: f64,
}

impl LeontiefInverse {
    /// Builds the derived sums from a given total-requirements matrix without
    /// re-deriving it from `A`. Used by tests and by callers holding a
    /// published `B` table.
    pub fn from_matrix(sector_labels: Vec<String>, b: Matrix) -> Result<Self, IoError> {
        let n = sector_labels.len();
        if !b.is_square() || b.rows() != n || n < 2 {
            return Err(IoError::Dimension(format!(
                "total-requirements matrix is {}x{} for {n} labels",
                b.rows(),
                b.cols()
            )));
        }
        let row_sums = b.row_sums();
        let col_sums = b.col_sums();
        let overall_mean = b.sum() / (n * n) as f64;
        Ok(Self {
            sector_labels,
            b,
            row_sums,
            col_sums,
            overall_mean,
        })
    }

    pub fn sector_labels(&self) -> &[String] {
        &self.sector_labels
    }

    pub fn matrix(&self) -> &Matrix {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.sector_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sector_labels.is_empty()
    }

    /// `b_i.`
    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    /// `b_.j`
    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    /// `(1/n^2) sum_ij b_ij`
    pub fn overall_mean(&self) -> f64 {
        self.overall_mean
    }

    /// Gross output needed to sustain `final_demand`: `X = B F`.
    pub fn output_for_demand(&self, final_demand: &[f64]) -> Result<Vec<f64>, IoError> {
        if final_demand.len() != self.len() {
            return Err(IoError::Dimension(format!(
                "final demand has {} entries, expected {}",
                final_demand.len(),
                self.len()
            )));
        }
        Ok(self.b.mul_vec(final_demand))
    }
}

/// `B = (I - A)^-1` via LU with partial pivoting, with one refinement step if
/// the residual check misses.
pub fn leontief_inverse(a: &TechCoefMatrix) -> Result<LeontiefInverse, IoError> {
    let n = a.len();
    let i_minus_a = Matrix::identity(n).sub(&a.a).map_err(IoError::Singular)?;
    let mut b = i_minus_a.inverse().map_err(IoError::Singular)?;

    let mut residual = inverse_residual(&i_minus_a, &b);
    if residual > INVERSE_RESIDUAL_TOL {
        // B <- B + B (I - M B)
        let r = Matrix::identity(n)
            .sub(&i_minus_a.matmul(&b).map_err(IoError::Singular)?)
            .map_err(IoError::Singular)?;
        let correction = b.matmul(&r).map_err(IoError::Singular)?;
        let refined = Matrix::from_row_major(
            n,
            n,
            b.as_slice()
                .iter()
                .zip(correction.as_slice())
                .map(|(x, c)| x + c)
                .collect(),
        )
        .map_err(IoError::Singular)?;
        b = refined;
        residual = inverse_residual(&i_minus_a, &b);
        if residual > INVERSE_RESIDUAL_TOL {
            return Err(IoError::IllConditioned { residual });
        }
    }
    LeontiefInverse::from_matrix(a.sector_labels.clone(), b)
}

/// `max |M·B - I|`
pub fn inverse_residual(m: &Matrix, b: &Matrix) -> f64 {
    let n = m.rows();
    match m.matmul(b) {
        Ok(p) => p.sub(&Matrix::identity(n)).map_or(f64::INFINITY, |d| d.max_abs()),
        Err(_) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORACLE: &str = "sector,agri,manu,final_demand,gross_output\n\
                          agri,20,30,50,100\n\
                          manu,40,10,50,100\n";

    fn oracle_table() -> IoTable {
        IoTable::from_csv_reader(ORACLE.as_bytes()).unwrap()
    }

    #[test]
    fn loads_balanced_2x2() {
        let t = oracle_table();
        assert_eq!(t.len(), 2);
        assert_eq!(t.sector_labels(), ["agri", "manu"]);
        assert_eq!(t.flows().row(1), [40.0, 10.0]);
        assert_eq!(t.gross_output(), [100.0, 100.0]);
    }

    #[test]
    fn row_balance_violation_names_sector_1() {
        let csv = "sector,agri,manu,final_demand,gross_output\n\
                   agri,20,30,40,100\n\
                   manu,40,10,50,100\n";
        let err = IoTable::from_csv_reader(csv.as_bytes()).unwrap_err();
        match &err {
            IoError::RowBalance { row, label, .. } => {
                assert_eq!(*row, 1);
                assert_eq!(label, "agri");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("sector 1"));
    }

    #[test]
    fn single_sector_is_dimension_error() {
        let csv = "sector,agri,final_demand,gross_output\nagri,20,80,100\n";
        assert!(matches!(
            IoTable::from_csv_reader(csv.as_bytes()),
            Err(IoError::Dimension(_))
        ));
    }

    #[test]
    fn negative_entry_reports_coordinates() {
        let csv = "sector,a,b,final_demand,gross_output\na,20,-5,85,100\nb,0,0,100,100\n";
        match IoTable::from_csv_reader(csv.as_bytes()).unwrap_err() {
            IoError::NegativeEntry { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "b");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_number_reports_coordinates() {
        let csv = "sector,a,b,final_demand,gross_output\na,20,x,80,100\nb,0,0,100,100\n";
        match IoTable::from_csv_reader(csv.as_bytes()).unwrap_err() {
            IoError::Parse { row, column, value, .. } => {
                assert_eq!((row, column.as_str(), value.as_str()), (1, "b", "x"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_row_is_csv_error() {
        let csv = "sector,a,b,final_demand,gross_output\na,20,30,50\nb,0,0,100,100\n";
        assert!(matches!(
            IoTable::from_csv_reader(csv.as_bytes()),
            Err(IoError::Csv { .. })
        ));
    }

    #[test]
    fn duplicate_and_mismatched_labels_rejected() {
        let dup = "sector,a,a,final_demand,gross_output\na,0,0,1,1\na,0,0,1,1\n";
        assert!(matches!(
            IoTable::from_csv_reader(dup.as_bytes()),
            Err(IoError::DuplicateLabel { .. })
        ));
        let mism = "sector,a,b,final_demand,gross_output\na,0,0,1,1\nc,0,0,1,1\n";
        assert!(matches!(
            IoTable::from_csv_reader(mism.as_bytes()),
            Err(IoError::LabelMismatch { row: 2, .. })
        ));
    }

    #[test]
    fn missing_rows_is_dimension_error() {
        let csv = "sector,a,b,c,final_demand,gross_output\na,0,0,0,1,1\nb,0,0,0,1,1\n";
        assert!(matches!(
            IoTable::from_csv_reader(csv.as_bytes()),
            Err(IoError::Dimension(_))
        ));
    }

    #[test]
    fn zero_gross_output_rejected() {
        let csv = "sector,a,b,final_demand,gross_output\na,0,0,0,0\nb,0,0,1,1\n";
        assert!(matches!(
            IoTable::from_csv_reader(csv.as_bytes()),
            Err(IoError::NonPositiveOutput { row: 1, .. })
        ));
    }

    #[test]
    fn rounding_within_tolerance_is_accepted() {
        let csv = "sector,a,b,final_demand,gross_output\na,20,30,50.00004,100\nb,40,10,50,100\n";
        assert!(IoTable::from_csv_reader(csv.as_bytes()).is_ok());
    }

    #[test]
    fn coefficients_of_oracle() {
        let a = technical_coefficients(&oracle_table()).unwrap();
        let expected = [[0.2, 0.3], [0.4, 0.1]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.matrix()[(i, j)] - expected[i][j]).abs() < 1e-15);
            }
        }
        assert!(a.spectral_radius_bound() < 1.0);
    }

    #[test]
    fn zero_flows_give_zero_coefficients_and_identity_inverse() {
        let csv = "sector,a,b,final_demand,gross_output\na,0,0,7,7\nb,0,0,3,3\n";
        let t = IoTable::from_csv_reader(csv.as_bytes()).unwrap();
        let a = technical_coefficients(&t).unwrap();
        assert_eq!(a.matrix().max_abs(), 0.0);
        let b = leontief_inverse(&a).unwrap();
        assert_eq!(b.matrix(), &Matrix::identity(2));
    }

    #[test]
    fn column_sums_of_one_are_not_productive() {
        // every unit of output is used up as intermediate input
        let csv = "sector,a,b,final_demand,gross_output\na,50,50,0,100\nb,50,50,0,100\n";
        let t = IoTable::from_csv_reader(csv.as_bytes()).unwrap();
        assert!(matches!(
            technical_coefficients(&t),
            Err(IoError::NonProductive { .. })
        ));
    }

    #[test]
    fn oracle_inverse_matches_hand_inversion() {
        let b = leontief_inverse(&technical_coefficients(&oracle_table()).unwrap()).unwrap();
        // det(I - A) = 0.8*0.9 - 0.3*0.4 = 0.6
        let expected = [[0.9 / 0.6, 0.3 / 0.6], [0.4 / 0.6, 0.8 / 0.6]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((b.matrix()[(i, j)] - expected[i][j]).abs() < 1e-12);
            }
        }
        for (got, want) in b.row_sums().iter().zip([2.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in b.col_sums().iter().zip([2.166667, 1.833333]) {
            assert!((got - want).abs() < 1e-6);
        }
        assert!((b.overall_mean() - 1.0).abs() < 1e-12);
        // the table's own final demand reproduces its gross output
        let x = b.output_for_demand(&[50.0, 50.0]).unwrap();
        assert!((x[0] - 100.0).abs() < 1e-9 && (x[1] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn expansive_matrix_rejected_even_though_invertible() {
        let a = Matrix::from_rows(&[vec![1.5, 0.0], vec![0.0, 0.2]]).unwrap();
        assert!(matches!(
            TechCoefMatrix::new(vec!["a".into(), "b".into()], a),
            Err(IoError::NonProductive { .. })
        ));
    }

    #[test]
    fn json_round_trip_revalidates() {
        let t = oracle_table();
        let s = serde_json::to_string(&t).unwrap();
        let back: IoTable = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        let bad = s.replace("50.0,50.0", "40.0,50.0");
        assert!(serde_json::from_str::<IoTable>(&bad).is_err());
    }

    #[test]
    fn csv_write_then_read() {
        let t = oracle_table();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(IoTable::from_csv_reader(buf.as_slice()).unwrap(), t);
    }
}
