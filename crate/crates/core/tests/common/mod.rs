#![allow(dead_code)]

use std::path::PathBuf;

use dyncenter::io_core::{IoTable, TechCoefMatrix};
use dyncenter::matrix::Matrix;
use dyncenter::tech::TechnologyProfile;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("s{i}")).collect()
}

/// Nonnegative `A` with every column sum in `[0.05, 0.95)`, so `||A||_1 < 1`.
/// About a third of the entries are zero.
pub fn productive_matrix<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    for j in 0..n {
        let mut col: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.33) { 0.0 } else { rng.gen::<f64>() })
            .collect();
        if col.iter().all(|v| *v == 0.0) {
            col[rng.gen_range(0..n)] = 1.0;
        }
        let target = rng.gen_range(0.05..0.95);
        let sum: f64 = col.iter().sum();
        for i in 0..n {
            a[(i, j)] = col[i] / sum * target;
        }
    }
    a
}

pub fn coef(a: Matrix) -> TechCoefMatrix {
    TechCoefMatrix::new(labels(a.rows()), a).expect("productive by construction")
}

/// A balanced table whose coefficients are exactly `a` (up to rounding):
/// positive final demand, `X = (I - A)^-1 F`, `Z_ij = a_ij X_j`.
pub fn table_from<R: Rng>(rng: &mut R, a: &Matrix) -> IoTable {
    let n = a.rows();
    let f: Vec<f64> = (0..n).map(|_| rng.gen_range(10.0..1000.0)).collect();
    let b = Matrix::identity(n).sub(a).unwrap().inverse().unwrap();
    let x = b.mul_vec(&f);
    let mut z = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            z[(i, j)] = a[(i, j)] * x[j];
        }
    }
    // recompute F from the rounded Z so rows balance to machine precision
    let f: Vec<f64> = (0..n).map(|i| x[i] - z.row(i).iter().sum::<f64>()).collect();
    IoTable::new(labels(n), z, f, x).expect("balanced by construction")
}

pub fn random_profile<R: Rng>(rng: &mut R) -> TechnologyProfile {
    let mut betas = [0.0; 4];
    let total = rng.gen_range(0.05..0.99);
    let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    for k in 0..4 {
        betas[k] = raw[k] / s * total;
    }
    TechnologyProfile {
        technoware: rng.gen_range(1.0..9.0),
        inforware: rng.gen_range(1.0..9.0),
        humanware: rng.gen_range(1.0..9.0),
        orgaware: rng.gen_range(1.0..9.0),
        betas,
        alpha_climate: rng.gen_range(0.0..=1.0),
        eva: rng.gen_range(1.0..1e6),
        tech_class: None,
        best_practice_reference: None,
    }
}

pub fn derived_profile() -> TechnologyProfile {
    serde_json::from_str(&std::fs::read_to_string(fixture("derived_profile.json")).unwrap()).unwrap()
}
