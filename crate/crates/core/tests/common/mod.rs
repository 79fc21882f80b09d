#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use woundcond::SparseMatrix;

pub fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    let d = a.to_dense();
    let n = d.len();
    DMatrix::from_fn(n, n, |i, j| d[i][j])
}

/// Extreme eigenvalues by full dense decomposition.
pub fn dense_extremes(a: &SparseMatrix) -> (f64, f64) {
    let e = SymmetricEigen::new(dense(a)).eigenvalues;
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

pub fn dense_condition(a: &SparseMatrix) -> f64 {
    let (lo, hi) = dense_extremes(a);
    hi / lo
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
