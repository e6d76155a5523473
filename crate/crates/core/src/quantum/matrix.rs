use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-12;

/// Wire form of a complex square matrix: `{"dim": n, "re": [[…]], "im": [[…]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let n = m.nrows();
        let rows = |f: fn(&Complex64) -> f64| (0..n).map(|r| (0..n).map(|c| f(&m[(r, c)])).collect()).collect();
        MatrixJson { dim: n, re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        let n = j.dim;
        let shape_ok = |a: &Vec<Vec<f64>>| a.len() == n && a.iter().all(|r| r.len() == n);
        if !shape_ok(&j.re) || !shape_ok(&j.im) {
            return Err(Error::Parse(format!("matrix JSON: re/im must both be {n}×{n}")));
        }
        Ok(DMatrix::from_fn(n, n, |r, c| Complex64::new(j.re[r][c], j.im[r][c])))
    }
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn identity(n: usize) -> CMatrix {
    DMatrix::identity(n, n)
}

pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    // Tr(AB) without forming AB.
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}
