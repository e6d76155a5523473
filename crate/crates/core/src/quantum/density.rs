use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::matrix::{hermitian_defect, hermitian_eigenvalues, CMatrix, MatrixJson, HERMITIAN_TOL};
use crate::error::{Error, Result};

pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let h = hermitian_defect(&m);
        if h > HERMITIAN_TOL {
            return Err(Error::Invariant(format!("density matrix not Hermitian (defect {h:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Invariant(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = hermitian_eigenvalues(&m).first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::Invariant(format!("density matrix has negative eigenvalue {min:e}")));
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(DMatrix::identity(n, n) / Complex64::new(n as f64, 0.0))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalised) nonzero vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if !(norm > 0.0) {
            return Err(Error::Domain("pure state from a zero vector".into()));
        }
        let v = v / Complex64::new(norm, 0.0);
        Ok(Self(&v * v.adjoint()))
    }

    /// Random state `G G† / Tr(G G†)` with `G` an `n×k` complex Ginibre matrix.
    pub fn random(n: usize, k: usize, rng: &mut impl Rng) -> Self {
        let g = DMatrix::from_fn(n, k.max(1), |_, _| {
            Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        let mut m = m / tr;
        // Exact Hermiticity.
        m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        let m = u * &self.0 * u.adjoint();
        Ok(Self((&m + m.adjoint()) * Complex64::new(0.5, 0.0)))
    }

    /// `ρ_1 ⊗ ρ_2`.
    pub fn kron(&self, other: &DensityMatrix) -> Self {
        Self(self.0.kronecker(&other.0))
    }
}

impl TryFrom<MatrixJson> for DensityMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        Self::new(CMatrix::try_from(j)?)
    }
}

impl From<DensityMatrix> for MatrixJson {
    fn from(d: DensityMatrix) -> Self {
        MatrixJson::from(&d.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn invariants_enforced() {
        let mut m = DMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_ok());
        m[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m.clone()).is_err());
        let bad_trace = DMatrix::identity(2, 2) * Complex64::new(0.6, 0.0);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = DMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(1.5, 0.0), Complex64::new(-0.5, 0.0)]));
        assert!(DensityMatrix::new(negative).is_err());
    }

    #[test]
    fn random_states_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..6 {
            for k in 1..=n {
                let r = DensityMatrix::random(n, k, &mut rng);
                assert!(DensityMatrix::new(r.into_matrix()).is_ok());
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let r = DensityMatrix::random(3, 3, &mut rng);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"dim\":3"));
        let back: DensityMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
