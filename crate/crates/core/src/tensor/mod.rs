//! Symmetric traceless Cartesian tensors: the carriers of rank-l
//! orientational order parameters.
//!
//! Tensors are stored densely (`d^l` entries) in canonical symmetric form.
//! Tensor polynomials `T^(d,l)(u)` are the symmetric traceless projection of
//! `u ⊗ … ⊗ u`, and the normalization `A_l^(d)` is the one for which
//! `f(u) = Σ_l F_l · u^{⊗l}` with `F_l = A_l ∫ f T^(d,l) dΩ` reconstructs any
//! band-limited `f`.

mod conversion;
mod dense;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use conversion::{angular_to_cartesian, cartesian_to_angular, harmonic_basis};
pub use dense::Tensor;

use crate::error::{Error, Result};

/// Spatial dimension of an orientation vector.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpatialDim {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
}

impl SpatialDim {
    pub fn get(self) -> usize {
        match self {
            SpatialDim::Two => 2,
            SpatialDim::Three => 3,
        }
    }
}

impl TryFrom<usize> for SpatialDim {
    type Error = Error;
    fn try_from(d: usize) -> Result<Self> {
        match d {
            2 => Ok(SpatialDim::Two),
            3 => Ok(SpatialDim::Three),
            _ => Err(Error::Domain(format!("spatial dimension must be 2 or 3, got {d}"))),
        }
    }
}

/// Default tolerance for the symmetry and trace invariants.
pub const INVARIANT_TOL: f64 = 1e-12;

/// A tensor known to be symmetric and traceless in all index pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Tensor", into = "Tensor")]
pub struct SymmetricTracelessTensor(Tensor);

impl SymmetricTracelessTensor {
    /// Validates both invariants at `tol`.
    pub fn new(t: Tensor, tol: f64) -> Result<Self> {
        let scale = t.max_abs().max(1.0);
        let sym = t.symmetry_defect();
        if sym > tol * scale {
            return Err(Error::Invariant(format!("tensor not symmetric (defect {sym:.3e})")));
        }
        let tr = t.trace_defect();
        if tr > tol * scale {
            return Err(Error::Invariant(format!("tensor not traceless (trace {tr:.3e})")));
        }
        Ok(SymmetricTracelessTensor(t))
    }

    pub(crate) fn new_unchecked(t: Tensor) -> Self {
        SymmetricTracelessTensor(t)
    }

    pub fn zeros(dim: usize, rank: usize) -> Self {
        SymmetricTracelessTensor(Tensor::zeros(dim, rank))
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn into_tensor(self) -> Tensor {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn rank(&self) -> usize {
        self.0.rank()
    }

    pub fn data(&self) -> &[f64] {
        self.0.data()
    }

    /// `F · u^{⊗l}`.
    pub fn evaluate(&self, u: &[f64]) -> f64 {
        self.0.contract_power(u)
    }

    /// Rotation of every index; stays in the symmetric traceless class.
    pub fn rotate(&self, r: &[f64]) -> SymmetricTracelessTensor {
        SymmetricTracelessTensor(self.0.rotate(r))
    }

    pub fn scale(self, s: f64) -> Self {
        SymmetricTracelessTensor(self.0.scale(s))
    }
}

impl TryFrom<Tensor> for SymmetricTracelessTensor {
    type Error = Error;
    fn try_from(t: Tensor) -> Result<Self> {
        SymmetricTracelessTensor::new(t, 1e-9)
    }
}

impl From<SymmetricTracelessTensor> for Tensor {
    fn from(t: SymmetricTracelessTensor) -> Tensor {
        t.0
    }
}

/// `1/∏_{j=1..k}(a - j)`, i.e. `Γ(a-k)/Γ(a)`.
fn gamma_ratio(a: f64, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc / (a - j as f64))
}

/// Orthogonal projection of a symmetric tensor onto its traceless part.
///
/// Uses the harmonic-projection series
/// `S' = Σ_k c_k n!/(n-2k)! sym(δ^{⊗k} ⊗ tr^k S)` with
/// `c_k = (-1)^k Γ(n+d/2-1-k) / (4^k k! Γ(n+d/2-1))`.
fn detrace_symmetric(s: &Tensor) -> Tensor {
    let n = s.rank();
    let d = s.dim();
    if n < 2 {
        return s.clone();
    }
    let a = n as f64 + d as f64 / 2.0 - 1.0;
    let delta = Tensor::delta(d);
    let mut out = s.clone();
    let mut traced = s.clone();
    let mut delta_pow = Tensor::scalar(d, 1.0);
    let mut k_fact = 1.0;
    let mut falling = 1.0; // n!/(n-2k)!
    for k in 1..=n / 2 {
        traced = traced.trace(0, 1);
        delta_pow = delta_pow.outer(&delta);
        k_fact *= k as f64;
        falling *= ((n - 2 * k + 2) * (n - 2 * k + 1)) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * gamma_ratio(a, k) / (4f64.powi(k as i32) * k_fact);
        let term = delta_pow.outer(&traced).symmetrize();
        out.add_scaled(&term, c * falling);
    }
    out
}

/// Idempotent orthogonal projection of an arbitrary rank-l tensor onto the
/// symmetric traceless subspace.
pub fn symmetric_traceless_project(t: &Tensor) -> SymmetricTracelessTensor {
    SymmetricTracelessTensor(detrace_symmetric(&t.symmetrize()))
}

/// Rank-l tensor polynomial `T^(d,l)(u)`: the symmetric traceless part of
/// `u^{⊗l}`. For `d = 2, l = 2` this is `u_i u_j - δ_ij / 2`.
pub fn tensor_polynomial(dim: SpatialDim, rank: usize, u: &[f64]) -> Result<SymmetricTracelessTensor> {
    let d = dim.get();
    if u.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: u.len() });
    }
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("orientation vector not unit length (|u| = {norm})")));
    }
    Ok(tensor_polynomial_unchecked(d, rank, u))
}

pub(crate) fn tensor_polynomial_unchecked(d: usize, rank: usize, u: &[f64]) -> SymmetricTracelessTensor {
    if rank == 0 {
        return SymmetricTracelessTensor(Tensor::scalar(d, 1.0));
    }
    // u^{⊗l} is already symmetric and its k-fold trace is u^{⊗(l-2k)}.
    let n = rank;
    let a = n as f64 + d as f64 / 2.0 - 1.0;
    let mut out = Tensor::outer_power(u, n);
    let delta = Tensor::delta(d);
    let mut delta_pow = Tensor::scalar(d, 1.0);
    let mut k_fact = 1.0;
    let mut falling = 1.0;
    for k in 1..=n / 2 {
        delta_pow = delta_pow.outer(&delta);
        k_fact *= k as f64;
        falling *= ((n - 2 * k + 2) * (n - 2 * k + 1)) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let c = sign * gamma_ratio(a, k) / (4f64.powi(k as i32) * k_fact);
        let term = delta_pow.outer(&Tensor::outer_power(u, n - 2 * k)).symmetrize();
        out.add_scaled(&term, c * falling);
    }
    SymmetricTracelessTensor(out)
}

/// Normalization `A_l^(d)`.
///
/// `d = 2`: `1/(2π)` for `l = 0`, `2^{l-1}/π` otherwise.
/// `d = 3`: `(2l+1)!! / (4π l!)`.
pub fn normalization(dim: SpatialDim, rank: usize) -> f64 {
    match dim {
        SpatialDim::Two => {
            if rank == 0 {
                1.0 / (2.0 * PI)
            } else {
                2f64.powi(rank as i32 - 1) / PI
            }
        }
        SpatialDim::Three => {
            let mut v = 1.0 / (4.0 * PI);
            for k in 1..=rank {
                v *= (2 * k + 1) as f64 / k as f64;
            }
            v
        }
    }
}
