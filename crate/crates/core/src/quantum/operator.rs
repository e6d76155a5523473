use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::kernel::KernelField;
use super::matrix::{hermitian_defect, identity, max_abs, trace_product, CMatrix, MatrixJson, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::expansion::Domain;
use crate::tensor::{normalization, tensor_polynomial_unchecked, SpatialDim, SymmetricTracelessTensor, Tensor};

/// Tolerance for index symmetry and the matrix-valued index trace.
pub const INDEX_TOL: f64 = 1e-10;

/// Largest Hilbert-space dimension the many-particle lift will build.
pub const LIFT_LIMIT: usize = 4096;

/// Rank-l tensor of Hermitian `n×n` matrices, stored row-major over the
/// tensor indices (first index most significant).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorTensorJson", into = "OperatorTensorJson")]
pub struct OperatorTensor {
    dim: usize,
    rank: usize,
    entries: Vec<CMatrix>,
    note: Option<String>,
}

impl OperatorTensor {
    /// Validates Hermiticity (relative `1e-12`), index symmetry and index
    /// tracelessness (`1e-10`).
    pub fn new(dim: usize, rank: usize, entries: Vec<CMatrix>) -> Result<Self> {
        let op = Self::new_unchecked(dim, rank, entries)?;
        op.validate()?;
        Ok(op)
    }

    fn new_unchecked(dim: usize, rank: usize, entries: Vec<CMatrix>) -> Result<Self> {
        let count = dim.pow(rank as u32);
        if entries.len() != count {
            return Err(Error::DimensionMismatch { expected: count, found: entries.len() });
        }
        let n = entries[0].nrows();
        if let Some(bad) = entries.iter().find(|e| e.nrows() != n || e.ncols() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.nrows() });
        }
        Ok(Self { dim, rank, entries, note: None })
    }

    fn validate(&self) -> Result<()> {
        let scale = self.max_abs().max(1.0);
        let h = self.hermitian_defect();
        if h > HERMITIAN_TOL * scale {
            return Err(Error::Invariant(format!("operator tensor entry not Hermitian (defect {h:e})")));
        }
        let s = self.symmetry_defect();
        if s > INDEX_TOL * scale {
            return Err(Error::Invariant(format!("operator tensor not index-symmetric (defect {s:e})")));
        }
        let t = self.trace_defect();
        if t > INDEX_TOL * scale {
            return Err(Error::Invariant(format!("operator tensor not index-traceless (defect {t:e})")));
        }
        Ok(())
    }

    pub fn zeros(dim: usize, rank: usize, n: usize) -> Self {
        Self { dim, rank, entries: vec![DMatrix::zeros(n, n); dim.pow(rank as u32)], note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Hilbert-space dimension.
    pub fn n(&self) -> usize {
        self.entries[0].nrows()
    }

    pub fn entries(&self) -> &[CMatrix] {
        &self.entries
    }

    pub fn component(&self, idx: &[usize]) -> &CMatrix {
        assert_eq!(idx.len(), self.rank);
        let flat = idx.iter().fold(0, |acc, &i| acc * self.dim + i);
        &self.entries[flat]
    }

    pub fn scale(mut self, s: f64) -> Self {
        let s = Complex64::new(s, 0.0);
        for e in &mut self.entries {
            *e *= s;
        }
        self
    }

    /// `sqrt(Σ_I ‖T_I‖_F²)`.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(max_abs).fold(0.0, f64::max)
    }

    /// Largest entrywise difference; `None` if shapes differ.
    pub fn max_abs_diff(&self, other: &OperatorTensor) -> Option<f64> {
        if self.dim != other.dim || self.rank != other.rank || self.n() != other.n() {
            return None;
        }
        Some(self.entries.iter().zip(&other.entries).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max))
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.entries.iter().map(hermitian_defect).fold(0.0, f64::max)
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.componentwise_max(|t| t.symmetry_defect())
    }

    pub fn trace_defect(&self) -> f64 {
        self.componentwise_max(|t| t.trace_defect())
    }

    /// Apply a real-tensor defect measure to each matrix element `(r, c)`
    /// viewed as a tensor over the indices.
    fn componentwise_max(&self, f: impl Fn(&Tensor) -> f64) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                for part in [0, 1] {
                    let data = self
                        .entries
                        .iter()
                        .map(|e| if part == 0 { e[(r, c)].re } else { e[(r, c)].im })
                        .collect();
                    let t = Tensor::from_vec(self.dim, self.rank, data).expect("sizes checked");
                    worst = worst.max(f(&t));
                }
            }
        }
        worst
    }

    /// `U T_I U†` for every component.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        let entries = self.entries.iter().map(|e| u * e * u.adjoint()).collect();
        Self { dim: self.dim, rank: self.rank, entries, note: self.note.clone() }
    }
}

/// `T̂ = A_l ∫dΩ T^(d,l)(u) Δ(u)` (plus any internal angles of the kernel),
/// with `dΩ` the plain grid measure — not `dΓ = μ dΩ`. Consequently
/// `quantize(A_l T) = μ · T̂`.
///
/// On an SO(3) kernel `u = R e_z` (the body axis).
pub fn order_parameter_operator(kernel: &KernelField, dim: SpatialDim, rank: usize) -> Result<OperatorTensor> {
    let grid = kernel.grid();
    let d = dim.get();
    let expected_dim = match grid.domain() {
        Domain::S1 => 2,
        Domain::S2 | Domain::SO3 => 3,
    };
    if d != expected_dim {
        return Err(Error::GridMismatch(format!("a {} kernel carries {expected_dim}-dimensional orientations, not {d}", grid.domain())));
    }
    grid.require(rank + kernel.angular_band_limit())?;
    let n = kernel.dim();
    let a = normalization(dim, rank);
    let mut entries = vec![DMatrix::<Complex64>::zeros(n, n); d.pow(rank as u32)];
    for (k, (delta, w)) in kernel.nodes().iter().zip(grid.weights()).enumerate() {
        let u = match grid.domain() {
            Domain::SO3 => {
                let r = grid.rotation(k);
                vec![r[(0, 2)], r[(1, 2)], r[(2, 2)]]
            }
            _ => grid.unit_vector(k),
        };
        let t = tensor_polynomial_unchecked(d, rank, &u);
        for (e, &tc) in entries.iter_mut().zip(t.data()) {
            if tc != 0.0 {
                *e += delta * Complex64::new(a * w * tc, 0.0);
            }
        }
    }
    OperatorTensor::new(d, rank, entries)
}

/// Imaginary-part tolerance for expectation values.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;

/// `⟨T̂_I⟩ = Tr(ρ T̂_I)` for every component.
pub fn expectation(rho: &DensityMatrix, op: &OperatorTensor) -> Result<SymmetricTracelessTensor> {
    if rho.dim() != op.n() {
        return Err(Error::DimensionMismatch { expected: op.n(), found: rho.dim() });
    }
    let mut data = Vec::with_capacity(op.entries.len());
    for e in &op.entries {
        let v = trace_product(rho.matrix(), e);
        if v.im.abs() > EXPECTATION_IMAG_TOL * v.re.abs().max(1.0) {
            return Err(Error::Invariant(format!("expectation value has imaginary part {:e}", v.im)));
        }
        data.push(v.re);
    }
    let t = Tensor::from_vec(op.dim, op.rank, data)?;
    let scale = t.max_abs().max(1.0);
    SymmetricTracelessTensor::new(t, INDEX_TOL * scale)
}

/// `(1/N) Σ_i 𝟙⊗…⊗T̂⊗…⊗𝟙` (operator in slot `i`) on the `n^N`-dimensional
/// product space; slot 0 is the most significant factor.
pub fn many_particle_lift(op: &OperatorTensor, particles: usize) -> Result<OperatorTensor> {
    if particles == 0 {
        return Err(Error::Domain("particle count must be at least 1".into()));
    }
    let n = op.n();
    let total = (0..particles).try_fold(1usize, |acc, _| acc.checked_mul(n)).filter(|&t| t <= LIFT_LIMIT);
    let Some(total) = total else {
        return Err(Error::SizeGuard { dim: n.saturating_pow(particles as u32), limit: LIFT_LIMIT });
    };
    let inv = Complex64::new(1.0 / particles as f64, 0.0);
    let entries = op
        .entries
        .iter()
        .map(|e| {
            let mut acc = DMatrix::zeros(total, total);
            for slot in 0..particles {
                let left = identity(n.pow(slot as u32));
                let right = identity(n.pow((particles - 1 - slot) as u32));
                acc += left.kronecker(e).kronecker(&right);
            }
            acc * inv
        })
        .collect();
    Ok(OperatorTensor { dim: op.dim, rank: op.rank, entries, note: op.note.clone() })
}

/// Reduced state of particle `keep` of an `N`-particle state on `(ℂⁿ)^{⊗N}`.
pub fn partial_trace(rho: &CMatrix, n: usize, particles: usize, keep: usize) -> Result<CMatrix> {
    let total = n.pow(particles as u32);
    if rho.nrows() != total || keep >= particles {
        return Err(Error::DimensionMismatch { expected: total, found: rho.nrows() });
    }
    let stride = n.pow((particles - 1 - keep) as u32);
    let mut out = DMatrix::zeros(n, n);
    for r in 0..total {
        let a = (r / stride) % n;
        let rest = r - a * stride;
        for b in 0..n {
            out[(a, b)] += rho[(r, rest + b * stride)];
        }
    }
    Ok(out)
}

const INDEX_ORDER: &str = "row-major over tensor indices; component k has indices (i1..il) with k = sum_j i_j * dim^(l-j)";

#[derive(Serialize, Deserialize)]
struct OperatorTensorJson {
    dim: usize,
    rank: usize,
    n: usize,
    index_order: String,
    components: Vec<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    note: Option<String>,
}

impl From<OperatorTensor> for OperatorTensorJson {
    fn from(op: OperatorTensor) -> Self {
        OperatorTensorJson {
            dim: op.dim,
            rank: op.rank,
            n: op.n(),
            index_order: INDEX_ORDER.into(),
            components: op.entries.iter().map(MatrixJson::from).collect(),
            note: op.note,
        }
    }
}

impl TryFrom<OperatorTensorJson> for OperatorTensor {
    type Error = Error;
    fn try_from(j: OperatorTensorJson) -> Result<Self> {
        let entries = j.components.into_iter().map(CMatrix::try_from).collect::<Result<Vec<_>>>()?;
        if entries.first().is_some_and(|e| e.nrows() != j.n) {
            return Err(Error::Parse(format!("operator tensor declares n = {} but components differ", j.n)));
        }
        let mut op = OperatorTensor::new(j.dim, j.rank, entries)?;
        op.note = j.note;
        Ok(op)
    }
}
