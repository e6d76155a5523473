use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::density::{DensityMatrix, PSD_TOL};
use super::matrix::{hermitian_defect, hermitian_eigenvalues, identity, max_abs, trace_product, CMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};
use crate::expansion::QuadratureGrid;

/// Tolerance for `∫dΓ Δ = 𝟙`.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Matrix-valued kernel `Δ(Γ)` sampled on a quadrature grid.
///
/// `dΓ = μ · (grid weight)`; `μ` is fixed so that `∫dΓ Δ = 𝟙`.
#[derive(Clone, Debug)]
pub struct KernelField {
    grid: QuadratureGrid,
    nodes: Vec<CMatrix>,
    mu: f64,
    angular_band_limit: usize,
}

impl KernelField {
    /// `angular_band_limit` is the highest angular frequency present in the
    /// kernel (`2s` for spins); products with rank-l symbols need a grid of
    /// band-limit `l + angular_band_limit`.
    pub fn new(grid: QuadratureGrid, nodes: Vec<CMatrix>, mu: f64, angular_band_limit: usize) -> Result<Self> {
        if nodes.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} kernel matrices for a {}-node grid", nodes.len(), grid.len())));
        }
        let n = nodes.first().map_or(0, |m| m.nrows());
        if n == 0 {
            return Err(Error::Domain("empty kernel".into()));
        }
        for (k, m) in nodes.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
            }
            let h = hermitian_defect(m);
            if h > HERMITIAN_TOL * max_abs(m).max(1.0) {
                return Err(Error::Invariant(format!("kernel matrix at node {k} is not Hermitian (defect {h:e})")));
            }
        }
        let field = Self { grid, nodes, mu, angular_band_limit };
        let defect = field.normalization_defect();
        if defect > NORMALIZATION_TOL {
            return Err(Error::Invariant(format!("kernel does not integrate to the identity (defect {defect:e})")));
        }
        Ok(field)
    }

    /// As [`KernelField::new`], with `μ = n / Σ_k w_k Tr Δ_k`.
    pub fn normalized(grid: QuadratureGrid, nodes: Vec<CMatrix>, angular_band_limit: usize) -> Result<Self> {
        let n = nodes.first().map_or(0, |m| m.nrows()) as f64;
        let total: f64 = nodes.iter().zip(grid.weights()).map(|(m, w)| w * m.trace().re).sum();
        if !(total.abs() > 0.0) {
            return Err(Error::Invariant("kernel has zero integrated trace".into()));
        }
        Self::new(grid, nodes, n / total, angular_band_limit)
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].nrows()
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn angular_band_limit(&self) -> usize {
        self.angular_band_limit
    }

    pub fn nodes(&self) -> &[CMatrix] {
        &self.nodes
    }

    /// `max |∫dΓ Δ − 𝟙|`, entrywise.
    pub fn normalization_defect(&self) -> f64 {
        max_abs(&(self.integrate(|_| 1.0) - identity(self.dim())))
    }

    /// `Σ_k μ w_k f_k Δ_k`, summed in node order.
    pub(crate) fn integrate(&self, f: impl Fn(usize) -> f64) -> CMatrix {
        let n = self.dim();
        let mut acc = DMatrix::zeros(n, n);
        for (k, (m, w)) in self.nodes.iter().zip(self.grid.weights()).enumerate() {
            acc += m * Complex64::new(self.mu * w * f(k), 0.0);
        }
        acc
    }

    fn check_samples(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a kernel on a {}-node grid",
                samples.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }
}

/// Largest tolerated imaginary part of a Wigner sample, relative to `max(1, |W|)`.
pub const WIGNER_IMAG_TOL: f64 = 1e-12;

/// `W(Γ) = Tr(ρ Δ(Γ))` at every node.
pub fn wigner_from_state(rho: &DensityMatrix, kernel: &KernelField) -> Result<Vec<f64>> {
    if rho.dim() != kernel.dim() {
        return Err(Error::DimensionMismatch { expected: kernel.dim(), found: rho.dim() });
    }
    let values: Vec<Complex64> = kernel.nodes.par_iter().map(|d| trace_product(rho.matrix(), d)).collect();
    values
        .into_iter()
        .enumerate()
        .map(|(k, w)| {
            if w.im.abs() > WIGNER_IMAG_TOL * w.re.abs().max(1.0) {
                Err(Error::Invariant(format!("Wigner function has imaginary part {:e} at node {k}", w.im)))
            } else {
                Ok(w.re)
            }
        })
        .collect()
}

/// Output of [`state_from_wigner`]. Arbitrary `W` need not map to a physical
/// state; `physical` records whether the reconstruction passes the density
/// matrix invariants.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub matrix: CMatrix,
    pub physical: bool,
    pub min_eigenvalue: f64,
}

impl Reconstruction {
    pub fn into_state(self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.matrix)
    }
}

/// `ρ = ∫dΓ W(Γ) Δ(Γ)`.
pub fn state_from_wigner(samples: &[f64], kernel: &KernelField) -> Result<Reconstruction> {
    let matrix = quantize(samples, kernel)?;
    let min_eigenvalue = hermitian_eigenvalues(&matrix).first().copied().unwrap_or(0.0);
    let physical = DensityMatrix::new(matrix.clone()).is_ok();
    debug_assert!(!physical || min_eigenvalue >= -PSD_TOL);
    Ok(Reconstruction { matrix, physical, min_eigenvalue })
}

/// `Â = ∫dΓ A(Γ) Δ(Γ)`.
pub fn quantize(samples: &[f64], kernel: &KernelField) -> Result<CMatrix> {
    kernel.check_samples(samples)?;
    Ok(kernel.integrate(|k| samples[k]))
}
