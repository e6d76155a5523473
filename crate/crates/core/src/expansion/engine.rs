use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{Domain, QuadratureGrid};
use super::rotation::RotationCoefficient;
use crate::angular::ylm;
use crate::error::{Error, Result};
use crate::tensor::{normalization, tensor_polynomial_unchecked, SpatialDim, SymmetricTracelessTensor, Tensor};

/// Spherical-harmonic coefficients `f_lm`, `l = 0..=l_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularCoefficients {
    pub l_max: usize,
    /// `coeffs[l][l + m]`.
    pub coeffs: Vec<Vec<Complex64>>,
}

impl AngularCoefficients {
    pub fn get(&self, l: usize, m: i32) -> Complex64 {
        self.coeffs[l][(l as i32 + m) as usize]
    }

    pub fn multiplet(&self, l: usize) -> &[Complex64] {
        &self.coeffs[l]
    }

    /// `Σ_lm f_lm Y_lm(θ, φ)`.
    pub fn evaluate(&self, theta: f64, phi: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, row) in self.coeffs.iter().enumerate() {
            for (c, m) in row.iter().zip(-(l as i32)..=l as i32) {
                acc += c * ylm(l, m, theta, phi);
            }
        }
        acc
    }
}

/// Per-rank coefficients of an orientational expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficients {
    /// Symmetric traceless tensors `f^(d)_{i1…il}` on S¹ or S².
    Cartesian { dim: usize, tensors: Vec<SymmetricTracelessTensor> },
    /// Rotation-matrix coefficients `c_{i1 j1 … il jl}` on SO(3).
    Rotation { tensors: Vec<RotationCoefficient> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionResult {
    pub domain: Domain,
    pub band_limit: usize,
    pub coefficients: Coefficients,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub angular: Option<AngularCoefficients>,
    /// Quadrature-weighted `‖f − reconstruction‖₂` over the grid.
    pub residual: f64,
}

/// Where to evaluate a reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Vector(Vec<f64>),
    Rotation(Matrix3<f64>),
}

impl ExpansionResult {
    /// Rank-l Cartesian tensor (S¹/S² only).
    pub fn cartesian(&self, rank: usize) -> Option<&SymmetricTracelessTensor> {
        match &self.coefficients {
            Coefficients::Cartesian { tensors, .. } => tensors.get(rank),
            Coefficients::Rotation { .. } => None,
        }
    }

    pub fn rotation(&self, rank: usize) -> Option<&RotationCoefficient> {
        match &self.coefficients {
            Coefficients::Rotation { tensors } => tensors.get(rank),
            Coefficients::Cartesian { .. } => None,
        }
    }

    fn evaluate_unchecked(&self, point: &Point) -> f64 {
        match (&self.coefficients, point) {
            (Coefficients::Cartesian { tensors, .. }, Point::Vector(u)) => tensors.iter().map(|t| t.evaluate(u)).sum(),
            (Coefficients::Rotation { tensors }, Point::Rotation(r)) => tensors.iter().map(|c| c.evaluate(r)).sum(),
            _ => unreachable!("checked by reconstruct"),
        }
    }
}

fn check_samples(grid: &QuadratureGrid, samples: &[f64]) -> Result<()> {
    if samples.len() != grid.len() {
        return Err(Error::GridMismatch(format!("{} samples for a {}-node grid", samples.len(), grid.len())));
    }
    Ok(())
}

/// `f_lm = ∫ f Y*_lm dΩ` for all `l ≤ band_limit`. The grid must be exact
/// for band-limit `2·band_limit`.
pub fn expand_angular(grid: &QuadratureGrid, samples: &[f64], band_limit: usize) -> Result<AngularCoefficients> {
    if grid.domain() != Domain::S2 {
        return Err(Error::GridMismatch(format!("angular expansion needs an S2 grid, got {}", grid.domain())));
    }
    grid.require(2 * band_limit)?;
    check_samples(grid, samples)?;
    let mut coeffs: Vec<Vec<Complex64>> =
        (0..=band_limit).map(|l| vec![Complex64::new(0.0, 0.0); 2 * l + 1]).collect();
    for (k, (&f, &w)) in samples.iter().zip(grid.weights()).enumerate() {
        let [theta, phi, _] = grid.nodes()[k];
        for (l, row) in coeffs.iter_mut().enumerate() {
            for (c, m) in row.iter_mut().zip(-(l as i32)..=l as i32) {
                *c += ylm(l, m, theta, phi).conj() * (w * f);
            }
        }
    }
    Ok(AngularCoefficients { l_max: band_limit, coeffs })
}

/// Rank-l Cartesian coefficient `A_l Σ_k w_k f_k T^(d,l)(u_k)`.
fn cartesian_rank(grid: &QuadratureGrid, samples: &[f64], rank: usize) -> SymmetricTracelessTensor {
    let d = grid.domain().arity() + 1;
    let dim = SpatialDim::try_from(d).expect("S1/S2 grid");
    let mut acc = Tensor::zeros(d, rank);
    for (k, (&f, &w)) in samples.iter().zip(grid.weights()).enumerate() {
        let t = tensor_polynomial_unchecked(d, rank, &grid.unit_vector(k));
        acc.add_scaled(t.tensor(), w * f);
    }
    SymmetricTracelessTensor::new_unchecked(acc.scale(normalization(dim, rank)))
}

fn weighted_residual(grid: &QuadratureGrid, samples: &[f64], recon: impl Fn(usize) -> f64) -> f64 {
    grid.integrate(|k| (samples[k] - recon(k)).powi(2)).max(0.0).sqrt()
}

/// Cartesian expansion of samples on an S¹ (`d = 2`) or S² (`d = 3`) grid up
/// to rank `band_limit`. For S² the angular coefficients are included too.
pub fn expand_cartesian(grid: &QuadratureGrid, samples: &[f64], band_limit: usize) -> Result<ExpansionResult> {
    if grid.domain() == Domain::SO3 {
        return Err(Error::GridMismatch("Cartesian vector expansion needs an S1 or S2 grid".into()));
    }
    grid.require(2 * band_limit)?;
    check_samples(grid, samples)?;
    let d = grid.domain().arity() + 1;
    let tensors: Vec<_> = (0..=band_limit).map(|l| cartesian_rank(grid, samples, l)).collect();
    let residual =
        weighted_residual(grid, samples, |k| tensors.iter().map(|t| t.evaluate(&grid.unit_vector(k))).sum());
    let angular = if grid.domain() == Domain::S2 { Some(expand_angular(grid, samples, band_limit)?) } else { None };
    Ok(ExpansionResult {
        domain: grid.domain(),
        band_limit,
        coefficients: Coefficients::Cartesian { dim: d, tensors },
        angular,
        residual,
    })
}

/// Rotation-matrix expansion on an SO(3) grid; see [`super::rotation`].
pub fn expand_rotation(grid: &QuadratureGrid, samples: &[f64], band_limit: usize) -> Result<ExpansionResult> {
    if grid.domain() != Domain::SO3 {
        return Err(Error::GridMismatch(format!("rotation expansion needs an SO3 grid, got {}", grid.domain())));
    }
    grid.require(2 * band_limit)?;
    check_samples(grid, samples)?;
    let tensors = super::rotation::least_squares(grid, samples, band_limit)?;
    let residual = weighted_residual(grid, samples, |k| {
        let r = grid.rotation(k);
        tensors.iter().map(|c| c.evaluate(&r)).sum()
    });
    Ok(ExpansionResult {
        domain: Domain::SO3,
        band_limit,
        coefficients: Coefficients::Rotation { tensors },
        angular: None,
        residual,
    })
}

/// Evaluate the truncated expansion at `point`: `Σ_l F_l · u^{⊗l}` or
/// `Σ_l c_l · R^{⊗l}`.
pub fn reconstruct(result: &ExpansionResult, point: &Point) -> Result<f64> {
    match (&result.coefficients, point) {
        (Coefficients::Cartesian { dim, .. }, Point::Vector(u)) => {
            if u.len() != *dim {
                return Err(Error::DimensionMismatch { expected: *dim, found: u.len() });
            }
        }
        (Coefficients::Rotation { .. }, Point::Rotation(_)) => {}
        _ => {
            return Err(Error::GridMismatch(format!("point does not live on the {} domain", result.domain)));
        }
    }
    Ok(result.evaluate_unchecked(point))
}
