//! SO(3) order parameters of rigid bodies.
//!
//! `P_ij = 3/(8π²) ∫dR R_ij f(R)` and
//! `Q_ijkl = 5/(16π²) ∫dR (R_ij R_kl + R_il R_kj − ⅔ δ_ik δ_jl) f(R)`.
//!
//! **Index split:** in `R_ij` the first index is the laboratory frame and
//! the second the body frame (`R` maps body to lab; the body axis `e_j` sits
//! at `R e_j`). Neither `P` nor `Q` is symmetric across that split, and
//! nothing here symmetrizes over it. `Q` is symmetric under `(i,j) ↔ (k,l)`,
//! and symmetric traceless in the lab pair `(i,k)` and in the body pair
//! `(j,l)` separately; it equals the rank-2 rotation-expansion coefficient
//! `c[(i,k),(j,l)]`, and `P` equals the rank-1 coefficient.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::EulerAngles;
use crate::error::{Error, Result};
use crate::expansion::{Domain, GridSamples, QuadratureGrid};
use crate::quantum::{hermitian_defect, CMatrix, HERMITIAN_TOL};
use crate::tensor::Tensor;

/// Per-node values on an SO(3) grid.
#[derive(Clone, Debug)]
pub enum RotationValues {
    Scalar(Vec<f64>),
    Matrix(Vec<CMatrix>),
}

#[derive(Clone, Debug)]
pub struct RotationField {
    grid: QuadratureGrid,
    values: RotationValues,
}

impl RotationField {
    /// Classical `f(R)`. With `probability`, values must be non-negative.
    pub fn scalar(grid: QuadratureGrid, values: Vec<f64>, probability: bool) -> Result<Self> {
        check_grid(&grid, values.len())?;
        if probability {
            if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
                return Err(Error::Invariant(format!("probability density has negative value {v}")));
            }
        }
        Ok(Self { grid, values: RotationValues::Scalar(values) })
    }

    /// Kernel field `Δ(R)`; every node Hermitian.
    pub fn matrix(grid: QuadratureGrid, values: Vec<CMatrix>) -> Result<Self> {
        check_grid(&grid, values.len())?;
        let n = values.first().map_or(0, |m| m.nrows());
        for (k, m) in values.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
            }
            let h = hermitian_defect(m);
            if h > HERMITIAN_TOL * m.iter().fold(1.0f64, |a, z| a.max(z.norm())) {
                return Err(Error::Invariant(format!("kernel matrix at node {k} is not Hermitian (defect {h:e})")));
            }
        }
        Ok(Self { grid, values: RotationValues::Matrix(values) })
    }

    /// Sample a named density on `grid`.
    pub fn from_density(grid: QuadratureGrid, density: &NamedDensity) -> Result<Self> {
        let raw: Vec<f64> = (0..grid.len()).map(|k| density.unnormalized(&grid.rotation(k))).collect();
        let total = grid.integrate(|k| raw[k]);
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Invariant(format!("density integrates to {total}")));
        }
        Self::scalar(grid, raw.into_iter().map(|v| v / total).collect(), true)
    }

    /// Scalar field from an SO(3) sample file column.
    pub fn from_samples(samples: &GridSamples, column: &str, probability: bool) -> Result<Self> {
        let v = samples
            .column(column)
            .ok_or_else(|| Error::Parse(format!("no column {column:?} in rotation samples")))?;
        Self::scalar(samples.grid.clone(), v.to_vec(), probability)
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn values(&self) -> &RotationValues {
        &self.values
    }
}

fn check_grid(grid: &QuadratureGrid, count: usize) -> Result<()> {
    if grid.domain() != Domain::SO3 {
        return Err(Error::GridMismatch(format!("rotation field needs an SO3 grid, got {}", grid.domain())));
    }
    if count != grid.len() {
        return Err(Error::GridMismatch(format!("{count} values for a {}-node grid", grid.len())));
    }
    Ok(())
}

/// Result of a molecular contraction: a real tensor for classical input, a
/// tensor of Hermitian matrices for kernel input. Components are row-major
/// over `(i, j)` or `(i, j, k, l)`.
#[derive(Clone, Debug, PartialEq)]
pub enum MolecularTensor {
    Classical(Tensor),
    Quantum { rank: usize, entries: Vec<CMatrix> },
}

impl MolecularTensor {
    pub fn rank(&self) -> usize {
        match self {
            MolecularTensor::Classical(t) => t.rank(),
            MolecularTensor::Quantum { rank, .. } => *rank,
        }
    }

    pub fn classical(&self) -> Option<&Tensor> {
        match self {
            MolecularTensor::Classical(t) => Some(t),
            MolecularTensor::Quantum { .. } => None,
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            MolecularTensor::Classical(t) => t.max_abs(),
            MolecularTensor::Quantum { entries, .. } => {
                entries.iter().flat_map(|m| m.iter()).fold(0.0, |a, z| a.max(z.norm()))
            }
        }
    }
}

fn contract(field: &RotationField, rank: usize, pref: f64, weight: impl Fn(&Matrix3<f64>, &[usize]) -> f64) -> MolecularTensor {
    let grid = &field.grid;
    let count = 3usize.pow(rank as u32);
    let idx: Vec<Vec<usize>> = (0..count).map(|f| (0..rank).rev().map(|s| (f / 3usize.pow(s as u32)) % 3).collect()).collect();
    match &field.values {
        RotationValues::Scalar(v) => {
            let mut data = vec![0.0; count];
            for (k, (&f, &w)) in v.iter().zip(grid.weights()).enumerate() {
                let r = grid.rotation(k);
                for (d, ix) in data.iter_mut().zip(&idx) {
                    *d += w * f * weight(&r, ix);
                }
            }
            let t = Tensor::from_vec(3, rank, data).expect("size").scale(pref);
            MolecularTensor::Classical(t)
        }
        RotationValues::Matrix(m) => {
            let n = m[0].nrows();
            let mut entries = vec![DMatrix::zeros(n, n); count];
            for (k, (delta, &w)) in m.iter().zip(grid.weights()).enumerate() {
                let r = grid.rotation(k);
                for (e, ix) in entries.iter_mut().zip(&idx) {
                    let c = w * weight(&r, ix);
                    if c != 0.0 {
                        *e += delta * Complex64::new(c * pref, 0.0);
                    }
                }
            }
            MolecularTensor::Quantum { rank, entries }
        }
    }
}

pub const POLARIZATION_PREFACTOR: f64 = 3.0 / (8.0 * PI * PI);
pub const NEMATIC_PREFACTOR: f64 = 5.0 / (16.0 * PI * PI);

/// `P_ij` (rank 2 over lab index `i`, body index `j`). Needs band-limit ≥ 2.
pub fn molecular_polarization(field: &RotationField) -> Result<MolecularTensor> {
    field.grid.require(2)?;
    Ok(contract(field, 2, POLARIZATION_PREFACTOR, |r, ix| r[(ix[0], ix[1])]))
}

/// `Q_ijkl` (rank 4 over `(i, j, k, l)`). Needs band-limit ≥ 4.
pub fn molecular_nematic(field: &RotationField) -> Result<MolecularTensor> {
    field.grid.require(4)?;
    Ok(contract(field, 4, NEMATIC_PREFACTOR, |r, ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        let dd = if i == k && j == l { 2.0 / 3.0 } else { 0.0 };
        r[(i, j)] * r[(k, l)] + r[(i, l)] * r[(k, j)] - dd
    }))
}

/// `Q_{i3k3}`: the lab-frame nematic tensor of the body z-axis, scaled so
/// that `3π Q_{i3k3}` is the S² rank-2 coefficient of the axis density.
pub fn body_axis_nematic(q: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(3, 2);
    for i in 0..3 {
        for k in 0..3 {
            out.set(&[i, k], q.get(&[i, 2, k, 2]));
        }
    }
    out
}

/// Named analytic densities on SO(3).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NamedDensity {
    Uniform,
    /// `∝ exp(κ tr(R₀ᵀ R))`, concentrated at `R₀ = R(α₀, β₀, γ₀)`.
    VonMisesFisher { kappa: f64, alpha: f64, beta: f64, gamma: f64 },
    /// `∝ exp(κ (R e_z)·n₀)`, `n₀` at polar angles `(θ₀, φ₀)`: depends only
    /// on the body z-axis.
    Uniaxial { kappa: f64, theta: f64, phi: f64 },
}

impl NamedDensity {
    pub fn unnormalized(&self, r: &Matrix3<f64>) -> f64 {
        match *self {
            NamedDensity::Uniform => 1.0,
            NamedDensity::VonMisesFisher { kappa, alpha, beta, gamma } => {
                let r0 = EulerAngles { alpha, beta, gamma }.to_matrix();
                // Shifted by 3κ so the peak is 1.
                (kappa * ((r0.transpose() * r).trace() - 3.0)).exp()
            }
            NamedDensity::Uniaxial { kappa, theta, phi } => {
                let n0 = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                (kappa * (r.column(2).dot(&n0) - 1.0)).exp()
            }
        }
    }
}

impl fmt::Display for NamedDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedDensity::Uniform => f.write_str("uniform"),
            NamedDensity::VonMisesFisher { kappa, alpha, beta, gamma } => {
                write!(f, "vmf-so3:{kappa},{alpha},{beta},{gamma}")
            }
            NamedDensity::Uniaxial { kappa, theta, phi } => write!(f, "uniaxial:{kappa},{theta},{phi}"),
        }
    }
}

impl FromStr for NamedDensity {
    type Err = Error;

    /// `uniform`, `vmf-so3:kappa,alpha0,beta0,gamma0` or
    /// `uniaxial:kappa,theta0,phi0`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = args
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?} in density {s:?}"))))
            .collect::<Result<_>>()?;
        let d = match (kind, nums.as_slice()) {
            ("uniform", []) => NamedDensity::Uniform,
            ("vmf-so3", &[kappa, alpha, beta, gamma]) => NamedDensity::VonMisesFisher { kappa, alpha, beta, gamma },
            ("uniaxial", &[kappa, theta, phi]) => NamedDensity::Uniaxial { kappa, theta, phi },
            _ => {
                return Err(Error::Parse(format!(
                    "unknown density {s:?} (expected uniform, vmf-so3:kappa,a,b,g or uniaxial:kappa,theta,phi)"
                )))
            }
        };
        if nums.iter().any(|x| !x.is_finite()) || nums.first().is_some_and(|k| *k < 0.0) {
            return Err(Error::Parse(format!("invalid density parameters in {s:?}")));
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{build_grid, expand_cartesian, expand_rotation};
    use approx::assert_abs_diff_eq;

    fn field(band: usize, f: impl Fn(&Matrix3<f64>) -> f64) -> RotationField {
        let g = build_grid(Domain::SO3, band).unwrap();
        let v = (0..g.len()).map(|k| f(&g.rotation(k))).collect();
        RotationField::scalar(g, v, false).unwrap()
    }

    #[test]
    fn uniform_is_isotropic() {
        let f = field(4, |_| 1.0 / (8.0 * PI * PI));
        assert!(molecular_polarization(&f).unwrap().max_abs() < 1e-12);
        assert!(molecular_nematic(&f).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn single_entry_density() {
        let f = field(4, |r| (1.0 + r[(0, 0)]) / (8.0 * PI * PI));
        let p = molecular_polarization(&f).unwrap();
        let p = p.classical().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if (i, j) == (0, 0) { 1.0 / (8.0 * PI * PI) } else { 0.0 };
                assert_abs_diff_eq!(p.get(&[i, j]), expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn matches_rotation_expansion() {
        // A generic band-2 density built from rotation entries.
        let f = field(4, |r| 1.0 + 0.3 * r[(0, 1)] - 0.2 * r[(2, 2)] + 0.4 * r[(0, 2)] * r[(1, 0)] + 0.1 * r[(1, 1)] * r[(1, 1)]);
        let samples = match f.values() {
            RotationValues::Scalar(v) => v.clone(),
            _ => unreachable!(),
        };
        let ex = expand_rotation(f.grid(), &samples, 2).unwrap();
        let p = molecular_polarization(&f).unwrap();
        let q = molecular_nematic(&f).unwrap();
        let (p, q) = (p.classical().unwrap(), q.classical().unwrap());
        let c1 = ex.rotation(1).unwrap();
        let c2 = ex.rotation(2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(p.get(&[i, j]), c1.get(&[i], &[j]), epsilon = 1e-12);
                for k in 0..3 {
                    for l in 0..3 {
                        assert_abs_diff_eq!(q.get(&[i, j, k, l]), c2.get(&[i, k], &[j, l]), epsilon = 1e-12);
                        assert_abs_diff_eq!(q.get(&[i, j, k, l]), q.get(&[k, l, i, j]), epsilon = 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn uniaxial_reduction() {
        // Band-limited density of the body axis n = R e_z, tilted director.
        let n0 = Vector3::new(0.3, -0.5, 0.8).normalize();
        let h = |n: &Vector3<f64>| {
            let c = n.dot(&n0);
            1.0 + 0.6 * c + 0.9 * (1.5 * c * c - 0.5)
        };
        let f = field(4, |r| h(&r.column(2).into_owned()));
        let q = molecular_nematic(&f).unwrap();
        let axis = body_axis_nematic(q.classical().unwrap()).scale(3.0 * PI);
        let s2 = build_grid(Domain::S2, 4).unwrap();
        let marginal: Vec<f64> = (0..s2.len())
            .map(|k| {
                let u = s2.unit_vector(k);
                2.0 * PI * h(&Vector3::new(u[0], u[1], u[2]))
            })
            .collect();
        let ex = expand_cartesian(&s2, &marginal, 2).unwrap();
        for (a, b) in axis.data().iter().zip(ex.cartesian(2).unwrap().data()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn left_and_right_invariance() {
        let g = EulerAngles::new(0.4, 1.3, 2.2).unwrap().to_matrix();
        let base = |r: &Matrix3<f64>| 1.0 + 0.5 * r[(0, 1)] + 0.3 * r[(2, 0)] * r[(1, 2)] - 0.2 * r[(1, 1)];
        let f = field(4, base);
        let left = field(4, |r| base(&(g.transpose() * r)));
        let right = field(4, |r| base(&(r * g)));
        let p = molecular_polarization(&f).unwrap().classical().unwrap().clone();
        let pl = molecular_polarization(&left).unwrap().classical().unwrap().clone();
        let pr = molecular_polarization(&right).unwrap().classical().unwrap().clone();
        for i in 0..3 {
            for j in 0..3 {
                let gl: f64 = (0..3).map(|a| g[(i, a)] * p.get(&[a, j])).sum();
                let gr: f64 = (0..3).map(|a| p.get(&[i, a]) * g[(j, a)]).sum();
                assert_abs_diff_eq!(pl.get(&[i, j]), gl, epsilon = 1e-12);
                assert_abs_diff_eq!(pr.get(&[i, j]), gr, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn named_densities() {
        assert_eq!("uniform".parse::<NamedDensity>().unwrap(), NamedDensity::Uniform);
        assert!("vmf-so3:2,0,0".parse::<NamedDensity>().is_err());
        let d: NamedDensity = "vmf-so3:3,0.5,1.0,2.0".parse().unwrap();
        assert_eq!(d.to_string().parse::<NamedDensity>().unwrap(), d);
        let f = RotationField::from_density(build_grid(Domain::SO3, 24).unwrap(), &d).unwrap();
        let total: f64 = match f.values() {
            RotationValues::Scalar(v) => v.iter().zip(f.grid().weights()).map(|(a, w)| a * w).sum(),
            _ => unreachable!(),
        };
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn von_mises_proportional_to_center() {
        let (kappa, angles) = (4.0, (0.7, 1.1, -0.4));
        let d = NamedDensity::VonMisesFisher { kappa, alpha: angles.0, beta: angles.1, gamma: angles.2 };
        let f = RotationField::from_density(build_grid(Domain::SO3, 40).unwrap(), &d).unwrap();
        let p = molecular_polarization(&f).unwrap().classical().unwrap().clone();
        let r0 = EulerAngles { alpha: angles.0, beta: angles.1, gamma: angles.2 }.to_matrix();
        let a = crate::verify::oracles::vmf_mean_factor(kappa);
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(p.get(&[i, j]), POLARIZATION_PREFACTOR * a * r0[(i, j)], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn concentration_at_identity() {
        let limit = |ix: &[usize]| {
            let d = |a: usize, b: usize| f64::from(u8::from(ix[a] == ix[b]));
            NEMATIC_PREFACTOR * (d(0, 1) * d(2, 3) + d(0, 3) * d(2, 1) - 2.0 / 3.0 * d(0, 2) * d(1, 3))
        };
        let mut last = f64::INFINITY;
        for kappa in [4.0, 16.0, 64.0] {
            let d = NamedDensity::VonMisesFisher { kappa, alpha: 0.0, beta: 0.0, gamma: 0.0 };
            let f = RotationField::from_density(build_grid(Domain::SO3, 96).unwrap(), &d).unwrap();
            let q = molecular_nematic(&f).unwrap().classical().unwrap().clone();
            let dist = (0..81).map(|k| (q.data()[k] - limit(&q.multi_index(k))).abs()).fold(0.0, f64::max);
            assert!(dist < last, "κ = {kappa}: {dist} ≥ {last}");
            last = dist;
        }
        assert!(last < 0.05 * NEMATIC_PREFACTOR, "{last}");
    }

    #[test]
    fn coarse_grid_rejected() {
        let f = field(3, |_| 1.0);
        assert!(molecular_polarization(&f).is_ok());
        assert!(matches!(molecular_nematic(&f), Err(Error::InsufficientGrid { .. })));
    }
}
