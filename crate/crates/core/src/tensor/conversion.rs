//! Angular (spherical-harmonic) ↔ Cartesian coefficient conversion in 3D.
//!
//! The conversion matrices are computed by quadrature on an exact grid rather
//! than transcribed: row `m` of the rank-l matrix is `A_l ∫ Y_lm T^(3,l) dΩ`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use super::{normalization, tensor_polynomial_unchecked, SpatialDim, SymmetricTracelessTensor, Tensor};
use crate::angular::ylm;
use crate::error::{Error, Result};
use crate::expansion::{build_grid, Domain};

struct Conversion {
    /// `(2l+1)` rows, `m = -l..=l`, each of length `3^l`.
    to_cartesian: Vec<Vec<Complex64>>,
    /// Orthonormal real basis of the rank-l symmetric traceless space.
    basis: Vec<SymmetricTracelessTensor>,
}

fn conversion(l: usize) -> Arc<Conversion> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Conversion>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().expect("conversion cache poisoned").get(&l) {
        return c.clone();
    }
    let built = Arc::new(build_conversion(l));
    cache.lock().expect("conversion cache poisoned").entry(l).or_insert(built).clone()
}

fn build_conversion(l: usize) -> Conversion {
    let grid = build_grid(Domain::S2, 2 * l).expect("grid construction is infallible");
    let a = normalization(SpatialDim::Three, l);
    let size = 3usize.pow(l as u32);
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); size]; 2 * l + 1];
    for k in 0..grid.len() {
        let [theta, phi, _] = grid.nodes()[k];
        let t = tensor_polynomial_unchecked(3, l, &grid.unit_vector(k));
        let w = grid.weights()[k] * a;
        for (row, m) in rows.iter_mut().zip(-(l as i32)..=l as i32) {
            let y = ylm(l, m, theta, phi) * w;
            for (r, &tc) in row.iter_mut().zip(t.data()) {
                *r += y * tc;
            }
        }
    }
    // Re Y_lm (m ≥ 0) and Im Y_lm (m > 0) are mutually orthogonal real
    // harmonics, and f ↦ ∫ f T dΩ is a scaled isometry on degree l, so their
    // images are orthogonal.
    let mut basis = Vec::with_capacity(2 * l + 1);
    let push = |basis: &mut Vec<SymmetricTracelessTensor>, v: Vec<f64>| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let t = Tensor::from_vec(3, l, v.into_iter().map(|x| x / n).collect()).expect("size matches");
        basis.push(SymmetricTracelessTensor::new_unchecked(t));
    };
    for m in (1..=l).rev() {
        push(&mut basis, rows[l + m].iter().map(|c| c.im).collect());
    }
    for m in 0..=l {
        push(&mut basis, rows[l + m].iter().map(|c| c.re).collect());
    }
    Conversion { to_cartesian: rows, basis }
}

/// Orthonormal basis (Frobenius inner product) of the `2l+1`-dimensional
/// space of rank-l symmetric traceless tensors in 3D.
pub fn harmonic_basis(l: usize) -> Vec<SymmetricTracelessTensor> {
    conversion(l).basis.clone()
}

/// Convert a complete multiplet `{f_lm, m = -l..=l}` of a real function into
/// the Cartesian tensor `F` with `F · u^{⊗l} = Σ_m f_lm Y_lm(u)` pointwise.
pub fn angular_to_cartesian(l: usize, coeffs: &[Complex64]) -> Result<SymmetricTracelessTensor> {
    if coeffs.len() != 2 * l + 1 {
        return Err(Error::Index(format!(
            "incomplete multiplet: rank {l} needs {} coefficients, got {}",
            2 * l + 1,
            coeffs.len()
        )));
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
    for m in 1..=l {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let expected = coeffs[l + m].conj() * sign;
        if (coeffs[l - m] - expected).norm() > 1e-10 * scale {
            return Err(Error::Invariant(format!(
                "multiplet violates f_(l,-m) = (-1)^m conj(f_lm) at l = {l}, m = {m}"
            )));
        }
    }
    let conv = conversion(l);
    let size = 3usize.pow(l as u32);
    let mut data = vec![0.0; size];
    for (c, row) in coeffs.iter().zip(&conv.to_cartesian) {
        for (d, r) in data.iter_mut().zip(row) {
            *d += (c * r).re;
        }
    }
    Ok(SymmetricTracelessTensor::new_unchecked(Tensor::from_vec(3, l, data)?))
}

/// Inverse of [`angular_to_cartesian`]: `f_lm = ∫ (F · u^{⊗l}) Y*_lm dΩ`.
pub fn cartesian_to_angular(t: &SymmetricTracelessTensor) -> Result<Vec<Complex64>> {
    if t.dim() != 3 {
        return Err(Error::Domain("angular conversion is defined for d = 3 only".into()));
    }
    let l = t.rank();
    let conv = conversion(l);
    let a = normalization(SpatialDim::Three, l);
    Ok(conv
        .to_cartesian
        .iter()
        .map(|row| row.iter().zip(t.data()).map(|(r, &x)| r.conj() * x).sum::<Complex64>() / a)
        .collect())
}
