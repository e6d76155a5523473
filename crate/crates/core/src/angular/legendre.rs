//! Associated Legendre functions and complex spherical harmonics.
//!
//! Condon-Shortley phase is included in `P_l^m`, so
//! `Y_{l,-m} = (-1)^m conj(Y_{lm})` and `Y_{11} ∝ -(x + iy)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `P_l^m(x)` with the Condon-Shortley phase, for `0 ≤ m ≤ l` and `|x| ≤ 1`.
pub fn assoc_legendre(l: usize, m: usize, x: f64) -> Result<f64> {
    if m > l {
        return Err(Error::Domain(format!("assoc_legendre: m = {m} > l = {l}")));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("assoc_legendre: |x| = {} > 1", x.abs())));
    }
    Ok(plm(l, m, x))
}

/// Unchecked `P_l^m(x)`; upward recurrence in `l` from the sectoral value.
pub(crate) fn plm(l: usize, m: usize, x: f64) -> f64 {
    let somx2 = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    // P_m^m = (-1)^m (2m-1)!! (1-x^2)^{m/2}
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return pmm;
    }
    let mut pmmp1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pmmp1;
    }
    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        pll = (x * (2 * ll - 1) as f64 * pmmp1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    pll
}

/// Orthonormal complex spherical harmonic `Y_lm(θ, φ)`.
pub fn spherical_harmonic(l: usize, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::Index(format!("spherical_harmonic: |m| = {} > l = {l}", m.abs())));
    }
    Ok(ylm(l, m, theta, phi))
}

pub(crate) fn ylm(l: usize, m: i32, theta: f64, phi: f64) -> Complex64 {
    let am = m.unsigned_abs() as usize;
    // (l-|m|)!/(l+|m|)!
    let mut ratio = 1.0;
    for k in (l - am + 1)..=(l + am) {
        ratio /= k as f64;
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt();
    let value = norm * plm(l, am, theta.cos()) * Complex64::from_polar(1.0, am as f64 * phi);
    if m < 0 {
        let sign = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
        value.conj() * sign
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Rodrigues route: `P_l^m = (-1)^m (1-x²)^{m/2} d^m/dx^m P_l(x)`, with
    /// `P_l` from its explicit coefficient sum. Independent of the recurrence.
    fn rodrigues(l: usize, m: usize, x: f64) -> f64 {
        fn binom(n: usize, k: usize) -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
        let mut coeffs = vec![0.0; l + 1];
        for k in 0..=l / 2 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[l - 2 * k] = sign * binom(l, k) * binom(2 * l - 2 * k, l) / 2f64.powi(l as i32);
        }
        for _ in 0..m {
            coeffs = (1..coeffs.len()).map(|p| coeffs[p] * p as f64).collect();
        }
        let poly: f64 = coeffs.iter().enumerate().map(|(p, c)| c * x.powi(p as i32)).sum();
        let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * (1.0 - x * x).powf(m as f64 / 2.0) * poly
    }

    #[test]
    fn trivial_values() {
        assert_eq!(assoc_legendre(0, 0, 0.3).unwrap(), 1.0);
        for &x in &[-1.0, -0.4, 0.0, 0.7, 1.0] {
            assert_abs_diff_eq!(assoc_legendre(1, 0, x).unwrap(), x, epsilon = 1e-15);
        }
    }

    #[test]
    fn p21_matches_rodrigues() {
        let v = assoc_legendre(2, 1, 0.5).unwrap();
        // -3 x sqrt(1-x^2) at x = 1/2
        assert_abs_diff_eq!(v, -1.299_038_105_676_658, epsilon = 1e-14);
        assert_abs_diff_eq!(v, rodrigues(2, 1, 0.5), epsilon = 1e-14);
    }

    #[test]
    fn recurrence_matches_rodrigues_table() {
        for l in 0..=8 {
            for m in 0..=l {
                for &x in &[-0.93, -0.31, 0.0, 0.42, 0.88] {
                    let a = assoc_legendre(l, m, x).unwrap();
                    let b = rodrigues(l, m, x);
                    assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0), "l={l} m={m} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(assoc_legendre(2, 3, 0.1).is_err());
        assert!(assoc_legendre(2, 1, 1.01).is_err());
        assert!(spherical_harmonic(2, 3, 0.1, 0.2).is_err());
    }

    #[test]
    fn y00_is_constant() {
        let y = spherical_harmonic(0, 0, 1.1, 4.2).unwrap();
        assert_abs_diff_eq!(y.re, 1.0 / (4.0 * PI).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(y.im, 0.0);
    }

    #[test]
    fn conjugation_symmetry() {
        for l in 0..=6usize {
            for m in 0..=l as i32 {
                let (t, p) = (0.77, 2.31);
                let a = spherical_harmonic(l, -m, t, p).unwrap();
                let b = spherical_harmonic(l, m, t, p).unwrap().conj() * if m % 2 == 0 { 1.0 } else { -1.0 };
                assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-14);
                assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn y11_condon_shortley_sign() {
        // Y_11 = -sqrt(3/8π) sinθ e^{iφ}
        let y = spherical_harmonic(1, 1, PI / 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(y.re, -(3.0 / (8.0 * PI)).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn addition_theorem() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let t = rng.gen_range(0.0..PI);
            let p = rng.gen_range(0.0..2.0 * PI);
            for l in 0..=8usize {
                let s: f64 = (-(l as i32)..=l as i32).map(|m| ylm(l, m, t, p).norm_sqr()).sum();
                assert_abs_diff_eq!(s, (2 * l + 1) as f64 / (4.0 * PI), epsilon = 1e-12);
            }
        }
    }
}
