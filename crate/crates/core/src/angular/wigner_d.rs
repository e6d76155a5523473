//! Euler angles (z-y-z) and Wigner rotation matrices.
//!
//! `D^j_{m'm}(α, β, γ) = ⟨j m'| e^{-iαJz} e^{-iβJy} e^{-iγJz} |j m⟩
//!                      = e^{-im'α} d^j_{m'm}(β) e^{-imγ}`,
//! which represents the active rotation `R = Rz(α) Ry(β) Rz(γ)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::half_integer::{check_projection, HalfInteger};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    /// Wraps `alpha` and `gamma` into `[0, 2π)`; `beta` must lie in `[0, π]`.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&beta) {
            return Err(Error::Domain(format!("euler beta = {beta} outside [0, π]")));
        }
        Ok(EulerAngles { alpha: wrap(alpha), beta, gamma: wrap(gamma) })
    }

    pub fn identity() -> Self {
        EulerAngles { alpha: 0.0, beta: 0.0, gamma: 0.0 }
    }

    /// `Rz(α) Ry(β) Rz(γ)`.
    pub fn to_matrix(&self) -> Matrix3<f64> {
        rot_z(self.alpha) * rot_y(self.beta) * rot_z(self.gamma)
    }

    /// Inverse of [`to_matrix`](Self::to_matrix). At `β ∈ {0, π}` the
    /// decomposition is degenerate and `γ = 0` is chosen.
    pub fn from_matrix(r: &Matrix3<f64>) -> Self {
        let cb = r[(2, 2)].clamp(-1.0, 1.0);
        let beta = cb.acos();
        let sb = beta.sin();
        let (alpha, gamma) = if sb > 1e-12 {
            (r[(1, 2)].atan2(r[(0, 2)]), r[(2, 1)].atan2(-r[(2, 0)]))
        } else if cb > 0.0 {
            (r[(1, 0)].atan2(r[(0, 0)]), 0.0)
        } else {
            ((-r[(1, 0)]).atan2(-r[(0, 0)]), 0.0)
        };
        EulerAngles { alpha: wrap(alpha), beta, gamma: wrap(gamma) }
    }
}

fn wrap(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

pub fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn rot_y(b: f64) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn factorial_f64(n: i32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// Wigner small-d `d^j_{m'm}(β)` by the explicit Wigner sum.
pub fn wigner_small_d(j: HalfInteger, mp: HalfInteger, m: HalfInteger, beta: f64) -> Result<f64> {
    check_projection(j, mp)?;
    check_projection(j, m)?;
    Ok(small_d(j.twice(), mp.twice(), m.twice(), beta))
}

pub(crate) fn small_d(tj: i32, tmp: i32, tm: i32, beta: f64) -> f64 {
    let jpmp = (tj + tmp) / 2;
    let jmmp = (tj - tmp) / 2;
    let jpm = (tj + tm) / 2;
    let jmm = (tj - tm) / 2;
    let mpmm = (tmp - tm) / 2;
    let pref = (factorial_f64(jpmp) * factorial_f64(jmmp) * factorial_f64(jpm) * factorial_f64(jmm)).sqrt();
    let (s, c) = (beta / 2.0).sin_cos();
    let k_min = 0.max(-mpmm);
    let k_max = jpm.min(jmmp);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let sign = if (mpmm + k) % 2 == 0 { 1.0 } else { -1.0 };
        let cos_pow = tj - 2 * k - mpmm; // 2j + m - m' - 2k
        let sin_pow = mpmm + 2 * k;
        let den = factorial_f64(jpm - k) * factorial_f64(k) * factorial_f64(mpmm + k) * factorial_f64(jmmp - k);
        sum += sign * c.powi(cos_pow) * s.powi(sin_pow) / den;
    }
    pref * sum
}

/// `D^j_{m'm}(α, β, γ)`.
#[allow(non_snake_case)]
pub fn wigner_D(j: HalfInteger, mp: HalfInteger, m: HalfInteger, angles: &EulerAngles) -> Result<Complex64> {
    check_projection(j, mp)?;
    check_projection(j, m)?;
    Ok(big_d(j.twice(), mp.twice(), m.twice(), angles))
}

fn big_d(tj: i32, tmp: i32, tm: i32, a: &EulerAngles) -> Complex64 {
    let phase = -(f64::from(tmp) * a.alpha + f64::from(tm) * a.gamma) / 2.0;
    Complex64::from_polar(small_d(tj, tmp, tm, a.beta), phase)
}

/// Full `(2j+1)×(2j+1)` representation matrix, rows/columns ordered by
/// descending projection `j, j-1, …, -j`.
pub fn wigner_d_matrix(j: HalfInteger, angles: &EulerAngles) -> Result<DMatrix<Complex64>> {
    if j.twice() < 0 {
        return Err(Error::Index(format!("negative angular momentum j = {j}")));
    }
    let tj = j.twice();
    let n = (tj + 1) as usize;
    Ok(DMatrix::from_fn(n, n, |r, c| big_d(tj, tj - 2 * r as i32, tj - 2 * c as i32, angles)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn random_angles(rng: &mut impl Rng) -> EulerAngles {
        EulerAngles::new(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap()
    }

    #[test]
    fn j_zero_is_one() {
        let a = EulerAngles::new(0.3, 1.2, 4.0).unwrap();
        let d = wigner_D(HalfInteger::ZERO, HalfInteger::ZERO, HalfInteger::ZERO, &a).unwrap();
        assert_abs_diff_eq!(d.re, 1.0);
        assert_abs_diff_eq!(d.im, 0.0);
    }

    #[test]
    fn identity_rotation_is_delta() {
        for tj in 0..=6 {
            let m = wigner_d_matrix(HalfInteger::from_twice(tj), &EulerAngles::identity()).unwrap();
            let eye = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
            assert!((m - eye).norm() < 1e-15);
        }
    }

    #[test]
    fn spin_half_closed_form() {
        let h = HalfInteger::HALF;
        let b = 0.8;
        assert_abs_diff_eq!(wigner_small_d(h, h, h, b).unwrap(), (b / 2.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(wigner_small_d(h, h, -h, b).unwrap(), -(b / 2.0).sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(wigner_small_d(h, -h, h, b).unwrap(), (b / 2.0).sin(), epsilon = 1e-15);
    }

    #[test]
    fn j_one_matches_rotation_of_y1m() {
        // d^1_{00}(β) = cos β, d^1_{10} = -sin β / √2
        let one = HalfInteger::ONE;
        let b = 1.1;
        assert_abs_diff_eq!(wigner_small_d(one, HalfInteger::ZERO, HalfInteger::ZERO, b).unwrap(), b.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(wigner_small_d(one, one, HalfInteger::ZERO, b).unwrap(), -b.sin() / 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn unitarity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for tj in 0..=8 {
            for _ in 0..5 {
                let d = wigner_d_matrix(HalfInteger::from_twice(tj), &random_angles(&mut rng)).unwrap();
                let prod = &d * d.adjoint();
                let eye = DMatrix::<Complex64>::identity(d.nrows(), d.ncols());
                assert!((prod - eye).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn composition() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for tj in 0..=6 {
            let j = HalfInteger::from_twice(tj);
            for _ in 0..10 {
                let a1 = random_angles(&mut rng);
                let a2 = random_angles(&mut rng);
                let r12 = EulerAngles::from_matrix(&(a1.to_matrix() * a2.to_matrix()));
                let lhs = wigner_d_matrix(j, &a1).unwrap() * wigner_d_matrix(j, &a2).unwrap();
                let rhs = wigner_d_matrix(j, &r12).unwrap();
                // half-integer j: D(R) is double-valued, sign may flip
                let err = (&lhs - &rhs).norm().min((&lhs + &rhs).norm());
                if tj % 2 == 0 {
                    assert!((lhs - rhs).norm() < 1e-10);
                } else {
                    assert!(err < 1e-10);
                }
            }
        }
    }

    #[test]
    fn euler_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let a = random_angles(&mut rng);
            let back = EulerAngles::from_matrix(&a.to_matrix());
            assert!((back.to_matrix() - a.to_matrix()).norm() < 1e-12);
        }
        assert!(EulerAngles::new(0.0, 3.5, 0.0).is_err());
    }

    #[test]
    fn invalid_projection_rejected() {
        let a = EulerAngles::identity();
        assert!(wigner_D(HalfInteger::ONE, HalfInteger::from_twice(4), HalfInteger::ZERO, &a).is_err());
        assert!(wigner_D(HalfInteger::ONE, HalfInteger::HALF, HalfInteger::ZERO, &a).is_err());
    }
}
