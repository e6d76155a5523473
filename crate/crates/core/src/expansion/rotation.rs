//! Expansion of functions on SO(3) in products of rotation-matrix entries,
//! `f(R) ≈ Σ_l c^(l)_{i1 j1 … il jl} R_{i1 j1} ⋯ R_{il jl}`, with each
//! coefficient symmetric traceless in the `i` indices and, separately, in the
//! `j` indices.
//!
//! The rank-l functions are spanned by `e_a · R^{⊗l} e_b` for an orthonormal
//! basis `{e_a}` of rank-l harmonic tensors, so the coefficients are obtained
//! by weighted least squares in that `(2l+1)²`-dimensional space.

use nalgebra::{DMatrix, DVector, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::QuadratureGrid;
use crate::error::{Error, Result};
use crate::tensor::{harmonic_basis, Tensor};

/// Dense `3^l × 3^l` coefficient; row multi-index `(i1…il)`, column `(j1…jl)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationCoefficient {
    rank: usize,
    data: Vec<f64>,
}

impl RotationCoefficient {
    pub fn new(rank: usize, data: Vec<f64>) -> Result<Self> {
        let n = 3usize.pow(rank as u32);
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Ok(Self { rank, data })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn side(&self) -> usize {
        3usize.pow(self.rank as u32)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: &[usize], j: &[usize]) -> f64 {
        let flat = |idx: &[usize]| idx.iter().fold(0, |acc, &x| acc * 3 + x);
        self.data[flat(i) * self.side() + flat(j)]
    }

    /// The rank-2l tensor with index order `(i1…il, j1…jl)`.
    pub fn as_tensor(&self) -> Tensor {
        Tensor::from_vec(3, 2 * self.rank, self.data.clone()).expect("size checked at construction")
    }

    /// `c · R^{⊗l}`, contracting one `(i_k, j_k)` pair at a time.
    pub fn evaluate(&self, r: &Matrix3<f64>) -> f64 {
        let mut cur = self.data.clone();
        let mut n = self.side();
        while n > 1 {
            let m = n / 3;
            let mut next = vec![0.0; m * m];
            for ip in 0..m {
                for jp in 0..m {
                    let mut acc = 0.0;
                    for a in 0..3 {
                        let row = (ip * 3 + a) * n + jp * 3;
                        for b in 0..3 {
                            acc += cur[row + b] * r[(a, b)];
                        }
                    }
                    next[ip * m + jp] = acc;
                }
            }
            cur = next;
            n = m;
        }
        cur[0]
    }

    /// Largest violation of symmetry or tracelessness within the row indices
    /// or within the column indices.
    pub fn invariant_defect(&self) -> f64 {
        let n = self.side();
        let mut worst = 0.0f64;
        for j in 0..n {
            let col: Vec<f64> = (0..n).map(|i| self.data[i * n + j]).collect();
            let t = Tensor::from_vec(3, self.rank, col).expect("size");
            worst = worst.max(t.symmetry_defect()).max(t.trace_defect());
        }
        for i in 0..n {
            let t = Tensor::from_vec(3, self.rank, self.data[i * n..(i + 1) * n].to_vec()).expect("size");
            worst = worst.max(t.symmetry_defect()).max(t.trace_defect());
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

fn row_major(r: &Matrix3<f64>) -> [f64; 9] {
    std::array::from_fn(|k| r[(k / 3, k % 3)])
}

pub(crate) fn least_squares(grid: &QuadratureGrid, samples: &[f64], band_limit: usize) -> Result<Vec<RotationCoefficient>> {
    let bases: Vec<Vec<Tensor>> =
        (0..=band_limit).map(|l| harmonic_basis(l).into_iter().map(|b| b.into_tensor()).collect()).collect();
    let width: usize = (0..=band_limit).map(|l| (2 * l + 1) * (2 * l + 1)).sum();

    let rows: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let r = row_major(&grid.rotation(k));
            let mut row = Vec::with_capacity(width);
            for basis in &bases {
                let rotated: Vec<Tensor> = basis.iter().map(|e| e.rotate(&r)).collect();
                for ea in basis {
                    for rb in &rotated {
                        row.push(ea.dot(rb));
                    }
                }
            }
            row
        })
        .collect();

    let phi = DMatrix::from_fn(grid.len(), width, |k, c| rows[k][c]);
    let w = DVector::from_column_slice(grid.weights());
    let weighted = DMatrix::from_fn(grid.len(), width, |k, c| phi[(k, c)] * w[k]);
    let gram = phi.transpose() * &weighted;
    let rhs = weighted.transpose() * DVector::from_column_slice(samples);
    let chol = gram.cholesky().ok_or(Error::SingularGram)?;
    let x = chol.solve(&rhs);

    let mut out = Vec::with_capacity(band_limit + 1);
    let mut offset = 0;
    for (l, basis) in bases.iter().enumerate() {
        let n = 3usize.pow(l as u32);
        let mut data = vec![0.0; n * n];
        for (a, ea) in basis.iter().enumerate() {
            for (b, eb) in basis.iter().enumerate() {
                let coef = x[offset + a * basis.len() + b];
                for (i, &ei) in ea.data().iter().enumerate() {
                    if ei == 0.0 {
                        continue;
                    }
                    for (j, &ej) in eb.data().iter().enumerate() {
                        data[i * n + j] += coef * ei * ej;
                    }
                }
            }
        }
        offset += basis.len() * basis.len();
        out.push(RotationCoefficient { rank: l, data });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{wigner_D, EulerAngles, HalfInteger};
    use crate::expansion::{build_grid, expand_rotation, reconstruct, Domain, Point};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    /// Real band-limited test function built from Wigner D-functions, an
    /// independent route to the same function space.
    fn random_wigner_function(rng: &mut impl Rng, l_max: usize) -> impl Fn(&EulerAngles) -> f64 {
        let mut terms = Vec::new();
        for l in 0..=l_max as i32 {
            for m in -l..=l {
                for n in -l..=l {
                    terms.push((l, m, n, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
            }
        }
        move |e| {
            terms
                .iter()
                .map(|&(l, m, n, c)| {
                    let h = HalfInteger::from_int;
                    (c * wigner_D(h(l), h(m), h(n), e).unwrap()).re
                })
                .sum()
        }
    }

    #[test]
    fn entry_function_recovered() {
        let g = build_grid(Domain::SO3, 4).unwrap();
        let samples: Vec<f64> = (0..g.len()).map(|k| g.rotation(k)[(0, 2)]).collect();
        let r = expand_rotation(&g, &samples, 2).unwrap();
        let c1 = r.rotation(1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if (i, j) == (0, 2) { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(c1.get(&[i], &[j]), expected, epsilon = 1e-12);
            }
        }
        assert!(r.rotation(0).unwrap().max_abs() < 1e-12);
        assert!(r.rotation(2).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn random_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for l in 0..=4 {
            let f = random_wigner_function(&mut rng, l);
            let g = build_grid(Domain::SO3, 2 * l).unwrap();
            let samples: Vec<f64> = (0..g.len()).map(|k| f(&g.euler(k))).collect();
            let r = expand_rotation(&g, &samples, l).unwrap();
            assert!(r.residual < 1e-10, "L={l}: {}", r.residual);
            for rank in 0..=l {
                assert!(r.rotation(rank).unwrap().invariant_defect() < 1e-10);
            }
            for _ in 0..10 {
                let e = EulerAngles::new(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI))
                    .unwrap();
                let v = reconstruct(&r, &Point::Rotation(e.to_matrix())).unwrap();
                assert_abs_diff_eq!(v, f(&e), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn evaluate_matches_tensor_contraction() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let data: Vec<f64> = (0..81).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = RotationCoefficient::new(2, data).unwrap();
        let r = EulerAngles::new(0.3, 1.1, 2.0).unwrap().to_matrix();
        let mut expected = 0.0;
        for i in 0..3 {
            for k in 0..3 {
                for j in 0..3 {
                    for l in 0..3 {
                        expected += c.get(&[i, k], &[j, l]) * r[(i, j)] * r[(k, l)];
                    }
                }
            }
        }
        assert_abs_diff_eq!(c.evaluate(&r), expected, epsilon = 1e-13);
    }
}
