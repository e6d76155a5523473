//! Spin-s systems: spin matrices, irreducible tensor operators, the spin
//! kernel and the closed-form polarization and nematic operators.
//!
//! Basis order is `|s, s⟩, |s, s−1⟩, …, |s, −s⟩` throughout.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::{clebsch_gordan, wigner_d_matrix, ylm, EulerAngles, HalfInteger};
use crate::error::{Error, Result};
use crate::expansion::{Domain, QuadratureGrid};
use crate::quantum::{CMatrix, KernelField, OperatorTensor};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinSystem {
    s: HalfInteger,
}

impl SpinSystem {
    pub fn new(s: HalfInteger) -> Result<Self> {
        if s.twice() < 0 {
            return Err(Error::Domain(format!("negative spin {s}")));
        }
        Ok(Self { s })
    }

    pub fn s(&self) -> HalfInteger {
        self.s
    }

    pub fn dim(&self) -> usize {
        (self.s.twice() + 1) as usize
    }

    /// Casimir `s(s+1)`.
    pub fn casimir(&self) -> f64 {
        let s = self.s.value();
        s * (s + 1.0)
    }

    /// Largest rank with nonzero operators, `2s`.
    pub fn max_rank(&self) -> usize {
        self.s.twice() as usize
    }

    /// Basis vector `|s, m⟩` as an index.
    pub fn index(&self, m: HalfInteger) -> Result<usize> {
        crate::angular::check_projection(self.s, m)?;
        Ok(((self.s.twice() - m.twice()) / 2) as usize)
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `(S_x, S_y, S_z)` with `ħ = 1`.
pub fn spin_operators(s: HalfInteger) -> [CMatrix; 3] {
    let n = (s.twice() + 1) as usize;
    let sv = s.value();
    let m = |r: usize| sv - r as f64;
    let mut plus = DMatrix::zeros(n, n);
    for r in 1..n {
        // S+ |m⟩ = sqrt(s(s+1) − m(m+1)) |m+1⟩
        let mr = m(r);
        plus[(r - 1, r)] = c((sv * (sv + 1.0) - mr * (mr + 1.0)).sqrt());
    }
    let minus = plus.adjoint();
    let sx = (&plus + &minus) * c(0.5);
    let sy = (&plus - &minus) * Complex64::new(0.0, -0.5);
    let sz = DMatrix::from_fn(n, n, |r, col| if r == col { c(m(r)) } else { c(0.0) });
    [sx, sy, sz]
}

/// `T^(s)_lm = sqrt((2l+1)/(2s+1)) Σ C^{s n'}_{s n, l m} |s,n'⟩⟨s,n|`.
/// Zero when `l > 2s` or `|m| > l`.
pub fn tensor_operator(s: HalfInteger, l: usize, m: i32) -> CMatrix {
    let n = (s.twice() + 1) as usize;
    let mut out = DMatrix::zeros(n, n);
    if l > s.twice() as usize || m.unsigned_abs() as usize > l {
        return out;
    }
    let pref = ((2 * l + 1) as f64 / n as f64).sqrt();
    let (lh, mh) = (HalfInteger::from_int(l as i32), HalfInteger::from_int(m));
    let proj = s.projections();
    for (col, nn) in proj.enumerate() {
        let np = nn + mh;
        if np.twice().abs() > s.twice() {
            continue;
        }
        let row = ((s.twice() - np.twice()) / 2) as usize;
        let cg = clebsch_gordan(s, nn, lh, mh, s, np).expect("valid projections");
        out[(row, col)] = c(pref * cg);
    }
    out
}

/// Spin kernel `Δ(θ,φ) = sqrt(4π/(2s+1)) Σ_{l≤2s} Σ_m Y*_lm(θ,φ) T_lm` on
/// an S² grid, with `μ = (2s+1)/4π`.
pub fn spin_kernel(s: HalfInteger, grid: &QuadratureGrid) -> Result<KernelField> {
    if grid.domain() != Domain::S2 {
        return Err(Error::GridMismatch(format!("spin kernel needs an S2 grid, got {}", grid.domain())));
    }
    let sys = SpinSystem::new(s)?;
    let lmax = sys.max_rank();
    grid.require(2 * lmax)?;
    let n = sys.dim();
    let pref = (4.0 * PI / n as f64).sqrt();
    let ops: Vec<(usize, i32, CMatrix)> = (0..=lmax)
        .flat_map(|l| (-(l as i32)..=l as i32).map(move |m| (l, m)))
        .map(|(l, m)| (l, m, tensor_operator(s, l, m)))
        .collect();
    let nodes = grid
        .nodes()
        .iter()
        .map(|&[theta, phi, _]| {
            let mut acc = DMatrix::zeros(n, n);
            for (l, m, t) in &ops {
                acc += t * (ylm(*l, *m, theta, phi).conj() * pref);
            }
            acc
        })
        .collect();
    KernelField::new(grid.clone(), nodes, n as f64 / (4.0 * PI), lmax)
}

/// Spin-space representation `U(R) = D^s(α,β,γ)` of a rotation.
pub fn spin_rotation(s: HalfInteger, r: &Matrix3<f64>) -> CMatrix {
    wigner_d_matrix(s, &EulerAngles::from_matrix(r)).expect("non-negative spin")
}

/// `P̂_i = 3/sqrt(s(s+1)(2s+1)²) Ŝ_i`.
pub fn polarization_operator_closed(s: HalfInteger) -> OperatorTensor {
    let sys = SpinSystem { s };
    let n = sys.dim();
    if s.twice() == 0 {
        return OperatorTensor::zeros(3, 1, n).with_note("spin 0 carries no polarization");
    }
    let pref = 3.0 / (sys.casimir() * (n * n) as f64).sqrt();
    let entries = spin_operators(s).into_iter().map(|m| m * c(pref)).collect();
    OperatorTensor::new(3, 1, entries).expect("spin matrices are Hermitian")
}

/// `Q̂_ij = (15/2)/sqrt(s(s+1)(2s−1)(2s+1)²(2s+3)) (Ŝ_iŜ_j + Ŝ_jŜ_i − ⅔ s(s+1) δ_ij)`.
/// For `s < 1` the zero tensor is returned with a note.
pub fn nematic_operator_closed(s: HalfInteger) -> OperatorTensor {
    let sys = SpinSystem { s };
    let n = sys.dim();
    if s.twice() < 2 {
        return OperatorTensor::zeros(3, 2, n)
            .with_note(format!("no nematic order for spin-{s}: the spin kernel stops at rank 2s < 2"));
    }
    let sv = s.value();
    let pref = 7.5 / (sys.casimir() * (2.0 * sv - 1.0) * (n * n) as f64 * (2.0 * sv + 3.0)).sqrt();
    let sm = spin_operators(s);
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut entries = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            let mut e = &sm[i] * &sm[j] + &sm[j] * &sm[i];
            if i == j {
                e -= &id * c(2.0 / 3.0 * sys.casimir());
            }
            entries.push(e * c(pref));
        }
    }
    OperatorTensor::new(3, 2, entries).expect("closed form satisfies the invariants")
}
