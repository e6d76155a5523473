//! Independent reference computations used by the verification suite.
//!
//! Each oracle takes a different numerical route from the production code
//! it checks: dense Cartesian grids instead of polar quadrature, partial
//! traces instead of lifted operators, Wigner-D sums instead of monomials.

use rayon::prelude::*;

use crate::fermi::{fermi_symbol, FermiMode, Profile};
use crate::tensor::Tensor;

/// Rank-l Fermi order parameter by the midpoint rule on an `n × n`
/// Cartesian grid over `[−P, P]²` (`n` even, so the origin is a cell
/// corner and never sampled).
pub fn fermi_cartesian(profile: &Profile, rank: usize, mode: FermiMode, p_f: f64, n: usize) -> Tensor {
    assert!(n.is_multiple_of(2), "cell count must be even");
    let p_max = profile.extent();
    let h = 2.0 * p_max / n as f64;
    let rows: Vec<(Tensor, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = -p_max + (i as f64 + 0.5) * h;
            let mut acc = Tensor::zeros(2, rank);
            let mut norm = 0.0;
            for j in 0..n {
                let y = -p_max + (j as f64 + 0.5) * h;
                let occ = profile.occupation([x, y]);
                if occ == 0.0 {
                    continue;
                }
                acc.add_scaled(&fermi_symbol(rank, [x, y], mode, p_f), occ);
                norm += occ;
            }
            (acc, norm)
        })
        .collect();
    let mut acc = Tensor::zeros(2, rank);
    let mut norm = 0.0;
    for (t, w) in &rows {
        acc.add_scaled(t, 1.0);
        norm += w;
    }
    acc.scale(1.0 / norm)
}

/// Mean-resultant factor `a(κ)` with `E[R] = a(κ) R₀` for the density
/// `∝ exp(κ tr(R₀ᵀR))`. Reduced to the rotation angle ω, whose Haar
/// marginal is `(1 − cos ω)/π` on `[0, π]`, and integrated by
/// Gauss-Legendre: `a = E[1 + 2cos ω]/3`.
pub fn vmf_mean_factor(kappa: f64) -> f64 {
    let (x, w) = crate::expansion::gauss_legendre(400);
    let (mut num, mut den) = (0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let omega = 0.5 * std::f64::consts::PI * (xi + 1.0);
        let c = omega.cos();
        let weight = wi * (1.0 - c) * (2.0 * kappa * (c - 1.0)).exp();
        num += weight * (1.0 + 2.0 * c);
        den += weight;
    }
    num / den / 3.0
}
