use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::angular::EulerAngles;
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    S1,
    S2,
    SO3,
}

impl Domain {
    /// Total measure: 2π, 4π, 8π².
    pub fn volume(self) -> f64 {
        match self {
            Domain::S1 => 2.0 * PI,
            Domain::S2 => 4.0 * PI,
            Domain::SO3 => 8.0 * PI * PI,
        }
    }

    /// Number of angles per node.
    pub fn arity(self) -> usize {
        match self {
            Domain::S1 => 1,
            Domain::S2 => 2,
            Domain::SO3 => 3,
        }
    }

    pub fn angle_names(self) -> &'static [&'static str] {
        match self {
            Domain::S1 => &["phi"],
            Domain::S2 => &["theta", "phi"],
            Domain::SO3 => &["alpha", "beta", "gamma"],
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::S1 => "S1",
            Domain::S2 => "S2",
            Domain::SO3 => "SO3",
        })
    }
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Domain::S1),
            "S2" => Ok(Domain::S2),
            "SO3" | "SO(3)" => Ok(Domain::SO3),
            _ => Err(Error::Parse(format!("unknown domain {s:?} (expected S1, S2 or SO3)"))),
        }
    }
}

/// Quadrature rule on S¹, S² or SO(3) that integrates every function of
/// band-limit `≤ band_limit` exactly.
///
/// Node angles: S¹ `[φ]`, S² `[θ, φ]`, SO(3) z-y-z Euler `[α, β, γ]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    domain: Domain,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    band_limit: usize,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(z) and P_n'(z) by recurrence
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

impl QuadratureGrid {
    /// Build an exact grid for band-limit `band_limit`.
    ///
    /// S¹: `2L+1` uniform nodes. S²: `⌊L/2⌋+1` Gauss-Legendre nodes in
    /// `cos θ` × `L+1` uniform `φ`. SO(3): Gauss-Legendre in `cos β` ×
    /// uniform `α` and `γ`, same counts.
    pub fn build(domain: Domain, band_limit: usize) -> Result<Self> {
        let l = band_limit;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        match domain {
            Domain::S1 => {
                let n = 2 * l + 1;
                for k in 0..n {
                    nodes.push([2.0 * PI * k as f64 / n as f64, 0.0, 0.0]);
                    weights.push(2.0 * PI / n as f64);
                }
            }
            Domain::S2 => {
                let (x, w) = gauss_legendre(l / 2 + 1);
                let nphi = l + 1;
                for (xi, wi) in x.iter().zip(&w) {
                    let theta = xi.clamp(-1.0, 1.0).acos();
                    for k in 0..nphi {
                        nodes.push([theta, 2.0 * PI * k as f64 / nphi as f64, 0.0]);
                        weights.push(wi * 2.0 * PI / nphi as f64);
                    }
                }
            }
            Domain::SO3 => {
                let (x, w) = gauss_legendre(l / 2 + 1);
                let n = l + 1;
                let step = 2.0 * PI / n as f64;
                for a in 0..n {
                    for (xi, wi) in x.iter().zip(&w) {
                        let beta = xi.clamp(-1.0, 1.0).acos();
                        for g in 0..n {
                            nodes.push([a as f64 * step, beta, g as f64 * step]);
                            weights.push(wi * step * step);
                        }
                    }
                }
            }
        }
        Ok(QuadratureGrid { domain, nodes, weights, band_limit })
    }

    /// Assemble a grid from explicit nodes (e.g. imported from CSV). The
    /// declared band-limit is taken on trust; weights must be positive and
    /// sum to the domain volume within `1e-9` relative.
    pub fn from_parts(domain: Domain, nodes: Vec<[f64; 3]>, weights: Vec<f64>, band_limit: usize) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: nodes.len(), found: weights.len() });
        }
        if nodes.is_empty() {
            return Err(Error::GridMismatch("grid has no nodes".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::GridMismatch(format!("non-positive weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - domain.volume()).abs() > 1e-9 * domain.volume() {
            return Err(Error::GridMismatch(format!(
                "weights sum to {total}, expected {} for {domain}",
                domain.volume()
            )));
        }
        Ok(QuadratureGrid { domain, nodes, weights, band_limit })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Orientation vector at node `k` (S¹: `(cos φ, sin φ)`; S²: spherical).
    pub fn unit_vector(&self, k: usize) -> Vec<f64> {
        let [a, b, _] = self.nodes[k];
        match self.domain {
            Domain::S1 => vec![a.cos(), a.sin()],
            Domain::S2 => {
                let (st, ct) = a.sin_cos();
                vec![st * b.cos(), st * b.sin(), ct]
            }
            Domain::SO3 => panic!("unit_vector called on an SO(3) grid"),
        }
    }

    pub fn euler(&self, k: usize) -> EulerAngles {
        let [a, b, g] = self.nodes[k];
        EulerAngles { alpha: a, beta: b, gamma: g }
    }

    /// Rotation matrix at node `k` of an SO(3) grid.
    pub fn rotation(&self, k: usize) -> Matrix3<f64> {
        assert_eq!(self.domain, Domain::SO3, "rotation called on a non-SO(3) grid");
        self.euler(k).to_matrix()
    }

    /// Require exactness for band-limit `needed`.
    pub fn require(&self, needed: usize) -> Result<()> {
        if self.band_limit < needed {
            Err(Error::InsufficientGrid { required: needed, available: self.band_limit })
        } else {
            Ok(())
        }
    }

    /// `Σ_k w_k f(k)` in node order.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            acc += w * f(k);
        }
        acc
    }
}

/// Free-function form of [`QuadratureGrid::build`].
pub fn build_grid(domain: Domain, band_limit: usize) -> Result<QuadratureGrid> {
    QuadratureGrid::build(domain, band_limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{wigner_D, HalfInteger};
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p + 1) as f64 };
                assert_abs_diff_eq!(q, exact, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn circle_rule() {
        let g = build_grid(Domain::S1, 2).unwrap();
        assert!(g.len() >= 5);
        for w in g.weights() {
            assert_abs_diff_eq!(*w, 2.0 * PI / g.len() as f64);
        }
    }

    #[test]
    fn volumes() {
        for d in [Domain::S1, Domain::S2, Domain::SO3] {
            for l in 0..=8 {
                let g = build_grid(d, l).unwrap();
                assert_abs_diff_eq!(g.total_weight(), d.volume(), epsilon = 1e-12 * d.volume());
            }
        }
    }

    #[test]
    fn s2_exactness_for_harmonics() {
        for lg in 0..=10 {
            let g = build_grid(Domain::S2, lg).unwrap();
            for l in 0..=lg {
                for m in -(l as i32)..=l as i32 {
                    let re = g.integrate(|k| crate::angular::ylm(l, m, g.nodes()[k][0], g.nodes()[k][1]).re);
                    let im = g.integrate(|k| crate::angular::ylm(l, m, g.nodes()[k][0], g.nodes()[k][1]).im);
                    let exact = if l == 0 { (4.0 * PI).sqrt() } else { 0.0 };
                    assert_abs_diff_eq!(re, exact, epsilon = 1e-13);
                    assert_abs_diff_eq!(im, 0.0, epsilon = 1e-13);
                }
            }
        }
        let g = build_grid(Domain::S2, 4).unwrap();
        let y43 = g.integrate(|k| crate::angular::ylm(4, 3, g.nodes()[k][0], g.nodes()[k][1]).norm());
        assert!(y43 > 0.0);
        let v = g.integrate(|k| crate::angular::ylm(4, 3, g.nodes()[k][0], g.nodes()[k][1]).re);
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn so3_exactness_for_d_functions() {
        let g = build_grid(Domain::SO3, 4).unwrap();
        for tl in (0..=8).step_by(2) {
            let j = HalfInteger::from_twice(tl);
            for tm in (-tl..=tl).step_by(2) {
                for tn in (-tl..=tl).step_by(2) {
                    let (mut re, mut im) = (0.0, 0.0);
                    for k in 0..g.len() {
                        let d = wigner_D(j, HalfInteger::from_twice(tm), HalfInteger::from_twice(tn), &g.euler(k)).unwrap();
                        re += g.weights()[k] * d.re;
                        im += g.weights()[k] * d.im;
                    }
                    let exact = if tl == 0 { 8.0 * PI * PI } else { 0.0 };
                    assert_abs_diff_eq!(re, exact, epsilon = 1e-12);
                    assert_abs_diff_eq!(im, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn from_parts_validates() {
        let g = build_grid(Domain::S2, 3).unwrap();
        assert!(QuadratureGrid::from_parts(Domain::S2, g.nodes().to_vec(), g.weights().to_vec(), 3).is_ok());
        let mut bad = g.weights().to_vec();
        bad[0] *= 2.0;
        assert!(QuadratureGrid::from_parts(Domain::S2, g.nodes().to_vec(), bad, 3).is_err());
    }

    #[test]
    fn insufficient_grid_rejected() {
        let g = build_grid(Domain::S2, 3).unwrap();
        assert!(g.require(3).is_ok());
        assert!(matches!(g.require(4), Err(Error::InsufficientGrid { required: 4, available: 3 })));
    }
}
