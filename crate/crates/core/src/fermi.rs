//! Two-dimensional Fermi-liquid nematicity.
//!
//! Expectation values are evaluated at symbol level on a polar momentum grid:
//! `⟨T̂_l⟩ = ∫d²p n(p) σ_l(p) / ∫d²p n(p)`, with
//! `σ_l = (2π)² g_l(u)` (exact) or `σ_l = (2π)² (p/p_F)^l g_l(u)` (Fermi
//! surface approximation), `g_0 = 1`, `g_l = 2^{l−1} T^(2,l)(u)`; rank 2 is
//! `2u_iu_j − δ_ij`. Dividing by the particle number is the one-particle
//! normalisation of the many-particle order parameter.
//!
//! The operator itself appears only as a finite-difference stencil
//! ([`apply_nematic_stencil`]).

use std::f64::consts::PI;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::gauss_legendre;
use crate::tensor::{tensor_polynomial_unchecked, SymmetricTracelessTensor, Tensor};

const TWO_PI_SQ: f64 = 4.0 * PI * PI;

/// Default edge width of analytic profiles, in units of the elliptic radius.
pub const DEFAULT_SMEAR: f64 = 0.05;

/// Default occupation threshold for the Fermi momentum.
pub const PF_THRESHOLD: f64 = 0.5;

/// Analytic occupation `n(p) = 1/(1 + exp((ρ(p) − 1)/smear))`, where `ρ` is
/// the elliptic radius (`ρ = |p|/p_F` for a disk). `smear = 0` gives a
/// sharp step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Disk { p_f: f64, smear: f64 },
    /// Semi-axis `a` along the direction at angle `chi` from x, `b` across it.
    Ellipse { a: f64, b: f64, chi: f64, smear: f64 },
}

impl Profile {
    fn axes(&self) -> (f64, f64, f64, f64) {
        match *self {
            Profile::Disk { p_f, smear } => (p_f, p_f, 0.0, smear),
            Profile::Ellipse { a, b, chi, smear } => (a, b, chi, smear),
        }
    }

    pub fn elliptic_radius(&self, p: [f64; 2]) -> f64 {
        let (a, b, chi, _) = self.axes();
        let (s, c) = chi.sin_cos();
        let along = c * p[0] + s * p[1];
        let across = -s * p[0] + c * p[1];
        ((along / a).powi(2) + (across / b).powi(2)).sqrt()
    }

    pub fn occupation(&self, p: [f64; 2]) -> f64 {
        let rho = self.elliptic_radius(p);
        let smear = self.axes().3;
        if smear == 0.0 {
            return match rho.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => 1.0,
                Some(std::cmp::Ordering::Equal) => 0.5,
                _ => 0.0,
            };
        }
        let x = (rho - 1.0) / smear;
        if x > 40.0 {
            0.0
        } else {
            1.0 / (1.0 + x.exp())
        }
    }

    /// Radius beyond which the occupation is below `e^{-40}`.
    pub fn extent(&self) -> f64 {
        let (a, b, _, smear) = self.axes();
        let r = a.max(b);
        if smear == 0.0 {
            1.25 * r
        } else {
            r * (1.0 + 40.0 * smear)
        }
    }

    /// Radii where the occupation changes abruptly in every direction.
    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Profile::Disk { p_f, smear: 0.0 } => vec![p_f],
            _ => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b, chi, smear) = self.axes();
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) || !chi.is_finite() || !(smear >= 0.0) {
            return Err(Error::Parse(format!("invalid occupation profile {self}")));
        }
        Ok(())
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Disk { p_f, smear } => write!(f, "disk:{p_f},{smear}"),
            Profile::Ellipse { a, b, chi, smear } => write!(f, "ellipse:{a},{b},{chi},{smear}"),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    /// `disk:pF[,smear]` or `ellipse:a,b,chi[,smear]`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = args
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?} in profile {s:?}"))))
            .collect::<Result<_>>()?;
        let p = match (kind, nums.as_slice()) {
            ("disk", [p_f]) => Profile::Disk { p_f: *p_f, smear: DEFAULT_SMEAR },
            ("disk", [p_f, smear]) => Profile::Disk { p_f: *p_f, smear: *smear },
            ("ellipse", [a, b, chi]) => Profile::Ellipse { a: *a, b: *b, chi: *chi, smear: DEFAULT_SMEAR },
            ("ellipse", [a, b, chi, smear]) => Profile::Ellipse { a: *a, b: *b, chi: *chi, smear: *smear },
            _ => {
                return Err(Error::Parse(format!(
                    "unknown profile {s:?} (expected disk:pF[,smear] or ellipse:a,b,chi[,smear])"
                )))
            }
        };
        p.validate()?;
        Ok(p)
    }
}

/// Resolution of a polar momentum grid: `radial_panels` Gauss-Legendre
/// panels of `radial_order` nodes each, times `angular` uniform angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarGridSpec {
    pub radial_panels: usize,
    pub radial_order: usize,
    pub angular: usize,
}

impl Default for PolarGridSpec {
    fn default() -> Self {
        Self { radial_panels: 32, radial_order: 8, angular: 128 }
    }
}

/// Occupation numbers on a polar grid `(p_i, φ_j)`, clipped to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumOccupation {
    radii: Vec<f64>,
    /// Radial quadrature weights including the Jacobian `p`.
    radial_weights: Vec<f64>,
    angles: Vec<f64>,
    /// Row-major: `values[i * angles.len() + j]`.
    values: Vec<f64>,
}

impl MomentumOccupation {
    /// Build from explicit samples. Angles must be uniform on `[0, 2π)`.
    pub fn new(radii: Vec<f64>, radial_weights: Vec<f64>, angles: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != radial_weights.len() {
            return Err(Error::DimensionMismatch { expected: radii.len(), found: radial_weights.len() });
        }
        if values.len() != radii.len() * angles.len() {
            return Err(Error::DimensionMismatch { expected: radii.len() * angles.len(), found: values.len() });
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.first().is_some_and(|&r| r < 0.0) {
            return Err(Error::GridMismatch("radial nodes must be non-negative and increasing".into()));
        }
        let na = angles.len();
        let step = 2.0 * PI / na.max(1) as f64;
        if angles.iter().enumerate().any(|(j, &a)| (a - angles[0] - j as f64 * step).abs() > 1e-9) {
            return Err(Error::GridMismatch("angular nodes must be uniform on [0, 2π)".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite occupation value".into()));
        }
        let values = values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let occ = Self { radii, radial_weights, angles, values };
        let n = occ.particle_density();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Invariant(format!("particle number must be finite and positive, got {n}")));
        }
        Ok(occ)
    }

    pub fn from_profile(profile: &Profile, spec: &PolarGridSpec) -> Result<Self> {
        profile.validate()?;
        if spec.radial_panels == 0 || spec.radial_order == 0 || spec.angular == 0 {
            return Err(Error::GridMismatch("polar grid needs at least one node in each direction".into()));
        }
        let p_max = profile.extent();
        let mut edges: Vec<f64> = (0..=spec.radial_panels).map(|k| p_max * k as f64 / spec.radial_panels as f64).collect();
        for b in profile.breakpoints() {
            if b > 0.0 && b < p_max && edges.iter().all(|e| (e - b).abs() > 1e-12 * p_max) {
                edges.push(b);
            }
        }
        edges.sort_by(f64::total_cmp);
        let (x, w) = gauss_legendre(spec.radial_order);
        let (mut radii, mut rw) = (Vec::new(), Vec::new());
        for e in edges.windows(2) {
            let (mid, half) = ((e[0] + e[1]) / 2.0, (e[1] - e[0]) / 2.0);
            for (xi, wi) in x.iter().zip(&w) {
                let p = mid + half * xi;
                radii.push(p);
                rw.push(wi * half * p);
            }
        }
        let angles: Vec<f64> = (0..spec.angular).map(|j| 2.0 * PI * j as f64 / spec.angular as f64).collect();
        let values = radii
            .iter()
            .flat_map(|&p| angles.iter().map(move |&a| profile.occupation([p * a.cos(), p * a.sin()])))
            .collect();
        Self::new(radii, rw, angles, values)
    }

    /// CSV with columns `p,phi,n` and an optional `weight` column (full
    /// 2D weight, Jacobian included). Without weights, the radial rule is
    /// the trapezoid rule on the given radii, times `p`, times `2π/N_φ`.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(input);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let col = |name: &str| header.iter().position(|h| h == name);
        let (Some(ip), Some(iphi), Some(inn)) = (col("p"), col("phi"), col("n")) else {
            return Err(Error::Parse(format!("occupation CSV needs columns p,phi,n; got {}", header.join(","))));
        };
        let iw = col("weight");
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let get = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse(format!("row {}: bad or missing field {}", line + 1, header[i])))
            };
            rows.push((get(ip)?, get(iphi)?, get(inn)?, iw.map(get).transpose()?));
        }
        let mut radii: Vec<f64> = rows.iter().map(|r| r.0).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        let mut angles: Vec<f64> = rows.iter().map(|r| r.1).collect();
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        let (nr, na) = (radii.len(), angles.len());
        if rows.len() != nr * na {
            return Err(Error::Parse(format!("occupation CSV is not a full {nr}×{na} polar grid ({} rows)", rows.len())));
        }
        let find = |v: &[f64], x: f64| v.iter().position(|&y| (y - x).abs() <= 1e-12 * y.abs().max(1.0));
        let mut values = vec![f64::NAN; nr * na];
        let mut weights = vec![None; nr];
        for &(p, phi, n, w) in &rows {
            let (i, j) = (find(&radii, p).expect("present"), find(&angles, phi).expect("present"));
            values[i * na + j] = n;
            if let Some(w) = w {
                weights[i] = Some(w * na as f64 / (2.0 * PI));
            }
        }
        let radial_weights = if weights.iter().all(Option::is_some) {
            weights.into_iter().map(Option::unwrap).collect()
        } else {
            (0..nr)
                .map(|i| {
                    let lo = if i == 0 { radii[0] } else { (radii[i - 1] + radii[i]) / 2.0 };
                    let hi = if i + 1 == nr { radii[i] } else { (radii[i] + radii[i + 1]) / 2.0 };
                    (hi - lo) * radii[i]
                })
                .collect()
        };
        Self::new(radii, radial_weights, angles, values)
    }

    /// Inverse of [`read_csv`](Self::read_csv), weights included.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p", "phi", "n", "weight"])?;
        for (i, p) in self.radii.iter().enumerate() {
            for (j, phi) in self.angles.iter().enumerate() {
                w.write_record(&[p.to_string(), phi.to_string(), self.value(i, j).to_string(), self.weight(i).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.angles.len() + j]
    }

    /// Full 2D weight of node `(i, j)`.
    pub fn weight(&self, i: usize) -> f64 {
        self.radial_weights[i] * 2.0 * PI / self.angles.len() as f64
    }

    /// `∫d²p/(2π)² n(p)`.
    pub fn particle_density(&self) -> f64 {
        (0..self.radii.len())
            .map(|i| self.weight(i) * (0..self.angles.len()).map(|j| self.value(i, j)).sum::<f64>())
            .sum::<f64>()
            / TWO_PI_SQ
    }

    /// Angular mean of `n` on radial shell `i`.
    pub fn angular_mean(&self, i: usize) -> f64 {
        let na = self.angles.len();
        self.values[i * na..(i + 1) * na].iter().sum::<f64>() / na as f64
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FermiMode {
    Exact,
    FermiSurface,
}

impl FromStr for FermiMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(FermiMode::Exact),
            "fermi_surface" | "fermi-surface" => Ok(FermiMode::FermiSurface),
            _ => Err(Error::Parse(format!("unknown Fermi mode {s:?} (exact | fermi_surface)"))),
        }
    }
}

/// Rank-l symbol `σ_l(p)` as a 2D tensor. `p_f` is used only in
/// Fermi-surface mode. At `p = 0` the direction is taken along x; the point
/// has measure zero.
pub fn fermi_symbol(rank: usize, p: [f64; 2], mode: FermiMode, p_f: f64) -> Tensor {
    let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let u = if r > 0.0 { [p[0] / r, p[1] / r] } else { [1.0, 0.0] };
    let g = if rank == 0 {
        1.0
    } else {
        2f64.powi(rank as i32 - 1)
    };
    let radial = match mode {
        FermiMode::Exact => 1.0,
        FermiMode::FermiSurface => (r / p_f).powi(rank as i32),
    };
    tensor_polynomial_unchecked(2, rank, &u).into_tensor().scale(TWO_PI_SQ * g * radial)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FermiOrderParameters {
    pub mode: FermiMode,
    pub p_f: Option<f64>,
    /// `∫d²p/(2π)² n(p)`.
    pub particle_density: f64,
    /// Ranks `0..=L`.
    pub tensors: Vec<SymmetricTracelessTensor>,
}

/// Rank-l expectation values for `l = 0..=band_limit`; Fermi-surface mode
/// estimates `p_F` with [`estimate_pf`].
pub fn fermi_order_parameters(occ: &MomentumOccupation, band_limit: usize, mode: FermiMode) -> Result<FermiOrderParameters> {
    let p_f = match mode {
        FermiMode::Exact => None,
        FermiMode::FermiSurface => Some(estimate_pf(occ)?),
    };
    order_parameters_inner(occ, band_limit, mode, p_f)
}

/// As [`fermi_order_parameters`] with a given Fermi momentum.
pub fn fermi_order_parameters_with_pf(
    occ: &MomentumOccupation,
    band_limit: usize,
    mode: FermiMode,
    p_f: f64,
) -> Result<FermiOrderParameters> {
    if !(p_f > 0.0) {
        return Err(Error::Domain(format!("Fermi momentum must be positive, got {p_f}")));
    }
    order_parameters_inner(occ, band_limit, mode, Some(p_f))
}

fn order_parameters_inner(
    occ: &MomentumOccupation,
    band_limit: usize,
    mode: FermiMode,
    p_f: Option<f64>,
) -> Result<FermiOrderParameters> {
    let na = occ.angles.len();
    if na < 2 * band_limit + 1 {
        return Err(Error::InsufficientGrid { required: 2 * band_limit + 1, available: na });
    }
    let pf = p_f.unwrap_or(1.0);
    let dirs: Vec<Vec<Tensor>> = (0..=band_limit)
        .map(|l| occ.angles.iter().map(|a| fermi_symbol(l, [a.cos(), a.sin()], FermiMode::Exact, 1.0)).collect())
        .collect();
    // One partial sum per radial shell, reduced in shell order.
    let shells: Vec<Vec<Tensor>> = (0..occ.radii.len())
        .into_par_iter()
        .map(|i| {
            let p = occ.radii[i];
            let w = occ.weight(i);
            (0..=band_limit)
                .map(|l| {
                    let radial = match mode {
                        FermiMode::Exact => 1.0,
                        FermiMode::FermiSurface => (p / pf).powi(l as i32),
                    };
                    let mut acc = Tensor::zeros(2, l);
                    for (j, d) in dirs[l].iter().enumerate() {
                        acc.add_scaled(d, w * radial * occ.value(i, j));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let norm: f64 = (0..occ.radii.len())
        .map(|i| occ.weight(i) * (0..na).map(|j| occ.value(i, j)).sum::<f64>())
        .sum();
    let tensors = (0..=band_limit)
        .map(|l| {
            let mut acc = Tensor::zeros(2, l);
            for shell in &shells {
                acc.add_scaled(&shell[l], 1.0);
            }
            let t = acc.scale(1.0 / norm);
            let tol = 1e-13 * t.max_abs().max(1.0);
            SymmetricTracelessTensor::new(t, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FermiOrderParameters { mode, p_f, particle_density: norm / TWO_PI_SQ, tensors })
}

/// Radius where the angular-mean occupation first drops through ½,
/// interpolated linearly between radial nodes.
pub fn estimate_pf(occ: &MomentumOccupation) -> Result<f64> {
    estimate_pf_threshold(occ, PF_THRESHOLD)
}

pub fn estimate_pf_threshold(occ: &MomentumOccupation, threshold: f64) -> Result<f64> {
    let means: Vec<f64> = (0..occ.radii.len()).map(|i| occ.angular_mean(i)).collect();
    if means.first().is_none_or(|&m| m < threshold) {
        return Err(Error::NoCrossing { threshold });
    }
    for i in 0..means.len() - 1 {
        let (m0, m1) = (means[i], means[i + 1]);
        if m0 >= threshold && m1 < threshold {
            let t = (m0 - threshold) / (m0 - m1);
            return Ok(occ.radii[i] + t * (occ.radii[i + 1] - occ.radii[i]));
        }
    }
    Err(Error::NoCrossing { threshold })
}

/// Complex field on a periodic `nx × ny` grid with spacings `hx`, `hy`;
/// `data[i * ny + j]` is the value at `(i hx, j hy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub data: Vec<Complex64>,
}

impl Field2D {
    /// Sample `f(x, y)` on the periodic box `[0, lx) × [0, ly)`.
    pub fn from_fn(nx: usize, ny: usize, lx: f64, ly: f64, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let (hx, hy) = (lx / nx as f64, ly / ny as f64);
        let data = (0..nx).flat_map(|i| (0..ny).map(move |j| (i, j))).map(|(i, j)| f(i as f64 * hx, j as f64 * hy)).collect();
        Self { nx, ny, hx, hy, data }
    }

    fn at(&self, i: isize, j: isize) -> Complex64 {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        self.data[(i.rem_euclid(nx) * ny + j.rem_euclid(ny)) as usize]
    }
}

/// `Q̂_xx ψ` and `Q̂_xy ψ` for `Q̂ = −(2π)²/p_F² [[∂x²−∂y², 2∂x∂y], [2∂x∂y, ∂y²−∂x²]]`,
/// second-order central differences on a periodic grid.
pub fn apply_nematic_stencil(psi: &Field2D, p_f: f64) -> Result<(Field2D, Field2D)> {
    if psi.nx < 4 || psi.ny < 4 {
        return Err(Error::Domain(format!("stencil grid {}×{} is too small (need ≥ 4×4)", psi.nx, psi.ny)));
    }
    if psi.data.len() != psi.nx * psi.ny {
        return Err(Error::DimensionMismatch { expected: psi.nx * psi.ny, found: psi.data.len() });
    }
    if !(p_f > 0.0) {
        return Err(Error::Domain(format!("Fermi momentum must be positive, got {p_f}")));
    }
    let pref = -TWO_PI_SQ / (p_f * p_f);
    let (hx2, hy2, hxy) = (psi.hx * psi.hx, psi.hy * psi.hy, 4.0 * psi.hx * psi.hy);
    let mut xx = Vec::with_capacity(psi.data.len());
    let mut xy = Vec::with_capacity(psi.data.len());
    for i in 0..psi.nx as isize {
        for j in 0..psi.ny as isize {
            let c = psi.at(i, j);
            let dxx = (psi.at(i + 1, j) - c * 2.0 + psi.at(i - 1, j)) / hx2;
            let dyy = (psi.at(i, j + 1) - c * 2.0 + psi.at(i, j - 1)) / hy2;
            let dxy = (psi.at(i + 1, j + 1) - psi.at(i + 1, j - 1) - psi.at(i - 1, j + 1) + psi.at(i - 1, j - 1)) / hxy;
            xx.push((dxx - dyy) * pref);
            xy.push(dxy * (2.0 * pref));
        }
    }
    let wrap = |data| Field2D { nx: psi.nx, ny: psi.ny, hx: psi.hx, hy: psi.hy, data };
    Ok((wrap(xx), wrap(xy)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn occ(profile: &str) -> MomentumOccupation {
        MomentumOccupation::from_profile(&profile.parse().unwrap(), &PolarGridSpec::default()).unwrap()
    }

    #[test]
    fn profile_parsing() {
        assert_eq!("disk:1.5".parse::<Profile>().unwrap(), Profile::Disk { p_f: 1.5, smear: DEFAULT_SMEAR });
        assert_eq!(
            "ellipse:1.2,1,0.3,0".parse::<Profile>().unwrap(),
            Profile::Ellipse { a: 1.2, b: 1.0, chi: 0.3, smear: 0.0 }
        );
        assert!("ellipse:1,2".parse::<Profile>().is_err());
        assert!("disk:-1".parse::<Profile>().is_err());
        assert!("square:1".parse::<Profile>().is_err());
    }

    #[test]
    fn isotropic_disk_has_no_order() {
        for smear in ["0", "0.05"] {
            let o = occ(&format!("disk:1.3,{smear}"));
            for mode in [FermiMode::Exact, FermiMode::FermiSurface] {
                let r = fermi_order_parameters(&o, 4, mode).unwrap();
                for t in &r.tensors[1..] {
                    assert!(t.tensor().max_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn sharp_disk_particle_number() {
        let o = occ("disk:1.0,0");
        assert_abs_diff_eq!(o.particle_density(), PI / TWO_PI_SQ, epsilon = 1e-13);
    }

    #[test]
    fn pf_of_disk() {
        let o = occ("disk:1.0,0");
        let step = o.radii().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        assert!((estimate_pf(&o).unwrap() - 1.0).abs() <= step / 2.0);
        let smooth = occ("disk:0.8");
        assert_abs_diff_eq!(estimate_pf(&smooth).unwrap(), 0.8, epsilon = 1e-4);
    }

    #[test]
    fn pf_no_crossing() {
        let empty = MomentumOccupation::new(vec![0.5, 1.0], vec![1.0, 1.0], vec![0.0, PI], vec![0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(empty, Err(Error::Invariant(_))));
        let full = MomentumOccupation::new(vec![0.5, 1.0], vec![1.0, 1.0], vec![0.0, PI], vec![1.0; 4]).unwrap();
        assert!(matches!(estimate_pf(&full), Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn ellipse_rotation_covariance() {
        let base = fermi_order_parameters(&occ("ellipse:1.2,1.0,0"), 2, FermiMode::Exact).unwrap();
        let q = base.tensors[2].tensor().get(&[0, 0]);
        assert!(q > 0.0);
        assert_abs_diff_eq!(base.tensors[2].tensor().get(&[0, 1]), 0.0, epsilon = 1e-12);
        for chi in [0.3f64, 1.1, 2.5] {
            let r = fermi_order_parameters(&occ(&format!("ellipse:1.2,1.0,{chi}")), 2, FermiMode::Exact).unwrap();
            let t = r.tensors[2].tensor();
            assert_abs_diff_eq!(t.get(&[0, 0]), q * (2.0 * chi).cos(), epsilon = 1e-9);
            assert_abs_diff_eq!(t.get(&[0, 1]), q * (2.0 * chi).sin(), epsilon = 1e-9);
            assert_abs_diff_eq!(t.get(&[0, 0]), -t.get(&[1, 1]), epsilon = 1e-13);
        }
    }

    #[test]
    fn needs_angular_resolution() {
        let o = MomentumOccupation::from_profile(
            &"disk:1".parse().unwrap(),
            &PolarGridSpec { radial_panels: 4, radial_order: 4, angular: 4 },
        )
        .unwrap();
        assert!(matches!(fermi_order_parameters(&o, 2, FermiMode::Exact), Err(Error::InsufficientGrid { .. })));
    }

    #[test]
    fn stencil_constant_and_diagonal_wave() {
        let n = 16;
        let c = Field2D::from_fn(n, n, 1.0, 1.0, |_, _| Complex64::new(2.0, -1.0));
        let (xx, xy) = apply_nematic_stencil(&c, 1.0).unwrap();
        assert!(xx.data.iter().chain(&xy.data).all(|z| z.norm() < 1e-9));
        let k = 2.0 * PI * 3.0;
        let w = Field2D::from_fn(n, n, 1.0, 1.0, |x, y| Complex64::from_polar(1.0, k * (x + y)));
        let (xx, _) = apply_nematic_stencil(&w, 1.0).unwrap();
        assert!(xx.data.iter().all(|z| z.norm() < 1e-9));
        let tiny = Field2D::from_fn(3, 8, 1.0, 1.0, |_, _| Complex64::new(1.0, 0.0));
        assert!(apply_nematic_stencil(&tiny, 1.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let o = MomentumOccupation::from_profile(
            &"ellipse:1.1,0.9,0.2".parse().unwrap(),
            &PolarGridSpec { radial_panels: 6, radial_order: 4, angular: 16 },
        )
        .unwrap();
        let mut text = Vec::new();
        o.write_csv(&mut text).unwrap();
        let back = MomentumOccupation::read_csv(text.as_slice()).unwrap();
        assert_abs_diff_eq!(back.particle_density(), o.particle_density(), epsilon = 1e-13);
        // Nodes and values are written in shortest round-trip form.
        assert_eq!(back.radii(), o.radii());
        assert_eq!(back.angles(), o.angles());
        for i in 0..o.radii().len() {
            for j in 0..o.angles().len() {
                assert_eq!(back.value(i, j), o.value(i, j));
            }
        }
    }
}
