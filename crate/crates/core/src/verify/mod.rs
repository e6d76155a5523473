//! The acceptance suite: every criterion recomputes its quantities from
//! scratch, compares against an independent route, and reports measured
//! values next to the tolerances they are judged by.

pub mod oracles;

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angular::{spherical_harmonic, wigner_D, EulerAngles, HalfInteger};
use crate::error::{Error, Result};
use crate::expansion::{build_grid, expand_cartesian, expand_rotation, reconstruct, Domain, Point};
use crate::fermi::{
    apply_nematic_stencil, estimate_pf, fermi_order_parameters_with_pf, FermiMode, Field2D, MomentumOccupation,
    PolarGridSpec, Profile, DEFAULT_SMEAR,
};
use crate::molecular::{
    body_axis_nematic, molecular_nematic, molecular_polarization, NamedDensity, RotationField,
    POLARIZATION_PREFACTOR,
};
use crate::quantum::{
    expectation, many_particle_lift, order_parameter_operator, partial_trace, state_from_wigner, wigner_from_state,
    CMatrix, DensityMatrix, OperatorTensor, INDEX_TOL,
};
use crate::spin::{nematic_operator_closed, polarization_operator_closed, spin_kernel};
use crate::tensor::{angular_to_cartesian, normalization, SpatialDim, Tensor};

/// Criterion names, in execution order, with one-line descriptions.
pub const CRITERIA: [(&str, &str); 11] = [
    ("spin-roundtrip", "W = Tr ρΔ and back, 100 random states per spin"),
    ("closed-form", "quadrature operators vs closed-form P̂ and Q̂, one calibrated constant"),
    ("rank-cutoff", "spin operators vanish above rank 2s"),
    ("spin-half-nematic", "no nematic operator for s = 1/2"),
    ("classical-roundtrip", "Cartesian/rotation expansions reconstruct band-limited functions"),
    ("orderwise", "rank-l angular and Cartesian terms agree pointwise"),
    ("fermi-ellipse", "elliptic Fermi sea vs dense Cartesian oracle"),
    ("weyl-symbol", "nematic stencil on plane waves reproduces the momentum symbol"),
    ("many-particle", "lifted operators vs product states and partial traces"),
    ("molecular", "SO(3) polarization and nematic tensors"),
    ("operator-invariants", "hermiticity and index tracelessness of all operators"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass iff `measured < tolerance`.
    Below,
    /// Pass iff `measured ≥ tolerance`.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    /// Whether a global `--tolerance` replaces this tolerance. Runtime
    /// budgets and convergence-order floors are not accuracy tolerances.
    pub overridable: bool,
}

impl Check {
    fn below(label: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { label: label.into(), measured, tolerance, comparison: Comparison::Below, overridable: true }
    }

    fn at_least(label: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { label: label.into(), measured, tolerance, comparison: Comparison::AtLeast, overridable: false }
    }

    fn fixed(mut self) -> Self {
        self.overridable = false;
        self
    }

    pub fn passed(&self) -> bool {
        match self.comparison {
            Comparison::Below => self.measured < self.tolerance,
            Comparison::AtLeast => self.measured >= self.tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub name: String,
    pub description: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// The failing check if any, otherwise the one closest to its bound.
    pub fn headline(&self) -> &Check {
        let margin = |c: &Check| match c.comparison {
            Comparison::Below => (c.measured / c.tolerance).abs(),
            Comparison::AtLeast => (c.tolerance / c.measured).abs(),
        };
        self.checks
            .iter()
            .find(|c| !c.passed())
            .or_else(|| self.checks.iter().max_by(|a, b| margin(a).total_cmp(&margin(b))))
            .expect("criterion has checks")
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.headline();
        let op = match h.comparison {
            Comparison::Below => "<",
            Comparison::AtLeast => ">=",
        };
        write!(
            f,
            "{} {:<20} {:<44} {:>11.3e} {op} {:<9.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            h.label,
            h.measured,
            h.tolerance
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Replaces every overridable tolerance.
    pub tolerance: Option<f64>,
    /// Criterion names to run; empty means all.
    pub only: Vec<String>,
    pub seed: u64,
}

pub fn run(opts: &VerifyOptions) -> Result<Vec<CriterionReport>> {
    for name in &opts.only {
        if !CRITERIA.iter().any(|(n, _)| n == name) {
            return Err(Error::Parse(format!(
                "unknown criterion {name:?}; known: {}",
                CRITERIA.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
            )));
        }
    }
    CRITERIA
        .iter()
        .filter(|(n, _)| opts.only.is_empty() || opts.only.iter().any(|o| o == n))
        .map(|(n, _)| run_criterion(n, opts))
        .collect()
}

pub fn run_criterion(name: &str, opts: &VerifyOptions) -> Result<CriterionReport> {
    let (name, description) = *CRITERIA
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Parse(format!("unknown criterion {name:?}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ fxhash(name));
    let start = Instant::now();
    let mut checks = match name {
        "spin-roundtrip" => spin_roundtrip(&mut rng)?,
        "closed-form" => closed_form()?,
        "rank-cutoff" => rank_cutoff()?,
        "spin-half-nematic" => spin_half_nematic()?,
        "classical-roundtrip" => classical_roundtrip(&mut rng)?,
        "orderwise" => orderwise(&mut rng)?,
        "fermi-ellipse" => fermi_ellipse()?,
        "weyl-symbol" => weyl_symbol()?,
        "many-particle" => many_particle(&mut rng)?,
        "molecular" => molecular()?,
        "operator-invariants" => operator_invariants()?,
        _ => unreachable!(),
    };
    if let Some(t) = opts.tolerance {
        for c in checks.iter_mut().filter(|c| c.overridable) {
            c.tolerance = t;
        }
    }
    Ok(CriterionReport {
        name: name.into(),
        description: description.into(),
        checks,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Stable per-criterion seed offset, so `--only` reproduces the full run.
fn fxhash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x1000_0000_01b3))
}

const SPINS: [i32; 5] = [1, 2, 3, 4, 6];

fn spin(twice: i32) -> HalfInteger {
    HalfInteger::from_twice(twice)
}

fn matrix_max(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn spin_roundtrip(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut norm = 0.0f64;
    for tw in SPINS {
        let grid = build_grid(Domain::S2, 2 * tw as usize)?;
        let kernel = spin_kernel(spin(tw), &grid)?;
        let n = kernel.dim();
        for trial in 0..100 {
            let rho = DensityMatrix::random(n, 1 + trial % n, rng);
            let w = wigner_from_state(&rho, &kernel)?;
            let total: f64 = w.iter().zip(grid.weights()).map(|(x, g)| x * g).sum::<f64>() * kernel.mu();
            norm = norm.max((total - 1.0).abs());
            let back = state_from_wigner(&w, &kernel)?;
            worst = worst.max(matrix_max(&(back.matrix - rho.matrix())));
        }
    }
    Ok(vec![
        Check::below("max |ρ − ρ'| (500 states)", worst, 1e-8),
        Check::below("max |∫dΓ W − 1|", norm, 1e-10),
        Check::below("runtime [s]", start.elapsed().as_secs_f64(), 30.0).fixed(),
    ])
}

fn quadrature_operator(tw: i32, rank: usize) -> Result<OperatorTensor> {
    let grid = build_grid(Domain::S2, (2 * tw as usize).max(tw as usize + rank))?;
    order_parameter_operator(&spin_kernel(spin(tw), &grid)?, SpatialDim::Three, rank)
}

fn frobenius(a: &OperatorTensor, b: &OperatorTensor) -> f64 {
    a.entries().iter().zip(b.entries()).map(|(x, y)| x.zip_map(y, |p, q| (p.conj() * q).re).sum()).sum()
}

fn closed_form() -> Result<Vec<Check>> {
    // The one free constant is fitted at (s = 1/2, l = 1) and then held fixed.
    let p_half = quadrature_operator(1, 1)?;
    let c_half = polarization_operator_closed(spin(1));
    let kappa = frobenius(&p_half, &c_half) / frobenius(&c_half, &c_half);
    let mut worst = 0.0f64;
    let mut worst_label = String::new();
    for tw in SPINS {
        let closed_p = polarization_operator_closed(spin(tw));
        let closed_q = nematic_operator_closed(spin(tw));
        // Relative to the larger of the two closed forms, so the vanishing
        // s = 1/2 nematic is measured on the polarization's scale.
        let scale = closed_p.max_abs().max(closed_q.max_abs());
        for (rank, closed) in [(1, closed_p), (2, closed_q)] {
            let generic = quadrature_operator(tw, rank)?;
            let diff = generic.max_abs_diff(&closed.scale(kappa)).expect("same shape") / scale;
            if diff >= worst {
                worst = diff;
                worst_label = format!("s={} l={rank}", spin(tw));
            }
        }
    }
    Ok(vec![
        Check::below(format!("max rel. error over 10 operators ({worst_label})"), worst, 1e-8),
        Check::below("|κ − 1| (calibrated constant)", (kappa - 1.0).abs(), 1e-8),
    ])
}

fn rank_cutoff() -> Result<Vec<Check>> {
    let mut worst = 0.0f64;
    for tw in [1, 2, 3, 4] {
        for rank in [tw as usize + 1, tw as usize + 2] {
            worst = worst.max(quadrature_operator(tw, rank)?.norm());
        }
    }
    Ok(vec![Check::below("max ‖T̂_l‖, l = 2s+1, 2s+2, s ≤ 2", worst, 1e-10)])
}

fn spin_half_nematic() -> Result<Vec<Check>> {
    let closed = nematic_operator_closed(spin(1));
    let quad = quadrature_operator(1, 2)?;
    Ok(vec![
        Check::below("closed form max |Q̂|", closed.max_abs(), 1e-10),
        Check::below("quadrature ‖Q̂‖", quad.norm(), 1e-10),
    ])
}

fn random_unit3(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let a = rng.gen_range(0.0..2.0 * PI);
    let b = rng.gen_range(-1.0f64..1.0).acos();
    let g = rng.gen_range(0.0..2.0 * PI);
    EulerAngles { alpha: a, beta: b, gamma: g }.to_matrix()
}

/// Random real multiplet: `f_(l,−m) = (−1)^m conj(f_lm)`.
fn random_multiplet(rng: &mut ChaCha8Rng, l: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); 2 * l + 1];
    c[l] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
    for m in 1..=l {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        c[l + m] = z;
        c[l - m] = z.conj() * if m % 2 == 0 { 1.0 } else { -1.0 };
    }
    c
}

fn angles_of(u: &[f64]) -> (f64, f64) {
    (u[2].clamp(-1.0, 1.0).acos(), u[1].atan2(u[0]))
}

fn classical_roundtrip(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let (mut e1, mut e2, mut e3) = (0.0f64, 0.0f64, 0.0f64);
    for l in 0..=6usize {
        // Circle: trigonometric polynomial of degree l.
        let coef: Vec<(f64, f64)> = (0..=l).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let f1 = |phi: f64| coef.iter().enumerate().map(|(k, (a, b))| a * (k as f64 * phi).cos() + b * (k as f64 * phi).sin()).sum::<f64>();
        let g = build_grid(Domain::S1, 2 * l)?;
        let samples: Vec<f64> = g.nodes().iter().map(|n| f1(n[0])).collect();
        let r = expand_cartesian(&g, &samples, l)?;
        for _ in 0..20 {
            let phi = rng.gen_range(0.0..2.0 * PI);
            let v = reconstruct(&r, &Point::Vector(vec![phi.cos(), phi.sin()]))?;
            e1 = e1.max((v - f1(phi)).abs());
        }

        // Sphere: random real spherical-harmonic sum.
        let mult: Vec<Vec<Complex64>> = (0..=l).map(|k| random_multiplet(rng, k)).collect();
        let f2 = |t: f64, p: f64| -> Result<f64> {
            let mut acc = 0.0;
            for (k, row) in mult.iter().enumerate() {
                for (c, m) in row.iter().zip(-(k as i32)..=k as i32) {
                    acc += (c * spherical_harmonic(k, m, t, p)?).re;
                }
            }
            Ok(acc)
        };
        let g = build_grid(Domain::S2, 2 * l)?;
        let samples = g.nodes().iter().map(|n| f2(n[0], n[1])).collect::<Result<Vec<_>>>()?;
        let r = expand_cartesian(&g, &samples, l)?;
        for _ in 0..20 {
            let u = random_unit3(rng);
            let (t, p) = angles_of(&u);
            e2 = e2.max((reconstruct(&r, &Point::Vector(u.to_vec()))? - f2(t, p)?).abs());
        }

        // Rotation group: random real Wigner-D sum.
        let mut terms = Vec::new();
        for j in 0..=l as i32 {
            for mp in -j..=j {
                for m in -j..=j {
                    terms.push((j, mp, m, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                }
            }
        }
        let f3 = |r: &Matrix3<f64>| -> Result<f64> {
            let e = EulerAngles::from_matrix(r);
            let mut acc = 0.0;
            for &(j, mp, m, c) in &terms {
                acc += (c * wigner_D(spin(2 * j), spin(2 * mp), spin(2 * m), &e)?).re;
            }
            Ok(acc)
        };
        let g = build_grid(Domain::SO3, 2 * l)?;
        let samples = (0..g.len()).map(|k| f3(&g.rotation(k))).collect::<Result<Vec<_>>>()?;
        let r = expand_rotation(&g, &samples, l)?;
        for _ in 0..20 {
            let rot = random_rotation(rng);
            e3 = e3.max((reconstruct(&r, &Point::Rotation(rot))? - f3(&rot)?).abs());
        }
    }

    // f = f₀ + P·u + Q:uu with the circle prefactors 1/(2π), 1/π, 2/π applied
    // by direct quadrature, independently of the expansion's normalization.
    let (f0, p, q) = (0.37, [0.21, -0.13], [[0.11, 0.07], [0.07, -0.11]]);
    let f = |u: [f64; 2]| f0 + p[0] * u[0] + p[1] * u[1] + (0..2).flat_map(|i| (0..2).map(move |j| q[i][j] * u[i] * u[j])).sum::<f64>();
    let g = build_grid(Domain::S1, 8)?;
    let us: Vec<[f64; 2]> = g.nodes().iter().map(|n| [n[0].cos(), n[0].sin()]).collect();
    let integral = |h: &dyn Fn([f64; 2]) -> f64| us.iter().zip(g.weights()).map(|(u, w)| w * f(*u) * h(*u)).sum::<f64>();
    let mut prefactor = 0.0f64;
    prefactor = prefactor.max((integral(&|_| 1.0) / (2.0 * PI) - f0).abs());
    for i in 0..2 {
        prefactor = prefactor.max((integral(&|u| u[i]) / PI - p[i]).abs());
        for j in 0..2 {
            let d = if i == j { 0.5 } else { 0.0 };
            prefactor = prefactor.max((2.0 / PI * integral(&|u| u[i] * u[j] - d) - q[i][j]).abs());
        }
    }
    let ex = expand_cartesian(&g, &us.iter().map(|u| f(*u)).collect::<Vec<_>>(), 2)?;
    let mut coeff = (ex.cartesian(0).expect("rank 0").data()[0] - f0).abs();
    for i in 0..2 {
        coeff = coeff.max((ex.cartesian(1).expect("rank 1").data()[i] - p[i]).abs());
        for j in 0..2 {
            coeff = coeff.max((ex.cartesian(2).expect("rank 2").tensor().get(&[i, j]) - q[i][j]).abs());
        }
    }
    let norm = (0..3)
        .map(|l| (normalization(SpatialDim::Two, l) - [1.0 / (2.0 * PI), 1.0 / PI, 2.0 / PI][l]).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        Check::below("S¹ reconstruction error, L ≤ 6", e1, 1e-10),
        Check::below("S² reconstruction error, L ≤ 6", e2, 1e-10),
        Check::below("SO(3) reconstruction error, L ≤ 6", e3, 1e-10),
        Check::below("2D f₀, P, Q via 1/(2π), 1/π, 2/π", prefactor, 1e-13),
        Check::below("2D expansion coefficients vs f₀, P, Q", coeff, 1e-13),
        Check::below("|A_l − {1/(2π), 1/π, 2/π}|", norm, 1e-15),
    ])
}

fn orderwise(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut worst = 0.0f64;
    for l in 0..=4usize {
        let mult = random_multiplet(rng, l);
        let cart = angular_to_cartesian(l, &mult)?;
        for _ in 0..100 {
            let u = random_unit3(rng);
            let (t, p) = angles_of(&u);
            let mut ang = Complex64::new(0.0, 0.0);
            for (c, m) in mult.iter().zip(-(l as i32)..=l as i32) {
                ang += c * spherical_harmonic(l, m, t, p)?;
            }
            worst = worst.max((ang.re - cart.evaluate(&u)).abs()).max(ang.im.abs());
        }
    }
    Ok(vec![Check::below("max |Σ_m f_lm Y_lm − F·u^l|, l ≤ 4", worst, 1e-10)])
}

const ORACLE_CELLS: usize = 512;

fn rank2(occ: &MomentumOccupation, mode: FermiMode, p_f: f64) -> Result<Tensor> {
    Ok(fermi_order_parameters_with_pf(occ, 2, mode, p_f)?.tensors[2].tensor().clone())
}

fn max_diff(a: &Tensor, b: &Tensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn fermi_ellipse() -> Result<Vec<Check>> {
    let profile = Profile::Ellipse { a: 1.2, b: 1.0, chi: 0.0, smear: DEFAULT_SMEAR };
    let occ = MomentumOccupation::from_profile(&profile, &PolarGridSpec::default())?;
    let p_f = estimate_pf(&occ)?;
    let mut checks = Vec::new();
    for mode in [FermiMode::Exact, FermiMode::FermiSurface] {
        let q = rank2(&occ, mode, p_f)?;
        let oracle = oracles::fermi_cartesian(&profile, 2, mode, p_f, ORACLE_CELLS);
        checks.push(Check::below(format!("{mode:?} rel. deviation from oracle"), max_diff(&q, &oracle) / oracle.max_abs(), 1e-3));
    }

    // Convergence of the production polar grid under radial refinement,
    // against the dense oracle. Pairs below the oracle's own floor carry
    // no information and are skipped.
    let oracle = oracles::fermi_cartesian(&profile, 2, FermiMode::Exact, p_f, ORACLE_CELLS);
    let errors = [2, 4, 8, 16]
        .into_iter()
        .map(|panels| {
            let spec = PolarGridSpec { radial_panels: panels, ..PolarGridSpec::default() };
            let o = MomentumOccupation::from_profile(&profile, &spec)?;
            Ok(max_diff(&rank2(&o, FermiMode::Exact, p_f)?, &oracle))
        })
        .collect::<Result<Vec<_>>>()?;
    let order = errors
        .windows(2)
        .filter(|w| w[1] > 1e-11)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::at_least("min observed order, radial refinement", order, 2.0));

    // Fermi-surface vs exact mode, equal-area ellipses of growing aspect.
    let mut deviations = Vec::new();
    for ratio in [1.01f64, 1.1, 1.3] {
        let prof = Profile::Ellipse { a: ratio.sqrt(), b: 1.0 / ratio.sqrt(), chi: 0.0, smear: DEFAULT_SMEAR };
        let o = MomentumOccupation::from_profile(&prof, &PolarGridSpec::default())?;
        let pf = estimate_pf(&o)?;
        deviations.push(max_diff(&rank2(&o, FermiMode::FermiSurface, pf)?, &rank2(&o, FermiMode::Exact, pf)?));
    }
    let growth = deviations.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    checks.push(Check::at_least("min growth of |Q_fs − Q_exact| with a/b", growth, 1.0));
    Ok(checks)
}

fn weyl_symbol() -> Result<Vec<Check>> {
    // Plane wave with three periods in x and two in y on the unit box. The
    // coarsest grid has k·h ≈ 0.6, inside the asymptotic O(h²) regime.
    let (kx, ky) = (2.0 * PI * 3.0, 2.0 * PI * 2.0);
    let p_f = 25.0;
    let pref = 4.0 * PI * PI / (p_f * p_f);
    let (sxx, sxy) = (pref * (kx * kx - ky * ky), pref * 2.0 * kx * ky);
    let errors = [32usize, 64, 128, 256]
        .into_iter()
        .map(|n| {
            let psi = Field2D::from_fn(n, n, 1.0, 1.0, |x, y| Complex64::from_polar(1.0, kx * x + ky * y));
            let (xx, xy) = apply_nematic_stencil(&psi, p_f)?;
            let mut e = 0.0f64;
            for (k, p) in psi.data.iter().enumerate() {
                e = e.max((xx.data[k] / p - sxx).norm()).max((xy.data[k] / p - sxy).norm());
            }
            Ok(e / sxx.abs().max(sxy.abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let spread = orders.iter().map(|o| (o - 2.0).abs()).fold(0.0, f64::max);
    Ok(vec![
        Check::below("max |observed order − 2|, h = 1/32 … 1/256", spread, 0.1).fixed(),
        Check::below("rel. symbol error at h = 1/256", errors[3], 1e-2).fixed(),
    ])
}

fn many_particle(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut product = 0.0f64;
    let mut correlated = 0.0f64;
    for tw in [1, 2, 3] {
        let n = tw as usize + 1;
        for (rank, op) in [(1, polarization_operator_closed(spin(tw))), (2, nematic_operator_closed(spin(tw)))] {
            let single = DensityMatrix::random(n, n, rng);
            let one = expectation(&single, &op)?;
            for particles in [2usize, 3] {
                if n.pow(particles as u32) > 64 {
                    continue;
                }
                let lifted = many_particle_lift(&op, particles)?;
                let mut rho = single.clone();
                for _ in 1..particles {
                    rho = rho.kron(&single);
                }
                product = product.max(max_diff(expectation(&rho, &lifted)?.tensor(), one.tensor()));

                // Correlated state: partial-trace oracle (1/N) Σ_k ⟨T̂⟩_{ρ_k}.
                let joint = DensityMatrix::random(n.pow(particles as u32), 2, rng);
                let via_lift = expectation(&joint, &lifted)?;
                let mut via_trace = Tensor::zeros(3, rank);
                for keep in 0..particles {
                    let red = DensityMatrix::new(partial_trace(joint.matrix(), n, particles, keep)?)?;
                    via_trace.add_scaled(expectation(&red, &op)?.tensor(), 1.0 / particles as f64);
                }
                correlated = correlated.max(max_diff(via_lift.tensor(), &via_trace));
            }
        }
    }
    Ok(vec![
        Check::below("product state vs single particle", product, 1e-10),
        Check::below("correlated state vs partial trace", correlated, 1e-10),
    ])
}

fn scalar_field(band: usize, f: impl Fn(&Matrix3<f64>) -> f64) -> Result<RotationField> {
    let g = build_grid(Domain::SO3, band)?;
    let v = (0..g.len()).map(|k| f(&g.rotation(k))).collect();
    RotationField::scalar(g, v, true)
}

fn classical(t: Result<crate::molecular::MolecularTensor>) -> Result<Tensor> {
    Ok(t?.classical().expect("scalar input").clone())
}

fn molecular() -> Result<Vec<Check>> {
    let uniform = scalar_field(4, |_| 1.0 / (8.0 * PI * PI))?;
    let p0 = classical(molecular_polarization(&uniform))?.max_abs();
    let q0 = classical(molecular_nematic(&uniform))?.max_abs();

    // Uniaxial: h(n) of the body axis n = R e_z only.
    let n0 = [0.3f64, -0.5, 0.8];
    let len = n0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let h = |n: [f64; 3]| {
        let c = (n[0] * n0[0] + n[1] * n0[1] + n[2] * n0[2]) / len;
        (1.0 + 0.6 * c + 0.9 * (1.5 * c * c - 0.5)) / (8.0 * PI * PI)
    };
    let uniaxial = scalar_field(4, |r| h([r[(0, 2)], r[(1, 2)], r[(2, 2)]]))?;
    let q = classical(molecular_nematic(&uniaxial))?;
    let axis = body_axis_nematic(&q).scale(3.0 * PI);
    let s2 = build_grid(Domain::S2, 4)?;
    let marginal: Vec<f64> = (0..s2.len())
        .map(|k| {
            let u = s2.unit_vector(k);
            2.0 * PI * h([u[0], u[1], u[2]])
        })
        .collect();
    let reference = expand_cartesian(&s2, &marginal, 2)?;
    let uniaxial_err = max_diff(&axis, reference.cartesian(2).expect("rank 2").tensor()) / axis.max_abs();

    // Prefactors against the rotation expansion of a generic band-2 density.
    let generic = |r: &Matrix3<f64>| 1.0 + 0.3 * r[(0, 1)] - 0.2 * r[(2, 2)] + 0.4 * r[(0, 2)] * r[(1, 0)] + 0.1 * r[(1, 1)] * r[(2, 0)];
    let field = scalar_field(4, generic)?;
    let g = field.grid();
    let samples: Vec<f64> = (0..g.len()).map(|k| generic(&g.rotation(k))).collect();
    let ex = expand_rotation(g, &samples, 2)?;
    let p = classical(molecular_polarization(&field))?;
    let q = classical(molecular_nematic(&field))?;
    let (c1, c2) = (ex.rotation(1).expect("rank 1"), ex.rotation(2).expect("rank 2"));
    let mut pref = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            pref = pref.max((p.get(&[i, j]) - c1.get(&[i], &[j])).abs());
            for k in 0..3 {
                for l in 0..3 {
                    pref = pref.max((q.get(&[i, j, k, l]) - c2.get(&[i, k], &[j, l])).abs());
                }
            }
        }
    }
    let scale = c1.max_abs().max(c2.max_abs());

    // Concentration: a von Mises density at R₀ gives P = (3/8π²) a(κ) R₀.
    let (kappa, alpha, beta, gamma) = (4.0, 0.7, 1.1, -0.4);
    let vmf = RotationField::from_density(build_grid(Domain::SO3, 40)?, &NamedDensity::VonMisesFisher { kappa, alpha, beta, gamma })?;
    let pv = classical(molecular_polarization(&vmf))?;
    let r0 = EulerAngles { alpha, beta, gamma }.to_matrix();
    let a = oracles::vmf_mean_factor(kappa);
    let mut vmf_err = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            vmf_err = vmf_err.max((pv.get(&[i, j]) - POLARIZATION_PREFACTOR * a * r0[(i, j)]).abs());
        }
    }
    Ok(vec![
        Check::below("uniform density: max |P|", p0, 1e-12),
        Check::below("uniform density: max |Q|", q0, 1e-12),
        Check::below("uniaxial: 3π Q_i3k3 vs S² nematic (rel.)", uniaxial_err, 1e-8),
        Check::below("P, Q vs rotation coefficients (rel.)", pref / scale, 1e-10),
        Check::below("von Mises P vs a(κ) R₀ oracle (rel.)", vmf_err / POLARIZATION_PREFACTOR, 1e-8),
    ])
}

fn operator_invariants() -> Result<Vec<Check>> {
    let mut herm = 0.0f64;
    let mut index = 0.0f64;
    let mut record = |op: &OperatorTensor| {
        let scale = op.max_abs().max(1.0);
        herm = herm.max(op.hermitian_defect() / scale);
        index = index.max(op.symmetry_defect().max(op.trace_defect()) / scale);
    };
    for tw in SPINS {
        record(&polarization_operator_closed(spin(tw)));
        record(&nematic_operator_closed(spin(tw)));
        for rank in 0..=(tw as usize + 2).min(6) {
            record(&quadrature_operator(tw, rank)?);
        }
    }
    for op in [nematic_operator_closed(spin(2)), polarization_operator_closed(spin(3))] {
        record(&many_particle_lift(&op, 2)?);
    }
    Ok(vec![
        Check::below("max hermiticity defect (rel.)", herm, 1e-12),
        Check::below("max symmetry/trace defect (rel.)", index, INDEX_TOL),
    ])
}
