use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::angular::{EulerAngles, HalfInteger};
use crate::expansion::{build_grid, expand_cartesian, Domain};
use crate::spin::{nematic_operator_closed, polarization_operator_closed, spin_kernel, spin_rotation};
use crate::tensor::{normalization, SpatialDim};

fn h(twice: i32) -> HalfInteger {
    HalfInteger::from_twice(twice)
}

fn kernel(twice: i32, extra: usize) -> KernelField {
    let g = build_grid(Domain::S2, 2 * twice as usize + extra).unwrap();
    spin_kernel(h(twice), &g).unwrap()
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn basis_state(n: usize, i: usize) -> DensityMatrix {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[i] = Complex64::new(1.0, 0.0);
    DensityMatrix::pure(&v).unwrap()
}

#[test]
fn mixed_state_is_isotropic() {
    for tw in 1..=6 {
        let k = kernel(tw, 0);
        let n = k.dim();
        let w = wigner_from_state(&DensityMatrix::maximally_mixed(n), &k).unwrap();
        for x in &w {
            assert_abs_diff_eq!(*x, 1.0 / n as f64, epsilon = 1e-13);
        }
    }
}

#[test]
fn spin_half_up_matches_direct_trace() {
    // Direct evaluation of Tr(|↑⟩⟨↑| Δ) gives (1 + √3 cos θ)/2.
    let k = kernel(1, 4);
    let w = wigner_from_state(&basis_state(2, 0), &k).unwrap();
    for (x, node) in w.iter().zip(k.grid().nodes()) {
        assert_abs_diff_eq!(*x, (1.0 + 3f64.sqrt() * node[0].cos()) / 2.0, epsilon = 1e-13);
    }
}

#[test]
fn wigner_normalized_and_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let tw = 1 + trial % 6;
        let k = kernel(tw, 0);
        let rho = DensityMatrix::random(k.dim(), 1 + trial as usize % k.dim(), &mut rng);
        let w = wigner_from_state(&rho, &k).unwrap();
        let total: f64 = w.iter().zip(k.grid().weights()).map(|(x, wt)| x * wt * k.mu()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        let back = state_from_wigner(&w, &k).unwrap();
        assert!(back.physical);
        worst = worst.max(max_abs(&(back.matrix - rho.matrix())));
    }
    assert!(worst < 1e-8, "max round-trip error {worst:e}");
}

#[test]
fn constant_wigner_gives_mixed_state() {
    let k = kernel(3, 0);
    let back = state_from_wigner(&vec![0.25; k.grid().len()], &k).unwrap();
    assert!(max_abs(&(back.matrix - DensityMatrix::maximally_mixed(4).matrix())) < 1e-13);
}

#[test]
fn nonphysical_wigner_is_flagged() {
    let k = kernel(1, 0);
    let up = wigner_from_state(&basis_state(2, 0), &k).unwrap();
    let w: Vec<f64> = up.iter().map(|x| 3.0 * x - 1.0).collect();
    let back = state_from_wigner(&w, &k).unwrap();
    assert!(!back.physical);
    assert_abs_diff_eq!(back.min_eigenvalue, -1.0, epsilon = 1e-12);
    assert!(back.into_state().is_err());
}

#[test]
fn quantize_unit_symbol() {
    for tw in 1..=4 {
        let k = kernel(tw, 0);
        let one = quantize(&vec![1.0; k.grid().len()], &k).unwrap();
        assert!(max_abs(&(one - DMatrix::identity(k.dim(), k.dim()))) < 1e-12);
    }
}

#[test]
fn quantize_nematic_symbol_matches_operator() {
    // 2uu − δ = 2T₂(u) − δ/3, and quantize(A₂T₂) = μ Q̂.
    let k = kernel(2, 2);
    let q = order_parameter_operator(&k, SpatialDim::Three, 2).unwrap();
    let a2 = normalization(SpatialDim::Three, 2);
    for i in 0..3 {
        for j in 0..3 {
            let symbol: Vec<f64> = (0..k.grid().len())
                .map(|n| {
                    let u = k.grid().unit_vector(n);
                    2.0 * u[i] * u[j] - if i == j { 1.0 } else { 0.0 }
                })
                .collect();
            let got = quantize(&symbol, &k).unwrap();
            let mut expected = q.component(&[i, j]) * Complex64::new(2.0 * k.mu() / a2, 0.0);
            if i == j {
                expected -= DMatrix::identity(3, 3) * Complex64::new(1.0 / 3.0, 0.0);
            }
            assert!(max_abs(&(got - expected)) < 1e-12);
        }
    }
}

#[test]
fn rank_zero_operator() {
    for tw in 1..=4 {
        let k = kernel(tw, 0);
        let n = k.dim();
        let t0 = order_parameter_operator(&k, SpatialDim::Three, 0).unwrap();
        // A₀ ∫dΩ Δ = A₀ (4π/n) 𝟙 = 𝟙/n.
        assert!(max_abs(&(t0.entries()[0].clone() - DMatrix::identity(n, n) / Complex64::new(n as f64, 0.0))) < 1e-13);
    }
}

#[test]
fn spin_half_has_no_nematic_operator() {
    let k = kernel(1, 2);
    assert!(order_parameter_operator(&k, SpatialDim::Three, 2).unwrap().norm() < 1e-10);
}

#[test]
fn operator_needs_enough_grid() {
    let k = kernel(2, 0);
    assert!(matches!(order_parameter_operator(&k, SpatialDim::Three, 3), Err(crate::Error::InsufficientGrid { .. })));
    assert!(order_parameter_operator(&k, SpatialDim::Two, 0).is_err());
}

#[test]
fn rank_cutoff() {
    for tw in 1..=6 {
        let l = tw as usize;
        let k = kernel(tw, 2);
        for rank in [l + 1, l + 2] {
            let t = order_parameter_operator(&k, SpatialDim::Three, rank).unwrap();
            assert!(t.norm() < 1e-10, "s={} rank {rank}: {}", h(tw), t.norm());
        }
    }
}

#[test]
fn spin_three_halves_rank_three() {
    let k = kernel(3, 3);
    let t = order_parameter_operator(&k, SpatialDim::Three, 3).unwrap();
    assert!(t.norm() > 0.1);
    assert!(t.hermitian_defect() < 1e-12);
    assert!(t.trace_defect() < 1e-10);
    assert!(t.symmetry_defect() < 1e-10);
}

#[test]
fn expectations_of_special_states() {
    let k = kernel(2, 2);
    let p = order_parameter_operator(&k, SpatialDim::Three, 1).unwrap();
    let q = order_parameter_operator(&k, SpatialDim::Three, 2).unwrap();
    let mixed = DensityMatrix::maximally_mixed(3);
    assert!(expectation(&mixed, &p).unwrap().tensor().max_abs() < 1e-13);
    assert!(expectation(&mixed, &q).unwrap().tensor().max_abs() < 1e-13);
    let m0 = basis_state(3, 1);
    assert!(expectation(&m0, &p).unwrap().tensor().max_abs() < 1e-13);
    let qv = expectation(&m0, &q).unwrap();
    // Closed form: diag(√10/6, √10/6, −√10/3).
    let r = 10f64.sqrt();
    assert_abs_diff_eq!(qv.tensor().get(&[0, 0]), r / 6.0, epsilon = 1e-10);
    assert_abs_diff_eq!(qv.tensor().get(&[2, 2]), -r / 3.0, epsilon = 1e-10);
}

#[test]
fn duality_with_cartesian_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for trial in 0..50 {
        let tw = 1 + trial % 6;
        let lmax = tw as usize;
        let k = kernel(tw, 0);
        let ops: Vec<_> =
            (0..=lmax).map(|l| order_parameter_operator(&k, SpatialDim::Three, l).unwrap()).collect();
        let rho = DensityMatrix::random(k.dim(), k.dim(), &mut rng);
        let w = wigner_from_state(&rho, &k).unwrap();
        let ex = expand_cartesian(k.grid(), &w, lmax).unwrap();
        for (l, op) in ops.iter().enumerate() {
            let a = ex.cartesian(l).unwrap();
            let b = expectation(&rho, op).unwrap();
            for (x, y) in a.data().iter().zip(b.data()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-8);
            }
        }
    }
}

#[test]
fn expectation_rotation_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for tw in 1..=4 {
        let s = h(tw);
        let k = kernel(tw, 2);
        let rot = EulerAngles::new(0.4 + tw as f64, 1.2, 2.9).unwrap().to_matrix();
        let rm: Vec<f64> = (0..9).map(|i| rot[(i / 3, i % 3)]).collect();
        let u = spin_rotation(s, &rot);
        let rho = DensityMatrix::random(k.dim(), 2, &mut rng);
        let rho_r = rho.conjugate(&u).unwrap();
        for l in 1..=2 {
            let op = order_parameter_operator(&k, SpatialDim::Three, l).unwrap();
            let a = expectation(&rho, &op).unwrap().rotate(&rm);
            let b = expectation(&rho_r, &op).unwrap();
            for (x, y) in a.data().iter().zip(b.data()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-8);
            }
        }
    }
}

#[test]
fn lift_single_particle_is_identity() {
    let q = nematic_operator_closed(h(2));
    let lifted = many_particle_lift(&q, 1).unwrap();
    assert_eq!(lifted.max_abs_diff(&q), Some(0.0));
}

#[test]
fn lift_product_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let p = polarization_operator_closed(h(2));
    let rho = DensityMatrix::random(3, 2, &mut rng);
    let lifted = many_particle_lift(&p, 3).unwrap();
    let rho3 = rho.kron(&rho).kron(&rho);
    let a = expectation(&rho3, &lifted).unwrap();
    let b = expectation(&rho, &p).unwrap();
    for (x, y) in a.data().iter().zip(b.data()) {
        assert_abs_diff_eq!(x, y, epsilon = 1e-12);
    }
}

#[test]
fn lift_correlated_two_spin_one() {
    // (|1,−1⟩ − |0,0⟩ + |−1,1⟩)/√3 plus a random admixture.
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    let mut psi = vec![Complex64::new(0.0, 0.0); 9];
    psi[2] = Complex64::new(1.0, 0.0);
    psi[4] = Complex64::new(-1.0, 0.0);
    psi[6] = Complex64::new(1.0, 0.0);
    let singlet = DensityMatrix::pure(&psi).unwrap();
    let noise = DensityMatrix::random(9, 9, &mut rng);
    let rho = DensityMatrix::new(singlet.matrix() * Complex64::new(0.7, 0.0) + noise.matrix() * Complex64::new(0.3, 0.0))
        .unwrap();
    let q = nematic_operator_closed(h(2));
    let lifted = many_particle_lift(&q, 2).unwrap();
    let via_lift = expectation(&rho, &lifted).unwrap();
    let mut via_trace = vec![0.0; 9];
    for keep in 0..2 {
        let red = DensityMatrix::new(partial_trace(rho.matrix(), 3, 2, keep).unwrap()).unwrap();
        for (acc, v) in via_trace.iter_mut().zip(expectation(&red, &q).unwrap().data()) {
            *acc += v / 2.0;
        }
    }
    for (x, y) in via_lift.data().iter().zip(&via_trace) {
        assert_abs_diff_eq!(x, y, epsilon = 1e-10);
    }
    // The pure singlet is isotropic.
    assert!(expectation(&singlet, &lifted).unwrap().tensor().max_abs() < 1e-12);
}

#[test]
fn lift_size_guard() {
    let q = nematic_operator_closed(h(2));
    assert!(matches!(many_particle_lift(&q, 8), Err(crate::Error::SizeGuard { .. })));
    assert!(many_particle_lift(&q, 0).is_err());
}

#[test]
fn operator_json_round_trip() {
    let q = nematic_operator_closed(h(3));
    let s = serde_json::to_string(&q).unwrap();
    assert!(s.contains("index_order"));
    let back: OperatorTensor = serde_json::from_str(&s).unwrap();
    assert_eq!(back, q);
}

#[test]
fn kernel_rejects_bad_normalization() {
    let g = build_grid(Domain::S2, 2).unwrap();
    let k = spin_kernel(h(1), &g).unwrap();
    let err = KernelField::new(g.clone(), k.nodes().to_vec(), 2.0 * k.mu(), 1);
    assert!(matches!(err, Err(crate::Error::Invariant(_))));
    let renorm = KernelField::normalized(g, k.nodes().to_vec(), 1).unwrap();
    assert_abs_diff_eq!(renorm.mu(), 2.0 / (4.0 * PI), epsilon = 1e-14);
}
