//! Density matrices, kernel fields, the Wigner-function correspondence and
//! quantum order-parameter operators.
//!
//! Measure convention: a [`KernelField`] carries `μ` with `dΓ = μ dΩ` chosen
//! so that `∫dΓ Δ = 𝟙`. [`order_parameter_operator`] integrates against the
//! plain `dΩ` instead; with that choice the generic operators coincide with
//! the closed-form spin operators with no extra constant, and the rank-l
//! Cartesian coefficients of `W` equal `⟨T̂⟩` exactly. For spins
//! `μ = (2s+1)/4π`. The spin kernel is self-dual: the same `Δ` serves for
//! `W = Tr ρΔ` and `ρ = ∫dΓ W Δ`.

mod density;
mod kernel;
mod matrix;
mod operator;

pub use density::{DensityMatrix, PSD_TOL, TRACE_TOL};
pub use kernel::{quantize, state_from_wigner, wigner_from_state, KernelField, Reconstruction, NORMALIZATION_TOL};
pub use matrix::{hermitian_defect, hermitian_eigenvalues, CMatrix, MatrixJson, HERMITIAN_TOL};
pub use operator::{
    expectation, many_particle_lift, order_parameter_operator, partial_trace, OperatorTensor, INDEX_TOL, LIFT_LIMIT,
};

#[cfg(test)]
mod tests;
