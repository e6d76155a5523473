//! Orientational expansions on S¹, S² and SO(3).

mod csvio;
mod engine;
mod grid;
pub mod rotation;

pub use csvio::GridSamples;
pub use engine::{
    expand_angular, expand_cartesian, expand_rotation, reconstruct, AngularCoefficients, Coefficients,
    ExpansionResult, Point,
};
pub use grid::{build_grid, gauss_legendre, Domain, QuadratureGrid};
pub use rotation::RotationCoefficient;
