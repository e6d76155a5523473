//! Special functions for angular expansions: associated Legendre functions,
//! spherical harmonics, Clebsch-Gordan coefficients and Wigner rotation
//! matrices. Condon-Shortley phase throughout.

mod clebsch;
mod half_integer;
mod legendre;
mod wigner_d;

pub use clebsch::clebsch_gordan;
pub use half_integer::{check_projection, HalfInteger};
pub use legendre::{assoc_legendre, spherical_harmonic};
pub(crate) use legendre::ylm;
pub use wigner_d::{rot_y, rot_z, wigner_D, wigner_d_matrix, wigner_small_d, EulerAngles};
