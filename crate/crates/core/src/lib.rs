// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the tensor-index notation.
#![allow(clippy::needless_range_loop)]

pub mod angular;
pub mod cli;
pub mod error;
pub mod expansion;
pub mod fermi;
pub mod molecular;
pub mod quantum;
pub mod spin;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
