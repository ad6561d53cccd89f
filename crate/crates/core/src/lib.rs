// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bernstein;
pub mod calculus;
pub mod error;
pub mod linalg;
pub mod quadrature;
mod ray;
pub mod semigroup;
pub mod spectra;

pub use error::{Error, Result};
