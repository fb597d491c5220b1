//! Sphere decoding for MIMO detection under the l², l∞ and l~∞ pruning
//! metrics, together with closed-form expected-complexity and pairwise-error
//! expressions and a seeded Monte Carlo runner to cross-check them.

pub mod analytic;
pub mod decoder;
mod error;
pub mod model;
pub mod montecarlo;
pub mod special_fn;

pub use error::{Error, Result};
pub use num_complex::Complex64;
