//! Analysis of finite-dimensional quantum Langevin equations (Hudson–Parthasarathy
//! form): validation of coefficient data, changes of noise basis, the
//! classical/quantum noise criteria, the Kc ⊕ Kq decomposition of the noise
//! space, the associated Lindblad semigroup, and Monte-Carlo simulation of
//! the classical jump-diffusion realisation.
//!
//! The analysis modules are generic over the real scalar (`f32` or `f64`);
//! the aliases at the crate root fix it to `f64`.

pub mod matrix;
pub mod model;
pub mod algebra;
pub mod classify;
pub mod random;
pub mod decompose;
pub mod fixtures;
pub mod lindblad;
pub mod sim;
mod scalar;

pub use matrix::{ComplexMatrix, LinalgError, Tolerance};
pub use scalar::Real;

/// `f64` complex matrix.
pub type CMatrix = ComplexMatrix<f64>;
/// `f64` tolerance.
pub type Tol = Tolerance<f64>;
