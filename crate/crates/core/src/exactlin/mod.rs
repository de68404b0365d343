//! Deterministic exact linear algebra over the rationals and Gaussian
//! rationals. Everything downstream (symbols, prolongations, the oracle)
//! reduces to the handful of primitives in here.

mod matrix;
mod scalar;
mod subspace;

pub use matrix::Matrix;
pub use scalar::Scalar;
pub use subspace::{image_and_quotient, Subspace};
