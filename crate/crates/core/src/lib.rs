//! Pfaffian correlation functions for β=1 random matrix ensembles of either parity:
//! Gaussian-type weights on the real line and the real Ginibre ensemble.

pub mod error;
pub mod kernels;
pub mod mc;
pub mod pfaffian;
pub mod poly;
pub mod quadrature;
pub mod reduction;
pub mod scalar;
pub mod skew;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Scalar;
