//! Numerical laboratory for Laplace eigenfunctions on flat domains: nodal
//! domains, local asymmetry of positivity sets, growth exponents, inner
//! radius scaling and capacity estimates.

pub mod asymmetry;
pub mod capacity;
pub mod domain;
pub mod eigen;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod nodal;
pub mod stats;

pub use error::{Error, Result};
