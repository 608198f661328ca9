//! Finite-dimensional laboratory for Lorentz–Schatten quasi-norms and
//! explicit factorizations of nuclear and convolution operators.
//!
//! The crate mechanizes the computable side of the theory: Lorentz sequence
//! quasi-norms, finite abelian groups with their Fourier analysis, a small
//! dense complex linear algebra kernel, Schatten-class checks, explicit
//! factorization chains and vector-valued convolution.

pub mod calibration;
pub mod config;
pub mod error;
pub mod experiments;
pub mod factorization;
pub mod group;
pub mod io;
pub mod linalg;
pub mod lorentz;
pub mod rng;
pub mod schatten;
pub mod vecconv;

pub use error::{Error, Result};
