//! Block band random matrices on a periodic lattice.
//!
//! Sampling, dense Hermitian eigenvalues, local spectral statistics, and numerical
//! checks of the supersymmetric saddle-point analysis (functionals, determinants,
//! Grassmann integration and unitary group integrals).

pub mod eigen;
pub mod ensemble;
pub mod error;
pub mod grassmann;
pub mod group;
pub mod lattice;
pub mod mat2;
pub mod quad;
pub mod saddle;
pub mod stats;

pub use error::{Error, Result};
