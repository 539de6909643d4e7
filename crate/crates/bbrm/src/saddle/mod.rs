//! Saddle-point analysis of the supersymmetric integral representation.
//!
//! Conventions used throughout:
//! * the Laplacian is `A - deg` (negative semidefinite), sums over `j ~ j'` run over
//!   [`Lattice::edges`] with multiplicity;
//! * the functionals carry the constant `U_*` with the sign that makes their real
//!   parts vanish at the saddle points, so `Re K_m >= 0`, `Re L_m >= 0` and
//!   `Re L~_m >= 0` on the integration domains;
//! * `log det diag(b1, -b2)` is taken as `log b1 + log b2`, dropping a constant
//!   phase, so `L_m` is exactly zero at its saddle.

pub mod determinant;
pub mod functionals;
pub mod integrals;
pub mod minimize;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat2::Mat2;

pub use determinant::*;
pub use functionals::*;
pub use integrals::*;
pub use minimize::*;

/// Quantities fixed by the spectral point `lambda0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleConstants {
    pub lambda0: f64,
    /// `(i lambda0 + sqrt(4 - lambda0^2)) / 2`
    pub a_plus: Complex64,
    /// `(i lambda0 - sqrt(4 - lambda0^2)) / 2`
    pub a_minus: Complex64,
    /// `sqrt(4 - lambda0^2)`
    pub c0: f64,
    /// semicircle density at `lambda0`
    pub rho0: f64,
    /// `arg a_plus = asin(lambda0 / 2)`
    pub phi_plus: f64,
}

impl SaddleConstants {
    pub fn new(lambda0: f64) -> Result<Self> {
        if !(lambda0.abs() < 2.0) {
            return Err(Error::InvalidParam(format!(
                "lambda0 = {lambda0} must lie in (-2, 2)"
            )));
        }
        let c0 = (4.0 - lambda0 * lambda0).sqrt();
        Ok(SaddleConstants {
            lambda0,
            a_plus: Complex64::new(c0 / 2.0, lambda0 / 2.0),
            a_minus: Complex64::new(-c0 / 2.0, lambda0 / 2.0),
            c0,
            rho0: c0 / (2.0 * std::f64::consts::PI),
            phi_plus: (lambda0 / 2.0).asin(),
        })
    }

    /// Same as [`SaddleConstants::new`] but restricted to `|lambda0| < sqrt 2`,
    /// where the positivity statements for the functionals hold.
    pub fn new_inner(lambda0: f64) -> Result<Self> {
        if !(lambda0.abs() < std::f64::consts::SQRT_2) {
            return Err(Error::InvalidParam(format!(
                "lambda0 = {lambda0} must lie in (-sqrt 2, sqrt 2)"
            )));
        }
        Self::new(lambda0)
    }

    /// `L_± = diag(a_+, a_-)`
    pub fn l_pm(&self) -> Mat2 {
        Mat2::diag(self.a_plus, self.a_minus)
    }

    /// `L_∓ = diag(a_-, a_+)`
    pub fn l_mp(&self) -> Mat2 {
        Mat2::diag(self.a_minus, self.a_plus)
    }

    /// `L_+ = a_+ I`
    pub fn l_plus(&self) -> Mat2 {
        Mat2::diag(self.a_plus, self.a_plus)
    }

    /// `L_- = a_- I`
    pub fn l_minus(&self) -> Mat2 {
        Mat2::diag(self.a_minus, self.a_minus)
    }

    /// Single-site term `a_+^2 / 2 - i lambda0 a_+ - log a_+`.
    pub fn b_plus(&self) -> Complex64 {
        let a = self.a_plus;
        a * a / 2.0 - Complex64::i() * self.lambda0 * a - a.ln()
    }

    /// `2 |Λ| Re b_+ = |Λ| (2 + lambda0^2) / 2`
    pub fn u_star(&self, sites: usize) -> f64 {
        2.0 * sites as f64 * self.b_plus().re
    }

    /// `theta_eps = -i eps + (xi2 - xi1) / (2 rho0)`
    pub fn theta(&self, xi1: f64, xi2: f64, eps: f64) -> Complex64 {
        Complex64::new((xi2 - xi1) / (2.0 * self.rho0), -eps)
    }

    /// `lambda0 + i eps / N + xi / (N rho0)`
    pub fn z(&self, xi: f64, eps: f64, n: usize) -> Complex64 {
        let nf = n as f64;
        Complex64::new(self.lambda0 + xi / (nf * self.rho0), eps / nf)
    }
}
