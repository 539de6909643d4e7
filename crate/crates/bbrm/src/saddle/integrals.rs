//! Closed forms of the boundary integrals `f_u`, `f_b`, their `ξ'` derivatives,
//! the expansion coefficients at saddle point 1 and the final assembly of the
//! two-point function.
//!
//! `u` lists `(u_{j,1}, u_{j,2})`; `b` lists `(b_{j,1}, b_{j,2})` with
//! `B̂_j = diag(b_{j,1}, -b_{j,2})`.

use num_complex::Complex64;

use super::determinant::a3_closed;
use super::functionals::FunctionalSetup;
use super::SaddleConstants;
use crate::error::{Error, Result};
use crate::group::{phi1, quad_u11, quad_u2};
use crate::mat2::Mat2;
use crate::stats::lagrange_weights_at_zero;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Boundary point `(ξ1, ξ2, ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub xi1: f64,
    pub xi2: f64,
    pub eps: f64,
}

impl Boundary {
    pub fn new(xi1: f64, xi2: f64, eps: f64) -> Self {
        Boundary { xi1, xi2, eps }
    }

    /// `(i ξ1/ρ - ε, i ξ2/ρ + ε)`, the diagonal of `i ξ̂/ρ - ε L`.
    pub fn x(&self, k: &SaddleConstants) -> (Complex64, Complex64) {
        (
            Complex64::new(-self.eps, self.xi1 / k.rho0),
            Complex64::new(self.eps, self.xi2 / k.rho0),
        )
    }

    pub fn theta(&self, k: &SaddleConstants) -> Complex64 {
        k.theta(self.xi1, self.xi2, self.eps)
    }
}

fn means(x: &[[Complex64; 2]]) -> (Complex64, Complex64) {
    let n = x.len() as f64;
    let s0: Complex64 = x.iter().map(|p| p[0]).sum();
    let s1: Complex64 = x.iter().map(|p| p[1]).sum();
    (s0 / n, s1 / n)
}

/// `e^q / (e^q - 1) - 1/q`, the log-derivative of [`phi1`].
fn phi1_log_derivative(q: Complex64) -> Complex64 {
    if q.norm() < 1e-3 {
        0.5 + q / 12.0 - q * q * q / 720.0
    } else {
        q.exp() / (q.exp() - 1.0) - q.inv()
    }
}

/// `exp f_u(I, Û, ξ̂)`; continuous through `Σ u_{j,1} = Σ u_{j,2}`.
pub fn exp_f_u(k: &SaddleConstants, u: &[[Complex64; 2]], p: Boundary) -> Complex64 {
    let (u1, u2) = means(u);
    let (x1, x2) = p.x(k);
    (-(u1 * x1 + u2 * x2)).exp() * phi1((x1 - x2) * (u1 - u2))
}

/// `exp f_b(I, B̂, ξ̂)`; needs `Re 2iθ(b̄1 + b̄2) > 0` for the integral to converge.
pub fn exp_f_b(k: &SaddleConstants, b: &[[Complex64; 2]], p: Boundary) -> Result<Complex64> {
    let (b1, b2) = means(b);
    let (x1, x2) = p.x(k);
    let kappa = 2.0 * I * p.theta(k) * (b1 + b2);
    if !(kappa.re > 0.0) {
        return Err(Error::Divergent(format!(
            "Re 2i theta (b1 + b2) = {} is not positive",
            kappa.re
        )));
    }
    Ok((b1 * x1 - b2 * x2).exp() / kappa)
}

/// `∂ f_u / ∂ξ1'` at `ξ1' = ξ1`.
pub fn f_u1(k: &SaddleConstants, u: &[[Complex64; 2]], p: Boundary) -> Complex64 {
    let (u1, u2) = means(u);
    let (x1, x2) = p.x(k);
    let q = (x1 - x2) * (u1 - u2);
    (-I * u1 + I * (u1 - u2) * phi1_log_derivative(q)) / k.rho0
}

/// `∂ f_b / ∂ξ2'` at `ξ2' = ξ2`.
pub fn f_b1(k: &SaddleConstants, b: &[[Complex64; 2]], p: Boundary) -> Complex64 {
    let (_, b2) = means(b);
    -I * b2 / k.rho0 - 1.0 / (2.0 * p.theta(k) * k.rho0)
}

/// Direct quadrature of the U(2) integral defining `exp f_u` (all `V_j = I`).
pub fn exp_f_u_quadrature(
    k: &SaddleConstants,
    u: &[[Complex64; 2]],
    p: Boundary,
    nv: usize,
    ntheta: usize,
) -> Complex64 {
    let (u1, u2) = means(u);
    let (x1, x2) = p.x(k);
    let (uh, x) = (Mat2::diag(u1, u2), Mat2::diag(x1, x2));
    quad_u2(|q| (-(*q * uh * q.adjoint() * x).trace()).exp(), nv, ntheta)
}

/// Direct quadrature of the U(1,1) integral defining `exp f_b` (all `T_j = I`).
pub fn exp_f_b_quadrature(
    k: &SaddleConstants,
    b: &[[Complex64; 2]],
    p: Boundary,
    cutoff: f64,
    nsigma: usize,
) -> Result<Complex64> {
    let (b1, b2) = means(b);
    let (x1, x2) = p.x(k);
    let (bh, x) = (Mat2::diag(b1, -b2), Mat2::diag(x1, x2));
    quad_u11(
        |s| (*s * bh * s.inverse() * x).trace().exp(),
        cutoff,
        nsigma,
    )
}

/// `(u, b)` at saddle point 1: `Û_j = B̂_j = L_±`.
pub fn saddle_one(k: &SaddleConstants, sites: usize) -> (Vec<[Complex64; 2]>, Vec<[Complex64; 2]>) {
    (
        vec![[k.a_plus, k.a_minus]; sites],
        vec![[k.a_plus, -k.a_minus]; sites],
    )
}

/// First-order coefficients of `f_u^{(1)}`, `f_b^{(1)}` and the mixed second-order
/// coefficient of `D` at saddle point 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma7 {
    pub c1: Complex64,
    pub c2: Complex64,
    pub d2: Complex64,
    pub a3: Complex64,
}

pub fn lemma7_coefficients(setup: &FunctionalSetup, p: Boundary) -> Result<Lemma7> {
    let k = &setup.consts;
    let theta = p.theta(k);
    if theta.norm() == 0.0 {
        return Err(Error::InvalidParam(
            "theta vanishes (xi1 = xi2 and eps = 0)".into(),
        ));
    }
    let n = setup.sites() as f64;
    let phi = k.c0 * theta;
    let (ep, em) = ((I * phi).exp(), (-I * phi).exp());
    let e = ep - em;
    let pre = |a: Complex64| I * a / (n * k.rho0);
    Ok(Lemma7 {
        c1: pre(k.a_plus) * (-I * ep / e - 2.0 * phi / (e * e)),
        c2: pre(k.a_minus) * (I * em / e + 2.0 * phi / (e * e)),
        d2: pre(k.a_minus),
        a3: a3_closed(setup),
    })
}

/// The fluctuation contribution at saddle 1, summed over all type-I points.
pub fn lemma6_value(k: &SaddleConstants, p: Boundary) -> Complex64 {
    let theta = p.theta(k);
    let phi = k.c0 * theta;
    let (ep, em) = ((I * phi).exp(), (-I * phi).exp());
    let d = 2.0 * theta * k.rho0;
    (-em * em + 2.0 * I * phi * em / (ep - em)) / (d * d)
}

/// `∂²G₂^{+-}/∂ξ1'∂ξ2'` assembled from [`lemma6_value`] and the boundary
/// derivatives at saddle 1.
pub fn g2_pm_second_derivative(k: &SaddleConstants, p: Boundary) -> Complex64 {
    let (u, b) = saddle_one(k, 1);
    let fu = f_u1(k, &u, p);
    let fb = f_b1(k, &b, p);
    lemma6_value(k, p) + I * k.a_minus * fu / k.rho0 - I * k.a_plus * fb / k.rho0 - fb * fu
}

/// Compact form `-1/ρ² + (1 - e^{-2ic0θ}) / (2ρθ)²` of the same quantity.
pub fn g2_pm_second_derivative_compact(k: &SaddleConstants, p: Boundary) -> Complex64 {
    let theta = p.theta(k);
    let d = 2.0 * k.rho0 * theta;
    -1.0 / (k.rho0 * k.rho0) + (1.0 - (-2.0 * I * k.c0 * theta).exp()) / (d * d)
}

/// `(a_+² + a_-² + 2) / (4π² ρ0²)`, which is 1 for every `λ0`.
pub fn closure_constant(k: &SaddleConstants) -> f64 {
    let num = k.a_plus * k.a_plus + k.a_minus * k.a_minus + 2.0;
    num.re / (4.0 * std::f64::consts::PI.powi(2) * k.rho0 * k.rho0)
}

/// `F_2` at finite `ε` from the `++` limit and the assembled `+-` derivative.
pub fn closure_at(k: &SaddleConstants, xi1: f64, xi2: f64, eps: f64) -> f64 {
    let pp = (k.a_plus * k.a_plus + k.a_minus * k.a_minus).re / (k.rho0 * k.rho0);
    let pm = 2.0 * g2_pm_second_derivative(k, Boundary::new(xi1, xi2, eps)).re;
    (pp - pm) / (4.0 * std::f64::consts::PI.powi(2))
}

pub const CLOSURE_EPS: [f64; 3] = [1e-6, 1e-7, 1e-8];

/// [`closure_at`] extrapolated to `ε = 0` from [`CLOSURE_EPS`].
pub fn closure_identity(xi1: f64, xi2: f64, lambda0: f64) -> Result<f64> {
    let k = SaddleConstants::new_inner(lambda0)?;
    if xi1 == xi2 {
        return Err(Error::InvalidParam("closure needs xi1 != xi2".into()));
    }
    let w = lagrange_weights_at_zero(&CLOSURE_EPS);
    Ok(CLOSURE_EPS
        .iter()
        .zip(&w)
        .map(|(&e, &wi)| wi * closure_at(&k, xi1, xi2, e))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_f_u_degenerate_limit() {
        let k = SaddleConstants::new(0.3).unwrap();
        let p = Boundary::new(0.2, -0.1, 0.5);
        let u = [[k.a_plus, k.a_plus]];
        let (x1, x2) = p.x(&k);
        let direct = (-(k.a_plus * (x1 + x2))).exp();
        assert!((exp_f_u(&k, &u, p) - direct).norm() < 1e-14);
        assert!((f_u1(&k, &u, p) + I * k.a_plus / k.rho0).norm() < 1e-14);
    }

    #[test]
    fn d2_at_center() {
        let setup = FunctionalSetup::new(1, 2, 0.2, 0.0).unwrap();
        let c = lemma7_coefficients(&setup, Boundary::new(0.0, 0.5, 0.1)).unwrap();
        assert!((c.d2 - Complex64::new(0.0, -std::f64::consts::FRAC_PI_2)).norm() < 1e-14);
    }
}
