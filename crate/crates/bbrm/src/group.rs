//! Integrals over U(2) and U(1,1) with the normalized measures
//! `dtheta / 2pi * 2v dv` and `dsigma / 2pi * 2t dt` in the parameterizations of
//! [`Mat2::rotation_cartesian`] and [`Mat2::boost`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::quad::{composite, gauss_legendre};

/// `(e^q - 1) / q`, stable near `q = 0`.
pub fn phi1(q: Complex64) -> Complex64 {
    if q.norm() < 1e-5 {
        Complex64::new(1.0, 0.0) + q / 2.0 + q * q / 6.0 + q * q * q / 24.0
    } else {
        (q.exp() - 1.0) / q
    }
}

/// Gauss-Legendre in `v^2` on `[0, 1]` times the trapezoid rule in `theta`.
pub fn quad_u2(f: impl Fn(&Mat2) -> Complex64, nv: usize, ntheta: usize) -> Complex64 {
    let (x, w) = gauss_legendre(nv);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..ntheta {
        let theta = 2.0 * PI * k as f64 / ntheta as f64;
        let e = Complex64::from_polar(1.0, theta);
        for (xi, wi) in x.iter().zip(&w) {
            let v2 = 0.5 * (xi + 1.0);
            let u = Mat2::rotation_cartesian(e * v2.sqrt());
            acc += f(&u) * (0.5 * wi);
        }
    }
    acc / ntheta as f64
}

/// `∫ exp{r Tr C U* D U} dμ(U)` for diagonal `C`, `D`.
pub fn hciz_u2(c: [Complex64; 2], d: [Complex64; 2], r: Complex64) -> Complex64 {
    let a = r * (c[0] * d[0] + c[1] * d[1]);
    let q = -r * (c[0] - c[1]) * (d[0] - d[1]);
    a.exp() * phi1(q)
}

/// Integral over U(1,1) with `t` cut at `cutoff`. Panels are refined until two
/// successive estimates agree; the cutoff is then doubled once, and disagreement
/// means the integrand does not decay.
pub fn quad_u11(f: impl Fn(&Mat2) -> Complex64, cutoff: f64, nsigma: usize) -> Result<Complex64> {
    let eval = |tmax: f64, panels: usize| {
        let (t, w) = composite(0.0, tmax, panels, 16);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..nsigma {
            let sigma = 2.0 * PI * k as f64 / nsigma as f64;
            for (ti, wi) in t.iter().zip(&w) {
                acc += f(&Mat2::boost(*ti, sigma)) * (2.0 * ti * wi);
            }
        }
        acc / nsigma as f64
    };
    let converged = |tmax: f64| -> Result<(Complex64, usize)> {
        let mut panels = 16;
        let mut prev = eval(tmax, panels);
        while panels < 4096 {
            panels *= 2;
            let next = eval(tmax, panels);
            if !next.re.is_finite() || !next.im.is_finite() {
                return Err(Error::Divergent("integrand overflows on U(1,1)".into()));
            }
            if (next - prev).norm() <= 1e-11 * next.norm().max(1e-300) {
                return Ok((next, panels));
            }
            prev = next;
        }
        Ok((prev, panels))
    };
    let (base, _) = converged(cutoff)?;
    let (doubled, _) = converged(2.0 * cutoff)?;
    if (doubled - base).norm() > 1e-8 * doubled.norm().max(base.norm()) {
        return Err(Error::Divergent(format!(
            "tail beyond t = {cutoff} changes the integral by {:e}",
            (doubled - base).norm()
        )));
    }
    Ok(doubled)
}

/// `∫ exp{-r Tr C T^{-1} D T} dν(T)`; needs `Re r (c1 - c2)(d1 - d2) > 0`.
pub fn hciz_u11(c: [Complex64; 2], d: [Complex64; 2], r: Complex64) -> Result<Complex64> {
    let k = r * (c[0] - c[1]) * (d[0] - d[1]);
    if !(k.re > 0.0) {
        return Err(Error::Divergent(format!(
            "Re r(c1-c2)(d1-d2) = {} is not positive",
            k.re
        )));
    }
    Ok((-r * (c[0] * d[0] + c[1] * d[1])).exp() / k)
}
