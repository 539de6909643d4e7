//! 2x2 complex matrices.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn diag(a: Complex64, b: Complex64) -> Mat2 {
        Mat2([[a, ZERO], [ZERO, b]])
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Mat2 {
        let m = &self.0;
        let d = self.det();
        Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Element of U(2) with `|U_12| = |sin y|`:
    /// `[[cos y, sin y e^{i theta}], [-sin y e^{-i theta}, cos y]]`.
    pub fn rotation(y: f64, theta: f64) -> Mat2 {
        let e = Complex64::from_polar(1.0, theta);
        let (s, c) = y.sin_cos();
        Mat2([
            [Complex64::new(c, 0.0), e * s],
            [-e.conj() * s, Complex64::new(c, 0.0)],
        ])
    }

    /// Element of U(1,1): `[[sqrt(1+t^2), t e^{i sigma}], [t e^{-i sigma}, sqrt(1+t^2)]]`.
    pub fn boost(t: f64, sigma: f64) -> Mat2 {
        let e = Complex64::from_polar(1.0, sigma);
        let s = Complex64::new((1.0 + t * t).sqrt(), 0.0);
        Mat2([[s, e * t], [e.conj() * t, s]])
    }

    /// `[[sqrt(1-|w|^2), w], [-conj w, sqrt(1-|w|^2)]]` for `|w| <= 1`.
    pub fn rotation_cartesian(w: Complex64) -> Mat2 {
        let c = Complex64::new((1.0 - w.norm_sqr()).max(0.0).sqrt(), 0.0);
        Mat2([[c, w], [-w.conj(), c]])
    }

    /// `[[sqrt(1+|w|^2), w], [conj w, sqrt(1+|w|^2)]]`.
    pub fn boost_cartesian(w: Complex64) -> Mat2 {
        let c = Complex64::new((1.0 + w.norm_sqr()).sqrt(), 0.0);
        Mat2([[c, w], [w.conj(), c]])
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut out = self.0;
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += o.0[r][c];
            }
        }
        Mat2(out)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(Complex64::new(-1.0, 0.0))
    }
}
