//! The functionals `K_m`, `L_m` and `L~_m` with analytic gradients of their real parts.

use num_complex::Complex64;

use super::SaddleConstants;
use crate::error::{Error, Result};
use crate::lattice::{build_lattice, Lattice};
use crate::mat2::Mat2;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct FunctionalSetup {
    pub lattice: Lattice,
    pub alpha: f64,
    pub consts: SaddleConstants,
}

impl FunctionalSetup {
    pub fn new(d: usize, m: usize, alpha: f64, lambda0: f64) -> Result<Self> {
        let lattice = build_lattice(d, m)?;
        if !(alpha >= 0.0 && alpha < 1.0 / (4.0 * d as f64)) {
            return Err(Error::InvalidParam(format!(
                "alpha = {alpha} outside [0, 1/(4d))"
            )));
        }
        Ok(FunctionalSetup {
            lattice,
            alpha,
            consts: SaddleConstants::new_inner(lambda0)?,
        })
    }

    pub fn sites(&self) -> usize {
        self.lattice.len()
    }
}

/// Coordinates on the compact side: `u_{j,l} = e^{i phi[j][l]}`, `V_j = rotation(rot[j])`.
/// `rot[0]` is the gauge-fixed identity and is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactCoords {
    pub phi: Vec<[f64; 2]>,
    pub rot: Vec<(f64, f64)>,
}

/// Coordinates on the noncompact side: `b_{j,1} = r[j][0] e^{i phi_+}`,
/// `b_{j,2} = r[j][1] e^{-i phi_+}`, `T_j = boost(boost[j])`. `boost[0]` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostCoords {
    pub r: Vec<[f64; 2]>,
    pub boost: Vec<(f64, f64)>,
}

/// Coordinates for `L~_m`: `a_{j,l} = r[j][l] e^{i phi_+}`, `V~_j = rotation(rot[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCoords {
    pub r: Vec<[f64; 2]>,
    pub rot: Vec<(f64, f64)>,
}

/// Flat layout shared by all coordinate kinds: the `2 |Λ|` diagonal values, then
/// the pairs of sites `1..|Λ|`.
fn to_flat(diag: &[[f64; 2]], pairs: &[(f64, f64)]) -> Vec<f64> {
    let mut x: Vec<f64> = diag.iter().flat_map(|d| d.iter().copied()).collect();
    for &(a, b) in pairs.iter().skip(1) {
        x.push(a);
        x.push(b);
    }
    x
}

fn from_flat(x: &[f64], sites: usize) -> (Vec<[f64; 2]>, Vec<(f64, f64)>) {
    let diag = (0..sites).map(|j| [x[2 * j], x[2 * j + 1]]).collect();
    let mut pairs = vec![(0.0, 0.0)];
    for j in 1..sites {
        let o = 2 * sites + 2 * (j - 1);
        pairs.push((x[o], x[o + 1]));
    }
    (diag, pairs)
}

pub fn flat_len(sites: usize) -> usize {
    4 * sites - 2
}

macro_rules! flat_impl {
    ($t:ident, $diag:ident, $pairs:ident) => {
        impl $t {
            pub fn to_flat(&self) -> Vec<f64> {
                to_flat(&self.$diag, &self.$pairs)
            }
            pub fn from_flat(x: &[f64], sites: usize) -> Self {
                let (d, p) = from_flat(x, sites);
                $t {
                    $diag: d,
                    $pairs: p,
                }
            }
        }
    };
}
flat_impl!(CompactCoords, phi, rot);
flat_impl!(BoostCoords, r, boost);
flat_impl!(RadialCoords, r, rot);

/// Offsets of `(y, theta)` or `(t, sigma)` of site `j >= 1` in the flat layout.
fn pair_offset(sites: usize, j: usize) -> usize {
    2 * sites + 2 * (j - 1)
}

/// `V`, `dV/dy`, `dV/dtheta` for [`Mat2::rotation`].
fn rotation_jet(y: f64, theta: f64) -> [Mat2; 3] {
    let e = Complex64::from_polar(1.0, theta);
    let (s, c) = y.sin_cos();
    let ss = Complex64::new(s, 0.0);
    let z = Complex64::new(0.0, 0.0);
    [
        Mat2::rotation(y, theta),
        Mat2([[-ss, e * c], [-e.conj() * c, -ss]]),
        Mat2([[z, I * e * s], [I * e.conj() * s, z]]),
    ]
}

/// `[T, dT/dt, dT/dsigma, T^{-1}, dT^{-1}/dt, dT^{-1}/dsigma]` for [`Mat2::boost`].
fn boost_jet(t: f64, sigma: f64) -> [Mat2; 6] {
    let e = Complex64::from_polar(1.0, sigma);
    let s = (1.0 + t * t).sqrt();
    let z = Complex64::new(0.0, 0.0);
    let sc = Complex64::new(s, 0.0);
    let ts = Complex64::new(t / s, 0.0);
    [
        Mat2([[sc, e * t], [e.conj() * t, sc]]),
        Mat2([[ts, e], [e.conj(), ts]]),
        Mat2([[z, I * e * t], [-I * e.conj() * t, z]]),
        Mat2([[sc, -e * t], [-e.conj() * t, sc]]),
        Mat2([[ts, -e], [-e.conj(), ts]]),
        Mat2([[z, -I * e * t], [I * e.conj() * t, z]]),
    ]
}

/// For every edge `(j, k)`: the weight `|(V_k V_j^*)_12|^2` and its gradient with
/// respect to the rotation parameters of `j` and `k` (`[dyj, dthj, dyk, dthk]`).
fn rotation_weights(lat: &Lattice, rot: &[(f64, f64)]) -> Vec<(f64, [f64; 4])> {
    let jets: Vec<Option<[Mat2; 3]>> = rot
        .iter()
        .enumerate()
        .map(|(j, &(y, th))| {
            if j == 0 {
                None
            } else {
                Some(rotation_jet(y, th))
            }
        })
        .collect();
    let base = |j: usize| jets[j].map(|x| x[0]).unwrap_or(Mat2::IDENTITY);
    lat.edges
        .iter()
        .map(|&(j, k)| {
            let (vj, vk) = (base(j), base(k));
            // M_12 = sum_c (V_k)_{1c} conj((V_j)_{2c})
            let m12 =
                |a: &Mat2, b: &Mat2| a.0[0][0] * b.0[1][0].conj() + a.0[0][1] * b.0[1][1].conj();
            let m = m12(&vk, &vj);
            let dp = |dm: Complex64| 2.0 * (m.conj() * dm).re;
            let mut g = [0.0; 4];
            if let Some(jet) = jets[j] {
                g[0] = dp(m12(&vk, &jet[1]));
                g[1] = dp(m12(&vk, &jet[2]));
            }
            if let Some(jet) = jets[k] {
                g[2] = dp(m12(&jet[1], &vj));
                g[3] = dp(m12(&jet[2], &vj));
            }
            (m.norm_sqr(), g)
        })
        .collect()
}

/// Same as [`rotation_weights`] for `|(T_k T_j^{-1})_12|^2`.
fn boost_weights(lat: &Lattice, boost: &[(f64, f64)]) -> Vec<(f64, [f64; 4])> {
    let jets: Vec<Option<[Mat2; 6]>> = boost
        .iter()
        .enumerate()
        .map(|(j, &(t, s))| if j == 0 { None } else { Some(boost_jet(t, s)) })
        .collect();
    let tk = |k: usize| jets[k].map(|x| x[0]).unwrap_or(Mat2::IDENTITY);
    let tinv = |j: usize| jets[j].map(|x| x[3]).unwrap_or(Mat2::IDENTITY);
    lat.edges
        .iter()
        .map(|&(j, k)| {
            // M_12 = sum_c (T_k)_{1c} (T_j^{-1})_{c2}
            let m12 = |a: &Mat2, b: &Mat2| a.0[0][0] * b.0[0][1] + a.0[0][1] * b.0[1][1];
            let m = m12(&tk(k), &tinv(j));
            let dq = |dm: Complex64| 2.0 * (m.conj() * dm).re;
            let mut g = [0.0; 4];
            if let Some(jet) = jets[j] {
                g[0] = dq(m12(&tk(k), &jet[4]));
                g[1] = dq(m12(&tk(k), &jet[5]));
            }
            if let Some(jet) = jets[k] {
                g[2] = dq(m12(&jet[1], &tinv(j)));
                g[3] = dq(m12(&jet[2], &tinv(j)));
            }
            (m.norm_sqr(), g)
        })
        .collect()
}

fn scatter_pair_grad(grad: &mut [f64], sites: usize, j: usize, k: usize, coef: f64, g: &[f64; 4]) {
    if j > 0 {
        let o = pair_offset(sites, j);
        grad[o] += coef * g[0];
        grad[o + 1] += coef * g[1];
    }
    if k > 0 {
        let o = pair_offset(sites, k);
        grad[o] += coef * g[2];
        grad[o + 1] += coef * g[3];
    }
}

fn wrap_angle(phi: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut p = phi.rem_euclid(two_pi);
    if p > std::f64::consts::PI {
        p -= two_pi;
    }
    p
}

impl FunctionalSetup {
    /// `K_m`. The real part is `>= 0` and vanishes on the saddle set.
    pub fn eval_km(&self, c: &CompactCoords) -> Complex64 {
        let (alpha, l0) = (self.alpha, self.consts.lambda0);
        let u: Vec<[Complex64; 2]> = c
            .phi
            .iter()
            .map(|p| {
                [
                    Complex64::from_polar(1.0, p[0]),
                    Complex64::from_polar(1.0, p[1]),
                ]
            })
            .collect();
        let weights = rotation_weights(&self.lattice, &c.rot);
        let mut acc = Complex64::new(self.consts.u_star(self.sites()), 0.0);
        for (e, &(j, k)) in self.lattice.edges.iter().enumerate() {
            for l in 0..2 {
                let d = u[j][l] - u[k][l];
                acc += alpha / 2.0 * d * d;
            }
            acc += alpha * weights[e].0 * (u[j][0] - u[j][1]) * (u[k][0] - u[k][1]);
        }
        for (j, uj) in u.iter().enumerate() {
            for l in 0..2 {
                acc -= uj[l] * uj[l] / 2.0 - I * l0 * uj[l] - I * wrap_angle(c.phi[j][l]);
            }
        }
        acc
    }

    /// `Re K_m` and its gradient in the flat layout of [`CompactCoords`].
    pub fn grad_km(&self, c: &CompactCoords) -> (f64, Vec<f64>) {
        let (alpha, l0) = (self.alpha, self.consts.lambda0);
        let n = self.sites();
        let mut g = vec![0.0; flat_len(n)];
        let u: Vec<[Complex64; 2]> = c
            .phi
            .iter()
            .map(|p| {
                [
                    Complex64::from_polar(1.0, p[0]),
                    Complex64::from_polar(1.0, p[1]),
                ]
            })
            .collect();
        let mut val = 0.0;
        for j in 0..n {
            for l in 0..2 {
                let (s, co) = c.phi[j][l].sin_cos();
                val += (s - l0 / 2.0).powi(2);
                g[2 * j + l] += 2.0 * (s - l0 / 2.0) * co;
            }
        }
        let weights = rotation_weights(&self.lattice, &c.rot);
        for (e, &(j, k)) in self.lattice.edges.iter().enumerate() {
            for l in 0..2 {
                let d = u[j][l] - u[k][l];
                val += alpha / 2.0 * (d * d).re;
                g[2 * j + l] += alpha * (d * I * u[j][l]).re;
                g[2 * k + l] -= alpha * (d * I * u[k][l]).re;
            }
            let (p, pg) = weights[e];
            let (dj, dk) = (u[j][0] - u[j][1], u[k][0] - u[k][1]);
            val += alpha * p * (dj * dk).re;
            g[2 * j] += alpha * p * (I * u[j][0] * dk).re;
            g[2 * j + 1] -= alpha * p * (I * u[j][1] * dk).re;
            g[2 * k] += alpha * p * (I * u[k][0] * dj).re;
            g[2 * k + 1] -= alpha * p * (I * u[k][1] * dj).re;
            scatter_pair_grad(&mut g, n, j, k, alpha * (dj * dk).re, &pg);
        }
        (val, g)
    }

    /// Single-site constants: `b_+` for the first entry, and its conjugate, the
    /// value of the second entry's term at `b = conj a_+`.
    fn b_consts(&self) -> (Complex64, Complex64) {
        let b = self.consts.b_plus();
        (b, b.conj())
    }

    fn lm_entries(&self, c: &BoostCoords) -> Vec<[Complex64; 2]> {
        let w = Complex64::from_polar(1.0, self.consts.phi_plus);
        c.r.iter().map(|r| [w * r[0], w.conj() * r[1]]).collect()
    }

    /// `L_m = B_+(b_1) + B_-(b_2) + alpha sum |(T_k T_j^{-1})_12|^2 (b_{j1}+b_{j2})(b_{k1}+b_{k2})`.
    pub fn eval_lm(&self, c: &BoostCoords) -> Complex64 {
        let (alpha, l0) = (self.alpha, self.consts.lambda0);
        let b = self.lm_entries(c);
        let (bp, bm) = self.b_consts();
        let weights = boost_weights(&self.lattice, &c.boost);
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, &(j, k)) in self.lattice.edges.iter().enumerate() {
            for l in 0..2 {
                let d = b[j][l] - b[k][l];
                acc -= alpha / 2.0 * d * d;
            }
            acc += alpha * weights[e].0 * (b[j][0] + b[j][1]) * (b[k][0] + b[k][1]);
        }
        for bj in &b {
            acc += bj[0] * bj[0] / 2.0 - I * l0 * bj[0] - bj[0].ln() - bp;
            acc += bj[1] * bj[1] / 2.0 + I * l0 * bj[1] - bj[1].ln() - bm;
        }
        acc
    }

    /// `Re L_m` and its gradient in the flat layout of [`BoostCoords`].
    pub fn grad_lm(&self, c: &BoostCoords) -> (f64, Vec<f64>) {
        let (alpha, l0) = (self.alpha, self.consts.lambda0);
        let n = self.sites();
        let w = Complex64::from_polar(1.0, self.consts.phi_plus);
        let dir = [w, w.conj()];
        let b = self.lm_entries(c);
        let (bp, bm) = self.b_consts();
        let mut g = vec![0.0; flat_len(n)];
        let mut val = 0.0;
        for j in 0..n {
            let site = [
                b[j][0] * b[j][0] / 2.0 - I * l0 * b[j][0] - b[j][0].ln() - bp,
                b[j][1] * b[j][1] / 2.0 + I * l0 * b[j][1] - b[j][1].ln() - bm,
            ];
            let dsite = [
                b[j][0] - I * l0 - b[j][0].inv(),
                b[j][1] + I * l0 - b[j][1].inv(),
            ];
            for l in 0..2 {
                val += site[l].re;
                g[2 * j + l] += (dsite[l] * dir[l]).re;
            }
        }
        let weights = boost_weights(&self.lattice, &c.boost);
        for (e, &(j, k)) in self.lattice.edges.iter().enumerate() {
            for l in 0..2 {
                let d = b[j][l] - b[k][l];
                val -= alpha / 2.0 * (d * d).re;
                g[2 * j + l] -= alpha * (d * dir[l]).re;
                g[2 * k + l] += alpha * (d * dir[l]).re;
            }
            let (q, qg) = weights[e];
            let (sj, sk) = (b[j][0] + b[j][1], b[k][0] + b[k][1]);
            val += alpha * q * (sj * sk).re;
            for l in 0..2 {
                g[2 * j + l] += alpha * q * (dir[l] * sk).re;
                g[2 * k + l] += alpha * q * (dir[l] * sj).re;
            }
            scatter_pair_grad(&mut g, n, j, k, alpha * (sj * sk).re, &qg);
        }
        (val, g)
    }

    fn lt_entries(&self, c: &RadialCoords) -> Vec<[Complex64; 2]> {
        let w = Complex64::from_polar(1.0, self.consts.phi_plus);
        c.r.iter().map(|r| [w * r[0], w * r[1]]).collect()
    }

    /// `L~_m`; the real part is `>= 0` and vanishes exactly when every `A_j = L_+`.
    pub fn eval_ltilde(&self, c: &RadialCoords) -> Complex64 {
        let (alpha, l0) = (self.alpha, self.consts.lambda0);
        let a = self.lt_entries(c);
        let weights = rotation_weights(&self.lattice, &c.rot);
        let mut acc = Complex64::new(-self.consts.u_star(self.sites()), 0.0);
        for (e, &(j, k)) in self.lattice.edges.iter().enumerate() {
            for l in 0..2 {
                let d = a[j][l] - a[k][l];
                acc -= alpha / 2.0 * d * d;
            }
            acc -= alpha * weights[e].0 * (a[j][0] - a[j][1]) * (a[k][0] - a[k][1]);
        }
        for aj in &a {
            for l in 0..2 {
                acc += aj[l] * aj[l] / 2.0 - I * l0 * aj[l] - aj[l].ln();
            }
        }
        acc
    }

    /// `Re L~_m` and its gradient in the flat layout of [`RadialCoords`].
    pub fn grad_ltilde(&self, c: &RadialCoords) -> (f64, Vec<f64>) {
        let (alpha, l0) = (self.alpha, self.consts.lambda0);
        let n = self.sites();
        let w = Complex64::from_polar(1.0, self.consts.phi_plus);
        let a = self.lt_entries(c);
        let mut g = vec![0.0; flat_len(n)];
        let mut val = -self.consts.u_star(n);
        for j in 0..n {
            for l in 0..2 {
                let x = a[j][l];
                val += (x * x / 2.0 - I * l0 * x - x.ln()).re;
                g[2 * j + l] += ((x - I * l0 - x.inv()) * w).re;
            }
        }
        let weights = rotation_weights(&self.lattice, &c.rot);
        for (e, &(j, k)) in self.lattice.edges.iter().enumerate() {
            for l in 0..2 {
                let d = a[j][l] - a[k][l];
                val -= alpha / 2.0 * (d * d).re;
                g[2 * j + l] -= alpha * (d * w).re;
                g[2 * k + l] += alpha * (d * w).re;
            }
            let (p, pg) = weights[e];
            let (ej, ek) = (a[j][0] - a[j][1], a[k][0] - a[k][1]);
            val -= alpha * p * (ej * ek).re;
            g[2 * j] -= alpha * p * (w * ek).re;
            g[2 * j + 1] += alpha * p * (w * ek).re;
            g[2 * k] -= alpha * p * (w * ej).re;
            g[2 * k + 1] += alpha * p * (w * ej).re;
            scatter_pair_grad(&mut g, n, j, k, -alpha * (ej * ek).re, &pg);
        }
        (val, g)
    }
}
