//! The determinant `D = det(αΔ ⊗ I_4 + I + blockdiag(U_j^{-1} ⊗ B_j^{-1}))` and its
//! behavior near the saddle points.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::functionals::FunctionalSetup;
use super::minimize::{enumerate_saddles, SaddleLabel};
use crate::error::{Error, Result};
use crate::lattice::{laplacian, Lattice};
use crate::mat2::Mat2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn d_matrix(lattice: &Lattice, alpha: f64, u: &[Mat2], b: &[Mat2]) -> Result<DMatrix<Complex64>> {
    let n = lattice.len();
    if u.len() != n || b.len() != n {
        return Err(Error::InvalidParam(format!(
            "expected {n} matrices per list, got {} and {}",
            u.len(),
            b.len()
        )));
    }
    let lap = laplacian(lattice);
    let mut m = DMatrix::from_element(4 * n, 4 * n, ZERO);
    for j in 0..n {
        for k in 0..n {
            let v = alpha * lap[j * n + k];
            if v != 0.0 {
                for i in 0..4 {
                    m[(4 * j + i, 4 * k + i)] += v;
                }
            }
        }
    }
    for j in 0..n {
        let singular = |x: &Mat2| x.det().norm() < 1e-300;
        if singular(&u[j]) || singular(&b[j]) {
            return Err(Error::InvalidParam(format!("singular block at site {j}")));
        }
        let (ui, bi) = (u[j].inverse(), b[j].inverse());
        for a in 0..2 {
            for c in 0..2 {
                for a2 in 0..2 {
                    for c2 in 0..2 {
                        m[(4 * j + 2 * a + c, 4 * j + 2 * a2 + c2)] += ui.0[a][a2] * bi.0[c][c2];
                    }
                }
                m[(4 * j + 2 * a + c, 4 * j + 2 * a + c)] += ONE;
            }
        }
    }
    Ok(m)
}

/// `D(U, B)` with the Kronecker index `4 j + 2 a + b` (`a` for `U`, `b` for `B`).
pub fn superdeterminant_d(
    lattice: &Lattice,
    alpha: f64,
    u: &[Mat2],
    b: &[Mat2],
) -> Result<Complex64> {
    Ok(d_matrix(lattice, alpha, u, b)?.determinant())
}

/// Hadamard bound (product of row norms) of the matrix behind `D`; the natural
/// scale for deciding whether `D` is zero.
pub fn superdeterminant_scale(
    lattice: &Lattice,
    alpha: f64,
    u: &[Mat2],
    b: &[Mat2],
) -> Result<f64> {
    let m = d_matrix(lattice, alpha, u, b)?;
    Ok(m.row_iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .product())
}

/// Which printed form of `M_±` to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MForm {
    /// `α a² Δ + (1 + a²) I`
    Scaled,
    /// `α Δ + (1 + a^{-2}) I`
    Inverse,
}

pub fn m_matrix(lattice: &Lattice, alpha: f64, a: Complex64, form: MForm) -> DMatrix<Complex64> {
    let n = lattice.len();
    let lap = laplacian(lattice);
    let (scale, diag) = match form {
        MForm::Scaled => (a * a, ONE + a * a),
        MForm::Inverse => (ONE, ONE + (a * a).inv()),
    };
    DMatrix::from_fn(n, n, |j, k| {
        scale * alpha * lap[j * n + k] + if j == k { diag } else { ZERO }
    })
}

/// A point of the joint (U, B) space in the coordinates used near the saddles:
/// `U_j = V_j^* diag(u_j) V_j`, `B_j = T_j^{-1} diag(b_j1, -b_j2) T_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleConfig {
    pub u: Vec<[Complex64; 2]>,
    pub v: Vec<Mat2>,
    pub b: Vec<[Complex64; 2]>,
    pub t: Vec<Mat2>,
}

impl SaddleConfig {
    /// The configuration of `label` with `B̂_j = L_±`, `T_j = I`. For types II and
    /// III, where `V` is free, the non-gauge sites get a fixed generic rotation.
    pub fn at_label(setup: &FunctionalSetup, label: &SaddleLabel) -> Self {
        let n = setup.sites();
        let k = &setup.consts;
        let u = label
            .angles(n, k.phi_plus)
            .iter()
            .map(|p| {
                [
                    Complex64::from_polar(1.0, p[0]),
                    Complex64::from_polar(1.0, p[1]),
                ]
            })
            .collect();
        let swap = Mat2::rotation(std::f64::consts::FRAC_PI_2, 0.0);
        let v = match label {
            SaddleLabel::TypeI(s) => s
                .iter()
                .map(|&x| if x == s[0] { Mat2::IDENTITY } else { swap })
                .collect(),
            _ => (0..n)
                .map(|j| {
                    if j == 0 {
                        Mat2::IDENTITY
                    } else {
                        Mat2::rotation(0.7 + 0.1 * j as f64, 0.3 * j as f64)
                    }
                })
                .collect(),
        };
        SaddleConfig {
            u,
            v,
            b: vec![[k.a_plus, -k.a_minus]; n],
            t: vec![Mat2::IDENTITY; n],
        }
    }

    pub fn matrices(&self) -> (Vec<Mat2>, Vec<Mat2>) {
        let u = self
            .u
            .iter()
            .zip(&self.v)
            .map(|(d, v)| v.adjoint() * Mat2::diag(d[0], d[1]) * *v)
            .collect();
        let b = self
            .b
            .iter()
            .zip(&self.t)
            .map(|(d, t)| t.inverse() * Mat2::diag(d[0], -d[1]) * *t)
            .collect();
        (u, b)
    }

    pub fn d(&self, lattice: &Lattice, alpha: f64) -> Result<Complex64> {
        let (u, b) = self.matrices();
        superdeterminant_d(lattice, alpha, &u, &b)
    }
}

/// One real direction of the tilde coordinates at a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `u_{j,l} -> u_{j,l} e^{i h}`
    U(usize, usize),
    /// `b_{j,l} -> b_{j,l} (1 + h)`
    B(usize, usize),
    /// `V_j -> V_j R(h)` with the generator picked by the second index
    V(usize, usize),
    /// `T_j -> T_j S(h)` likewise
    T(usize, usize),
}

impl Direction {
    pub fn all(sites: usize) -> Vec<Direction> {
        let mut out = Vec::new();
        for j in 0..sites {
            for l in 0..2 {
                out.push(Direction::U(j, l));
                out.push(Direction::B(j, l));
                if j > 0 {
                    out.push(Direction::V(j, l));
                    out.push(Direction::T(j, l));
                }
            }
        }
        out
    }

    pub fn apply(&self, c: &SaddleConfig, h: f64) -> SaddleConfig {
        let mut c = c.clone();
        let phase = |l: usize| {
            if l == 0 {
                0.0
            } else {
                std::f64::consts::FRAC_PI_2
            }
        };
        match *self {
            Direction::U(j, l) => c.u[j][l] *= Complex64::from_polar(1.0, h),
            Direction::B(j, l) => c.b[j][l] *= 1.0 + h,
            Direction::V(j, l) => c.v[j] = c.v[j] * Mat2::rotation(h, phase(l)),
            Direction::T(j, l) => c.t[j] = c.t[j] * Mat2::boost(h, phase(l)),
        }
        c
    }
}

/// Largest central first difference of `D` over every tilde direction at `label`.
pub fn saddle_derivative_check(
    setup: &FunctionalSetup,
    label: &SaddleLabel,
    h: f64,
) -> Result<f64> {
    if !(1e-6..=1e-3).contains(&h) {
        return Err(Error::InvalidParam(format!(
            "step {h} outside [1e-6, 1e-3]"
        )));
    }
    let c = SaddleConfig::at_label(setup, label);
    let mut worst = 0.0f64;
    for dir in Direction::all(setup.sites()) {
        let plus = dir.apply(&c, h).d(&setup.lattice, setup.alpha)?;
        let minus = dir.apply(&c, -h).d(&setup.lattice, setup.alpha)?;
        worst = worst.max(((plus - minus) / (2.0 * h)).norm());
    }
    Ok(worst)
}

/// `|D| / scale` and the derivative residual at every enumerated label.
pub fn saddle_table(setup: &FunctionalSetup, h: f64) -> Result<Vec<(SaddleLabel, f64, f64)>> {
    enumerate_saddles(setup.sites())
        .into_iter()
        .map(|label| {
            let c = SaddleConfig::at_label(setup, &label);
            let (u, b) = c.matrices();
            let rel = superdeterminant_d(&setup.lattice, setup.alpha, &u, &b)?.norm()
                / superdeterminant_scale(&setup.lattice, setup.alpha, &u, &b)?;
            let der = saddle_derivative_check(setup, &label, h)?;
            Ok((label, rel, der))
        })
        .collect()
}

/// Determinant of `αΔ` with the first row and column removed.
pub fn laplacian_minor(lattice: &Lattice, alpha: f64) -> f64 {
    let n = lattice.len();
    if n == 1 {
        return 1.0;
    }
    let lap = laplacian(lattice);
    DMatrix::from_fn(n - 1, n - 1, |r, c| alpha * lap[(r + 1) * n + c + 1]).determinant()
}

/// `a3 = i |det(αΔ + (1 + a_+^{-2}) I)|² det(αΔ)_1²`.
pub fn a3_closed(setup: &FunctionalSetup) -> Complex64 {
    let m = m_matrix(
        &setup.lattice,
        setup.alpha,
        setup.consts.a_plus,
        MForm::Inverse,
    );
    let minor = laplacian_minor(&setup.lattice, setup.alpha);
    Complex64::i() * m.determinant().norm_sqr() * minor * minor
}

/// Central mixed second difference `∂²D / ∂ũ_{j,2} ∂b̃_{k,2}` at saddle point 1.
pub fn a3_finite_difference(
    setup: &FunctionalSetup,
    j: usize,
    k: usize,
    h: f64,
) -> Result<Complex64> {
    let c = SaddleConfig::at_label(setup, &SaddleLabel::TypeI(vec![true; setup.sites()]));
    let (du, db) = (Direction::U(j, 1), Direction::B(k, 1));
    let at = |s: f64, t: f64| {
        db.apply(&du.apply(&c, s * h), t * h)
            .d(&setup.lattice, setup.alpha)
    };
    Ok((at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_blocks_without_coupling() {
        let setup = FunctionalSetup::new(1, 2, 0.0, 0.0).unwrap();
        let eye = vec![Mat2::IDENTITY; 2];
        let d = superdeterminant_d(&setup.lattice, 0.0, &eye, &eye).unwrap();
        assert!((d - Complex64::new(256.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn vanishes_at_saddle_one() {
        let setup = FunctionalSetup::new(1, 2, 0.2, 0.5).unwrap();
        let c = SaddleConfig::at_label(&setup, &SaddleLabel::TypeI(vec![true, true]));
        assert!(c.d(&setup.lattice, setup.alpha).unwrap().norm() < 1e-12);
    }

    #[test]
    fn m_forms_agree_in_modulus() {
        let setup = FunctionalSetup::new(1, 3, 0.2, 0.7).unwrap();
        let a = setup.consts.a_plus;
        let s = m_matrix(&setup.lattice, 0.2, a, MForm::Scaled).determinant();
        let i = m_matrix(&setup.lattice, 0.2, a, MForm::Inverse).determinant();
        assert!((s.norm() - i.norm()).abs() < 1e-12 * s.norm());
    }

    #[test]
    fn singular_block_rejected() {
        let setup = FunctionalSetup::new(1, 1, 0.0, 0.0).unwrap();
        let zero = Mat2::diag(ZERO, ONE);
        assert!(superdeterminant_d(&setup.lattice, 0.0, &[zero], &[Mat2::IDENTITY]).is_err());
    }
}
