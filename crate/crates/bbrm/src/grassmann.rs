//! Finite Grassmann algebras with Berezin integration.
//!
//! Monomials are bitmasks over the generators `0..gens`, always stored in
//! increasing index order. A multiple integral lists its differentials left to
//! right and integrates the leftmost one first, so `∫ f dψ_k ... dψ_1` is
//! `berezin(&[k, ..., 1])` and extracts the top coefficient of `ψ_1 ... ψ_k`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::composite;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Grassmann {
    gens: usize,
    terms: BTreeMap<u64, Complex64>,
}

fn popcount(x: u64) -> u32 {
    x.count_ones()
}

/// Sign of `m_a m_b` when brought to increasing order (masks disjoint).
fn product_sign(ma: u64, mb: u64) -> f64 {
    let mut swaps = 0;
    let mut x = mb;
    while x != 0 {
        let j = x.trailing_zeros();
        swaps += popcount(ma >> (j + 1));
        x &= x - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Grassmann {
    pub fn zero(gens: usize) -> Self {
        assert!(gens <= 64, "at most 64 generators");
        Grassmann {
            gens,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(gens: usize, c: Complex64) -> Self {
        let mut g = Self::zero(gens);
        if c != ZERO {
            g.terms.insert(0, c);
        }
        g
    }

    pub fn one(gens: usize) -> Self {
        Self::scalar(gens, ONE)
    }

    pub fn generator(gens: usize, i: usize) -> Self {
        assert!(i < gens, "generator {i} out of range");
        let mut g = Self::zero(gens);
        g.terms.insert(1 << i, ONE);
        g
    }

    /// `c · g_{i_1} g_{i_2} ...` in the given order (zero on repeats).
    pub fn monomial(gens: usize, idx: &[usize], c: Complex64) -> Self {
        idx.iter().fold(Self::scalar(gens, c), |acc, &i| {
            &acc * &Self::generator(gens, i)
        })
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, mask: u64) -> Complex64 {
        self.terms.get(&mask).copied().unwrap_or(ZERO)
    }

    pub fn body(&self) -> Complex64 {
        self.coefficient(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&m| popcount(m)).max().unwrap_or(0)
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|&m| popcount(m) % 2 == 0)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.gens);
        for (&m, &v) in &self.terms {
            out.push(m, v * c);
        }
        out
    }

    fn push(&mut self, mask: u64, c: Complex64) {
        let e = self.terms.entry(mask).or_insert(ZERO);
        *e += c;
        if *e == ZERO {
            self.terms.remove(&mask);
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.gens != other.gens {
            return Err(Error::Algebra(format!(
                "algebras with {} and {} generators",
                self.gens, other.gens
            )));
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.gens);
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                if ma & mb == 0 {
                    out.push(ma | mb, ca * cb * product_sign(ma, mb));
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.push(m, c);
        }
        Ok(out)
    }

    /// `exp(x)` for even `x` with zero body.
    pub fn exp_even(&self) -> Result<Self> {
        if self.body() != ZERO {
            return Err(Error::Algebra(
                "exp_even needs a zero body; split off e^body".into(),
            ));
        }
        if !self.is_even() {
            return Err(Error::Algebra("exp_even needs an even element".into()));
        }
        let mut out = Self::one(self.gens);
        let mut t = Self::one(self.gens);
        for k in 1..=self.gens + 1 {
            t = (&t * self).scale(Complex64::new(1.0 / k as f64, 0.0));
            if t.is_zero() {
                break;
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// `f(x) = Σ f^{(k)}(body) (x - body)^k / k!` with `derivs[k] = f^{(k)}(body)`.
    pub fn map_analytic(&self, derivs: &[Complex64]) -> Result<Self> {
        let nil = self - &Self::scalar(self.gens, self.body());
        let mut out = Self::zero(self.gens);
        let mut power = Self::one(self.gens);
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate() {
            if k > 0 {
                power = &power * &nil;
                fact *= k as f64;
            }
            if power.is_zero() {
                return Ok(out);
            }
            out = &out + &power.scale(*d / fact);
        }
        if (&power * &nil).is_zero() {
            Ok(out)
        } else {
            Err(Error::Algebra(format!(
                "{} derivatives do not reach the nilpotency order",
                derivs.len()
            )))
        }
    }

    /// Repeated Berezin integration, leftmost differential first.
    pub fn berezin(&self, order: &[usize]) -> Result<Self> {
        let mut seen = 0u64;
        for &g in order {
            if g >= self.gens || seen >> g & 1 == 1 {
                return Err(Error::Algebra(format!(
                    "differential {g} repeated or out of range"
                )));
            }
            seen |= 1 << g;
        }
        let mut cur = self.clone();
        for &g in order {
            let mut next = Self::zero(self.gens);
            for (&m, &c) in &cur.terms {
                if m >> g & 1 == 1 {
                    // move g to the right end, then ∫ g dg = 1
                    let sign = if popcount(m >> (g + 1)) % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    next.push(m & !(1 << g), c * sign);
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Left derivative `∂/∂g_j`.
    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.gens);
        for (&m, &c) in &self.terms {
            if m >> j & 1 == 1 {
                let below = m & ((1u64 << j) - 1);
                let sign = if popcount(below) % 2 == 0 { 1.0 } else { -1.0 };
                out.push(m & !(1 << j), c * sign);
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = self - other;
        d.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl<'a> Mul for &'a Grassmann {
    type Output = Grassmann;
    fn mul(self, rhs: Self) -> Grassmann {
        self.try_mul(rhs).expect("mismatched Grassmann algebras")
    }
}

impl<'a> Add for &'a Grassmann {
    type Output = Grassmann;
    fn add(self, rhs: Self) -> Grassmann {
        self.try_add(rhs).expect("mismatched Grassmann algebras")
    }
}

impl<'a> Sub for &'a Grassmann {
    type Output = Grassmann;
    fn sub(self, rhs: Self) -> Grassmann {
        self.try_add(&-rhs).expect("mismatched Grassmann algebras")
    }
}

impl<'a> Neg for &'a Grassmann {
    type Output = Grassmann;
    fn neg(self) -> Grassmann {
        self.scale(-ONE)
    }
}

/// `ψ̄_j = 2j`, `ψ_j = 2j + 1`, and the measure `Π_j dψ̄_j dψ_j`.
fn pair_layout(n: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let bar: Vec<usize> = (0..n).map(|j| 2 * j).collect();
    let psi: Vec<usize> = (0..n).map(|j| 2 * j + 1).collect();
    let order = (0..n).flat_map(|j| [2 * j, 2 * j + 1]).collect();
    (bar, psi, order)
}

/// `∫ exp{-Σ A_jk ψ̄_j ψ_k} Π dψ̄_j dψ_j`, computed symbolically.
pub fn gaussian_berezin(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = a.nrows();
    if a.ncols() != n || 2 * n > 64 {
        return Err(Error::InvalidParam(format!(
            "need a square matrix with n <= 32, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let g = 2 * n;
    let (bar, psi, order) = pair_layout(n);
    let mut q = Grassmann::zero(g);
    for j in 0..n {
        for k in 0..n {
            q = &q + &Grassmann::monomial(g, &[bar[j], psi[k]], -a[(j, k)]);
        }
    }
    Ok(q.exp_even()?.berezin(&order)?.body())
}

/// Determinant of a matrix of commuting (even) Grassmann entries by the Leibniz
/// formula.
fn even_determinant(m: &[Vec<Grassmann>]) -> Grassmann {
    let n = m.len();
    let g = m[0][0].gens();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = Grassmann::zero(g);
    permutations(&mut perm, 0, &mut |p, sign| {
        let mut t = Grassmann::scalar(g, Complex64::new(sign, 0.0));
        for (r, &c) in p.iter().enumerate() {
            t = &t * &m[r][c];
        }
        out = &out + &t;
    });
    out
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize], f64)) {
    fn rec(p: &mut Vec<usize>, k: usize, sign: f64, f: &mut dyn FnMut(&[usize], f64)) {
        if k == p.len() {
            f(p, sign);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(p, k + 1, if i == k { sign } else { -sign }, f);
            p.swap(k, i);
        }
    }
    rec(p, k, 1.0, f)
}

/// Both sides of `∫ exp{-Φ⁺FΦ} = det(a - ρ b^{-1} τ) / det b` with symbolic
/// blocks `ρ`, `τ`, as elements of the algebra generated by their entries.
pub fn superdeterminant_sides(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
) -> Result<(Grassmann, Grassmann)> {
    let k = a.nrows();
    if k == 0 || k > 3 || a.ncols() != k || b.nrows() != k || b.ncols() != k {
        return Err(Error::InvalidParam(
            "need square k x k blocks with 1 <= k <= 3".into(),
        ));
    }
    if (b - b.adjoint())
        .iter()
        .any(|z| z.norm() > 1e-12 * (1.0 + b.norm()))
        || b.clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .any(|&e| e <= 0.0)
    {
        return Err(Error::InvalidParam(
            "b must be positive definite Hermitian".into(),
        ));
    }
    // generators: ψ̄_j, ψ_j interleaved, then ρ_{jl}, then τ_{jl}
    let g = 2 * k + 2 * k * k;
    let (bar, psi, order) = pair_layout(k);
    let rho = |j: usize, l: usize| 2 * k + j * k + l;
    let tau = |j: usize, l: usize| 2 * k + k * k + j * k + l;
    let binv = b
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidParam("b is singular".into()))?;
    let det_b = b.determinant();

    // z-integration of exp{-z̄bz - ψ̄ρz - z̄τψ} gives exp{(ψ̄ρ) b^{-1} (τψ)} / det b
    let jbar: Vec<Grassmann> = (0..k)
        .map(|l| {
            (0..k).fold(Grassmann::zero(g), |acc, j| {
                &acc + &Grassmann::monomial(g, &[bar[j], rho(j, l)], ONE)
            })
        })
        .collect();
    let kk: Vec<Grassmann> = (0..k)
        .map(|m| {
            (0..k).fold(Grassmann::zero(g), |acc, i| {
                &acc + &Grassmann::monomial(g, &[tau(m, i), psi[i]], ONE)
            })
        })
        .collect();
    let mut exponent = Grassmann::zero(g);
    for j in 0..k {
        for i in 0..k {
            exponent = &exponent + &Grassmann::monomial(g, &[bar[j], psi[i]], -a[(j, i)]);
        }
    }
    for l in 0..k {
        for m in 0..k {
            exponent = &exponent + &(&jbar[l] * &kk[m]).scale(binv[(l, m)]);
        }
    }
    let lhs = exponent.exp_even()?.berezin(&order)?.scale(det_b.inv());

    let entries: Vec<Vec<Grassmann>> = (0..k)
        .map(|j| {
            (0..k)
                .map(|i| {
                    let mut e = Grassmann::scalar(g, a[(j, i)]);
                    for l in 0..k {
                        for m in 0..k {
                            e = &e - &Grassmann::monomial(g, &[rho(j, l), tau(m, i)], binv[(l, m)]);
                        }
                    }
                    e
                })
                .collect()
        })
        .collect();
    let rhs = even_determinant(&entries).scale(det_b.inv());
    Ok((lhs, rhs))
}

/// Largest coefficient difference between the two sides of the superdeterminant identity.
pub fn verify_superdeterminant(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<f64> {
    let (l, r) = superdeterminant_sides(a, b)?;
    Ok(l.max_abs_diff(&r))
}

/// Powers of the test function `(ψ̄ψ)^α (ψ̄φ)^β (φ̄ψ)^γ (φ̄φ)^δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monomial {
    pub alpha: u32,
    pub beta: u32,
    pub gamma: u32,
    pub delta: u32,
}

impl Monomial {
    pub fn new(alpha: u32, beta: u32, gamma: u32, delta: u32) -> Self {
        Monomial {
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    /// The monomials used by the verification suite.
    pub fn test_set() -> Vec<Monomial> {
        let mut out = Vec::new();
        for alpha in 0..2 {
            for beta in 0..2 {
                for gamma in 0..2 {
                    for delta in 0..3 {
                        out.push(Monomial::new(alpha, beta, gamma, delta));
                    }
                }
            }
        }
        out
    }

    /// Charge symmetry kills the integral unless `β = γ`.
    pub fn trivially_zero(&self) -> bool {
        self.beta != self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperbosonizationReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// Polynomial in the bosonic components `(φ_a, φ̄_a)` with Grassmann coefficients,
/// keyed by the exponent vectors `(k, l)` of `Π φ_a^{k_a} φ̄_a^{l_a}`.
type Mixed = BTreeMap<(Vec<u32>, Vec<u32>), Grassmann>;

fn mixed_mul(x: &Mixed, y: &Mixed) -> Mixed {
    let mut out: Mixed = BTreeMap::new();
    for ((k1, l1), g1) in x {
        for ((k2, l2), g2) in y {
            let key = (
                k1.iter().zip(k2).map(|(a, b)| a + b).collect(),
                l1.iter().zip(l2).map(|(a, b)| a + b).collect(),
            );
            let prod = g1 * g2;
            let slot = out
                .entry(key)
                .or_insert_with(|| Grassmann::zero(prod.gens()));
            *slot = &*slot + &prod;
        }
    }
    out
}

/// Left side: `∫ F e^{-ψ̄ψ - φ̄φ} dΦ dΨ` over `n` fermion and `n` boson components,
/// Berezin symbolically and the Gaussian moments `⟨Π φ^k φ̄^l⟩ = δ_kl Π k!` exactly.
fn superbosonization_lhs(n: usize, f: Monomial) -> Result<Complex64> {
    let g = 2 * n;
    let (bar, psi, order) = pair_layout(n);
    let zero = vec![0u32; n];
    let unit = |a: usize| {
        let mut v = zero.clone();
        v[a] = 1;
        v
    };
    let pp = (0..n).fold(Grassmann::zero(g), |acc, a| {
        &acc + &Grassmann::monomial(g, &[bar[a], psi[a]], ONE)
    });
    let weight = (-&pp).exp_even()?;
    let single =
        |gr: Grassmann| -> Mixed { [((zero.clone(), zero.clone()), gr)].into_iter().collect() };
    let mut acc = single(weight);
    for _ in 0..f.alpha {
        acc = mixed_mul(&acc, &single(pp.clone()));
    }
    let psibar_phi: Mixed = (0..n)
        .map(|a| ((unit(a), zero.clone()), Grassmann::generator(g, bar[a])))
        .collect();
    let phibar_psi: Mixed = (0..n)
        .map(|a| ((zero.clone(), unit(a)), Grassmann::generator(g, psi[a])))
        .collect();
    let phibar_phi: Mixed = (0..n)
        .map(|a| ((unit(a), unit(a)), Grassmann::one(g)))
        .collect();
    for _ in 0..f.beta {
        acc = mixed_mul(&acc, &psibar_phi);
    }
    for _ in 0..f.gamma {
        acc = mixed_mul(&acc, &phibar_psi);
    }
    for _ in 0..f.delta {
        acc = mixed_mul(&acc, &phibar_phi);
    }
    let mut total = ZERO;
    for ((k, l), gr) in &acc {
        if k != l {
            continue;
        }
        let moment: f64 = k
            .iter()
            .map(|&x| (1..=x).map(f64::from).product::<f64>())
            .product();
        total += gr.berezin(&order)?.body() * moment;
    }
    Ok(total)
}

/// Right side at `p = 1`: `∮ du/2πi ∫_0^∞ db ∫ dρ dτ F(Q) bⁿ (u - ρτ/b)^{-n}` with
/// `U <-> -ψ̄ψ`, `ρ <-> φ̄ψ`, `τ <-> ψ̄φ`, `B <-> φ̄φ`; the weight maps to `e^{u - b}`.
fn superbosonization_rhs(n: usize, f: Monomial, nu: usize) -> Result<Complex64> {
    const RHO: usize = 0;
    const TAU: usize = 1;
    let (bs, bw) = composite(0.0, 60.0, 40, 16);
    let mut total = ZERO;
    for m in 0..nu {
        let u = Complex64::from_polar(
            1.0,
            2.0 * std::f64::consts::PI * (m as f64 + 0.5) / nu as f64,
        );
        let mut inner = ZERO;
        for (&b, &w) in bs.iter().zip(&bw) {
            let mut grass = Grassmann::scalar(
                2,
                (-u).powu(f.alpha) * b.powi(f.delta as i32) * (u - b).exp() * b.powi(n as i32),
            );
            if f.beta == 1 {
                grass = &grass * &Grassmann::generator(2, TAU);
            }
            if f.gamma == 1 {
                grass = &grass * &Grassmann::generator(2, RHO);
            }
            if f.beta > 1 || f.gamma > 1 {
                grass = Grassmann::zero(2);
            }
            // (u - ρτ/b)^{-n}
            let x = &Grassmann::scalar(2, u)
                - &Grassmann::monomial(2, &[RHO, TAU], Complex64::new(1.0 / b, 0.0));
            let nf = n as f64;
            let derivs = [u.powf(-nf), -nf * u.powf(-nf - 1.0)];
            let grass = &grass * &x.map_analytic(&derivs)?;
            inner += grass.berezin(&[TAU, RHO])?.body() * w;
        }
        // du / 2πi = u dθ / 2π on the unit circle
        total += inner * u / nu as f64;
    }
    Ok(total)
}

/// Both sides of the `p = 1` superbosonization identity for one monomial.
pub fn verify_superbosonization_p1(n: usize, f: Monomial) -> Result<SuperbosonizationReport> {
    if n == 0 || n > 8 {
        return Err(Error::InvalidParam(format!("n = {n} must lie in 1..=8")));
    }
    let lhs = superbosonization_lhs(n, f)?;
    let rhs = superbosonization_rhs(n, f, 64)?;
    Ok(SuperbosonizationReport {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn nilpotent_and_anticommuting() {
        let (p1, p2) = (Grassmann::generator(3, 0), Grassmann::generator(3, 1));
        assert!((&p1 * &p1).is_zero());
        assert!((&(&p1 * &p2) + &(&p2 * &p1)).is_zero());
    }

    #[test]
    fn product_of_two_pairs() {
        let g = 4;
        let a = &Grassmann::one(g) + &Grassmann::monomial(g, &[0, 1], ONE);
        let b = &Grassmann::one(g) + &Grassmann::monomial(g, &[2, 3], ONE);
        let p = &a * &b;
        assert_eq!(p.terms().count(), 4);
        assert_eq!(p.coefficient(0b1111), ONE);
    }

    #[test]
    fn exp_of_single_pair() {
        let x = Grassmann::monomial(2, &[0, 1], c(2.5));
        let e = x.exp_even().unwrap();
        assert_eq!(e, &Grassmann::one(2) + &x);
        assert_eq!(Grassmann::zero(2).exp_even().unwrap(), Grassmann::one(2));
        assert!(Grassmann::one(2).exp_even().is_err());
        assert!(Grassmann::generator(2, 0).exp_even().is_err());
    }

    #[test]
    fn berezin_basics() {
        let p = Grassmann::generator(2, 0);
        assert_eq!(p.berezin(&[0]).unwrap().body(), ONE);
        assert_eq!(Grassmann::one(2).berezin(&[0]).unwrap().body(), ZERO);
        let f = &(&(&Grassmann::scalar(2, c(1.0)) + &Grassmann::monomial(2, &[0], c(2.0)))
            + &Grassmann::monomial(2, &[1], c(3.0)))
            + &Grassmann::monomial(2, &[0, 1], c(4.0));
        assert_eq!(f.berezin(&[1, 0]).unwrap().body(), c(4.0));
        assert!(f.berezin(&[1, 1]).is_err());
    }

    #[test]
    fn gaussian_small() {
        let a = DMatrix::from_row_slice(1, 1, &[c(3.0)]);
        assert!((gaussian_berezin(&a).unwrap() - c(3.0)).norm() < 1e-15);
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(5.0)]);
        assert!((gaussian_berezin(&a).unwrap() - c(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn superbosonization_normalization() {
        let r = verify_superbosonization_p1(1, Monomial::new(0, 0, 0, 0)).unwrap();
        assert!((r.lhs - ONE).norm() < 1e-14);
        assert!(r.residual < 1e-8);
    }
}
