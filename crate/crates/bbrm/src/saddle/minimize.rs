//! Multi-start BFGS on the real parts of the functionals, and distances to the
//! predicted minimizer sets.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::functionals::{flat_len, BoostCoords, CompactCoords, FunctionalSetup, RadialCoords};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalKind {
    Km,
    Lm,
    Ltilde,
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionalKind::Km => "K",
            FunctionalKind::Lm => "L",
            FunctionalKind::Ltilde => "Ltilde",
        })
    }
}

impl std::str::FromStr for FunctionalKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "K" | "k" | "Km" => Ok(FunctionalKind::Km),
            "L" | "l" | "Lm" => Ok(FunctionalKind::Lm),
            "Ltilde" | "ltilde" | "Lt" => Ok(FunctionalKind::Ltilde),
            _ => Err(format!(
                "unknown functional {s:?} (expected K, L or Ltilde)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeReport {
    pub kind: FunctionalKind,
    pub value: f64,
    /// Minimizer in the natural flat layout of the coordinate type.
    pub point: Vec<f64>,
    pub distance: f64,
    pub label: String,
    pub restarts: usize,
    pub iterations: usize,
}

/// BFGS with Armijo backtracking. Returns `(x, f(x), iterations)`.
pub fn bfgs(
    f: &dyn Fn(&[f64]) -> (f64, Vec<f64>),
    x0: &[f64],
    gtol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = f(&x);
    let mut h = identity(n);
    let mut it = 0;
    while it < max_iter {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < gtol {
            break;
        }
        let mut d: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| h[i][j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            h = identity(n);
            d = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut t = if dn > 2.0 { 2.0 / dn } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let (fnew, gnew) = f(&xn);
            if fnew.is_finite() && fnew <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            t *= 0.5;
        }
        it += 1;
        let Some((xn, fnew, gnew)) = accepted else {
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let progress = fx - fnew;
        x = xn;
        fx = fnew;
        g = gnew;
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| h[i][j] * y[j]).sum())
                .collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i][j] +=
                        (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        if progress == 0.0 && fx == 0.0 {
            break;
        }
    }
    (x, fx, it)
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn wrap(phi: f64) -> f64 {
    (phi + PI).rem_euclid(2.0 * PI) - PI
}

/// Predicted minimizers of `Re K_m`: for each site `L_±` or `L_∓` with
/// `|(V_j)_12|` equal to 0 or 1 according to agreement with site 1 (type I),
/// or all sites at `L_+` (type II) or all at `L_-` (type III) with `V` free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SaddleLabel {
    /// `true` marks `L_±` at that site.
    TypeI(Vec<bool>),
    TypeII,
    TypeIII,
}

impl fmt::Display for SaddleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SaddleLabel::TypeI(s) => {
                let tag: String = s.iter().map(|&p| if p { '+' } else { '-' }).collect();
                write!(f, "I[{tag}]")
            }
            SaddleLabel::TypeII => f.write_str("II"),
            SaddleLabel::TypeIII => f.write_str("III"),
        }
    }
}

pub fn enumerate_saddles(sites: usize) -> Vec<SaddleLabel> {
    let mut out: Vec<SaddleLabel> = (0..1usize << sites)
        .map(|mask| SaddleLabel::TypeI((0..sites).map(|j| mask >> j & 1 == 0).collect()))
        .collect();
    out.push(SaddleLabel::TypeII);
    out.push(SaddleLabel::TypeIII);
    out
}

impl SaddleLabel {
    /// Angles of `(u_{j,1}, u_{j,2})` at this saddle.
    pub fn angles(&self, sites: usize, phi_plus: f64) -> Vec<[f64; 2]> {
        let (p, m) = (phi_plus, PI - phi_plus);
        match self {
            SaddleLabel::TypeI(s) => s.iter().map(|&x| if x { [p, m] } else { [m, p] }).collect(),
            SaddleLabel::TypeII => vec![[p, p]; sites],
            SaddleLabel::TypeIII => vec![[m, m]; sites],
        }
    }

    /// Required `|(V_j)_12|` per site, `None` when free.
    pub fn rotation_moduli(&self, sites: usize) -> Vec<Option<f64>> {
        match self {
            SaddleLabel::TypeI(s) => s
                .iter()
                .map(|&x| Some(if x == s[0] { 0.0 } else { 1.0 }))
                .collect(),
            _ => vec![None; sites],
        }
    }
}

/// Distance from compact coordinates to the nearest predicted saddle (angles
/// wrapped, rotations compared through `|(V_j)_12|`).
pub fn km_saddle_distance(setup: &FunctionalSetup, c: &CompactCoords) -> (f64, SaddleLabel) {
    let n = setup.sites();
    let mut best = (f64::INFINITY, SaddleLabel::TypeII);
    for label in enumerate_saddles(n) {
        let ang = label.angles(n, setup.consts.phi_plus);
        let mods = label.rotation_moduli(n);
        let mut d2 = 0.0;
        for j in 0..n {
            for l in 0..2 {
                d2 += wrap(c.phi[j][l] - ang[j][l]).powi(2);
            }
            if j > 0 {
                if let Some(v) = mods[j] {
                    d2 += (c.rot[j].0.sin().abs() - v).powi(2);
                }
            }
        }
        if d2.sqrt() < best.0 {
            best = (d2.sqrt(), label);
        }
    }
    best
}

/// Distance to `r = 1, t = 0`.
pub fn lm_saddle_distance(c: &BoostCoords) -> f64 {
    let r: f64 =
        c.r.iter()
            .flat_map(|x| x.iter())
            .map(|v| (v - 1.0).powi(2))
            .sum();
    let t: f64 = c.boost.iter().skip(1).map(|b| b.0 * b.0).sum();
    (r + t).sqrt()
}

/// Distance to `A_j = L_+` for every site (rotations are free there).
pub fn ltilde_saddle_distance(c: &RadialCoords) -> f64 {
    c.r.iter()
        .flat_map(|x| x.iter())
        .map(|v| (v - 1.0).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Multi-start minimization of the real part of `kind`. Radii are optimized in
/// `log r`; everything else in its natural coordinate.
pub fn minimize_functional(
    setup: &FunctionalSetup,
    kind: FunctionalKind,
    restarts: usize,
    seed: u64,
) -> MinimizeReport {
    let n = setup.sites();
    let len = flat_len(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objective = |z: &[f64]| -> (f64, Vec<f64>) {
        match kind {
            FunctionalKind::Km => setup.grad_km(&CompactCoords::from_flat(z, n)),
            FunctionalKind::Lm | FunctionalKind::Ltilde => {
                let mut x = z.to_vec();
                for v in x.iter_mut().take(2 * n) {
                    *v = v.exp();
                }
                let (f, mut g) = if kind == FunctionalKind::Lm {
                    setup.grad_lm(&BoostCoords::from_flat(&x, n))
                } else {
                    setup.grad_ltilde(&RadialCoords::from_flat(&x, n))
                };
                for i in 0..2 * n {
                    g[i] *= x[i];
                }
                (f, g)
            }
        }
    };
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    for _ in 0..restarts.max(1) {
        let mut z = vec![0.0; len];
        for (i, v) in z.iter_mut().enumerate() {
            let diag = i < 2 * n;
            let second = (i - if diag { 0 } else { 2 * n }) % 2 == 1;
            *v = match (kind, diag, second) {
                (FunctionalKind::Km, true, _) => rng.gen_range(-PI..PI),
                (_, true, _) => rng.gen_range((0.3f64).ln()..(3.0f64).ln()),
                (FunctionalKind::Lm, false, false) => rng.gen_range(-2.0..2.0),
                (_, false, false) => rng.gen_range(0.0..PI / 2.0),
                (_, false, true) => rng.gen_range(-PI..PI),
            };
        }
        let (z, f, it) = bfgs(&objective, &z, 1e-13, 4000);
        if best.as_ref().map_or(true, |b| f < b.1) {
            best = Some((z, f, it));
        }
    }
    let (z, value, iterations) = best.unwrap();
    let mut point = z.clone();
    if kind != FunctionalKind::Km {
        for v in point.iter_mut().take(2 * n) {
            *v = v.exp();
        }
    }
    let (distance, label) = match kind {
        FunctionalKind::Km => {
            let (d, l) = km_saddle_distance(setup, &CompactCoords::from_flat(&point, n));
            (d, l.to_string())
        }
        FunctionalKind::Lm => (
            lm_saddle_distance(&BoostCoords::from_flat(&point, n)),
            "r=1,T=I".into(),
        ),
        FunctionalKind::Ltilde => (
            ltilde_saddle_distance(&RadialCoords::from_flat(&point, n)),
            "A=L+".into(),
        ),
    };
    MinimizeReport {
        kind,
        value,
        point,
        distance,
        label,
        restarts: restarts.max(1),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfgs_on_rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            (
                v,
                vec![
                    -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                    200.0 * (b - a * a),
                ],
            )
        };
        let (x, v, _) = bfgs(&f, &[-1.2, 1.0], 1e-12, 10_000);
        assert!(v < 1e-20);
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn saddle_enumeration_counts() {
        assert_eq!(enumerate_saddles(2).len(), 6);
        assert_eq!(SaddleLabel::TypeI(vec![true, false]).to_string(), "I[+-]");
    }
}
