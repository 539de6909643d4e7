use std::f64::consts::PI;

use bbrm::mat2::Mat2;
use bbrm::saddle::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tr_sq(x: Mat2) -> Complex64 {
    (x * x).trace()
}

// --- matrix-form oracles: the functionals evaluated straight from conjugated 2x2 matrices

fn km_matrix_form(s: &FunctionalSetup, co: &CompactCoords) -> Complex64 {
    let n = s.sites();
    let l0 = s.consts.lambda0;
    let v: Vec<Mat2> = (0..n)
        .map(|j| {
            if j == 0 {
                Mat2::IDENTITY
            } else {
                Mat2::rotation(co.rot[j].0, co.rot[j].1)
            }
        })
        .collect();
    let uh: Vec<Mat2> = co
        .phi
        .iter()
        .map(|p| {
            Mat2::diag(
                Complex64::from_polar(1.0, p[0]),
                Complex64::from_polar(1.0, p[1]),
            )
        })
        .collect();
    let x: Vec<Mat2> = (0..n).map(|j| v[j].adjoint() * uh[j] * v[j]).collect();
    let mut acc = c(s.consts.u_star(n), 0.0);
    for &(j, k) in &s.lattice.edges {
        acc += s.alpha / 2.0 * tr_sq(x[j] - x[k]);
    }
    for j in 0..n {
        // log det on the angles, each reduced to (-pi, pi]
        let logdet: f64 = co.phi[j].iter().map(|p| p.sin().atan2(p.cos())).sum();
        acc -= tr_sq(uh[j]) / 2.0 - I * l0 * uh[j].trace() - I * logdet;
    }
    acc
}

fn lm_matrix_form(s: &FunctionalSetup, co: &BoostCoords) -> Complex64 {
    let n = s.sites();
    let l0 = s.consts.lambda0;
    let w = Complex64::from_polar(1.0, s.consts.phi_plus);
    let t: Vec<Mat2> = (0..n)
        .map(|j| {
            if j == 0 {
                Mat2::IDENTITY
            } else {
                Mat2::boost(co.boost[j].0, co.boost[j].1)
            }
        })
        .collect();
    let b: Vec<[Complex64; 2]> = co.r.iter().map(|r| [w * r[0], w.conj() * r[1]]).collect();
    let bh: Vec<Mat2> = b.iter().map(|x| Mat2::diag(x[0], -x[1])).collect();
    let y: Vec<Mat2> = (0..n).map(|j| t[j].inverse() * bh[j] * t[j]).collect();
    let mut acc = c(-s.consts.u_star(n), 0.0);
    for &(j, k) in &s.lattice.edges {
        acc -= s.alpha / 2.0 * tr_sq(y[j] - y[k]);
    }
    for j in 0..n {
        acc += tr_sq(bh[j]) / 2.0 - I * l0 * bh[j].trace() - (b[j][0].ln() + b[j][1].ln());
    }
    acc
}

fn lt_matrix_form(s: &FunctionalSetup, co: &RadialCoords) -> Complex64 {
    let n = s.sites();
    let l0 = s.consts.lambda0;
    let w = Complex64::from_polar(1.0, s.consts.phi_plus);
    let v: Vec<Mat2> = (0..n)
        .map(|j| {
            if j == 0 {
                Mat2::IDENTITY
            } else {
                Mat2::rotation(co.rot[j].0, co.rot[j].1)
            }
        })
        .collect();
    let ah: Vec<Mat2> =
        co.r.iter()
            .map(|r| Mat2::diag(w * r[0], w * r[1]))
            .collect();
    let x: Vec<Mat2> = (0..n).map(|j| v[j].adjoint() * ah[j] * v[j]).collect();
    let mut acc = c(-s.consts.u_star(n), 0.0);
    for &(j, k) in &s.lattice.edges {
        acc -= s.alpha / 2.0 * tr_sq(x[j] - x[k]);
    }
    for j in 0..n {
        acc += tr_sq(ah[j]) / 2.0 - I * l0 * ah[j].trace() - ah[j].det().ln();
    }
    acc
}

fn random_compact(n: usize, rng: &mut impl Rng) -> CompactCoords {
    CompactCoords {
        phi: (0..n)
            .map(|_| [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)])
            .collect(),
        rot: (0..n)
            .map(|_| (rng.gen_range(0.0..PI / 2.0), rng.gen_range(0.0..2.0 * PI)))
            .collect(),
    }
}

fn random_boost(n: usize, rng: &mut impl Rng) -> BoostCoords {
    BoostCoords {
        r: (0..n)
            .map(|_| [rng.gen_range(0.01..5.0), rng.gen_range(0.01..5.0)])
            .collect(),
        boost: (0..n)
            .map(|_| (rng.gen_range(0.0..3.0), rng.gen_range(0.0..2.0 * PI)))
            .collect(),
    }
}

fn random_radial(n: usize, rng: &mut impl Rng) -> RadialCoords {
    RadialCoords {
        r: (0..n)
            .map(|_| [rng.gen_range(0.01..5.0), rng.gen_range(0.01..5.0)])
            .collect(),
        rot: (0..n)
            .map(|_| (rng.gen_range(0.0..PI / 2.0), rng.gen_range(0.0..2.0 * PI)))
            .collect(),
    }
}

fn setups() -> Vec<FunctionalSetup> {
    let mut out = Vec::new();
    for (d, m) in [(1, 2), (1, 3), (2, 2)] {
        for l0 in [0.0, 0.5, 1.0] {
            out.push(FunctionalSetup::new(d, m, 0.2 / d as f64, l0).unwrap());
        }
    }
    out
}

#[test]
fn functionals_match_matrix_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for s in setups() {
        let n = s.sites();
        for _ in 0..50 {
            let k = random_compact(n, &mut rng);
            let (a, b) = (s.eval_km(&k), km_matrix_form(&s, &k));
            assert!((a - b).norm() < 1e-11 * (1.0 + b.norm()), "K: {a} vs {b}");
            assert!((s.grad_km(&k).0 - a.re).abs() < 1e-11 * (1.0 + a.norm()));

            let l = random_boost(n, &mut rng);
            let (a, b) = (s.eval_lm(&l), lm_matrix_form(&s, &l));
            assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()), "L: {a} vs {b}");
            assert!((s.grad_lm(&l).0 - a.re).abs() < 1e-10 * (1.0 + a.norm()));

            let t = random_radial(n, &mut rng);
            let (a, b) = (s.eval_ltilde(&t), lt_matrix_form(&s, &t));
            assert!((a - b).norm() < 1e-11 * (1.0 + b.norm()), "Lt: {a} vs {b}");
            assert!((s.grad_ltilde(&t).0 - a.re).abs() < 1e-11 * (1.0 + a.norm()));
        }
    }
}

/// `-(2 - λ0²)/4 (α Σ (r - r')² - Σ (r - 1)²) + Σ (r - log r - 1)`
fn single_line_form(s: &FunctionalSetup, r: &[f64]) -> f64 {
    let l2 = s.consts.lambda0.powi(2);
    let grad: f64 = s
        .lattice
        .edges
        .iter()
        .map(|&(j, k)| (r[j] - r[k]).powi(2))
        .sum();
    let dev: f64 = r.iter().map(|x| (x - 1.0).powi(2)).sum();
    let ent: f64 = r.iter().map(|x| x - x.ln() - 1.0).sum();
    -(2.0 - l2) / 4.0 * (s.alpha * grad - dev) + ent
}

#[test]
fn lm_splits_into_two_radial_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for s in setups() {
        let n = s.sites();
        for _ in 0..50 {
            let mut co = random_boost(n, &mut rng);
            co.boost = vec![(0.0, 0.0); n];
            let r1: Vec<f64> = co.r.iter().map(|x| x[0]).collect();
            let r2: Vec<f64> = co.r.iter().map(|x| x[1]).collect();
            let expect = single_line_form(&s, &r1) + single_line_form(&s, &r2);
            let got = s.eval_lm(&co).re;
            assert!(
                (got - expect).abs() < 1e-11 * (1.0 + expect.abs()),
                "{got} vs {expect}"
            );
        }
    }
    // decoupled single site with the second radius at its saddle value
    let s = FunctionalSetup::new(1, 1, 0.0, 0.7).unwrap();
    for r in [0.1, 0.5, 1.0, 2.0, 4.5] {
        let co = BoostCoords {
            r: vec![[r, 1.0]],
            boost: vec![(0.0, 0.0)],
        };
        assert!((s.eval_lm(&co).re - single_line_form(&s, &[r])).abs() < 1e-12);
    }
}

/// Independent evaluation of the radial functional `B̃(r)`.
fn b_tilde(s: &FunctionalSetup, r: &[f64]) -> f64 {
    let l2 = s.consts.lambda0.powi(2);
    let bp = s.consts.b_plus().re;
    let grad: f64 = s
        .lattice
        .edges
        .iter()
        .map(|&(j, k)| (r[j] - r[k]).powi(2))
        .sum();
    let site: f64 = r
        .iter()
        .map(|x| (2.0 - l2) * x * x / 4.0 + l2 * x / 2.0 - x.ln() - bp)
        .sum();
    -s.alpha * (2.0 - l2) / 4.0 * grad + site
}

#[test]
fn ltilde_real_part_decomposes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for s in setups() {
        let n = s.sites();
        let l2 = s.consts.lambda0.powi(2);
        for _ in 0..50 {
            let co = random_radial(n, &mut rng);
            let r1: Vec<f64> = co.r.iter().map(|x| x[0]).collect();
            let r2: Vec<f64> = co.r.iter().map(|x| x[1]).collect();
            let mut cross = 0.0;
            for &(j, k) in &s.lattice.edges {
                let vj = if j == 0 {
                    Mat2::IDENTITY
                } else {
                    Mat2::rotation(co.rot[j].0, co.rot[j].1)
                };
                let vk = if k == 0 {
                    Mat2::IDENTITY
                } else {
                    Mat2::rotation(co.rot[k].0, co.rot[k].1)
                };
                let p = (vk * vj.adjoint()).0[0][1].norm_sqr();
                cross += p * (r1[j] - r2[j]) * (r1[k] - r2[k]);
            }
            let expect = b_tilde(&s, &r1) + b_tilde(&s, &r2) - s.alpha * (2.0 - l2) / 2.0 * cross;
            let got = s.eval_ltilde(&co).re;
            assert!(
                (got - expect).abs() < 1e-11 * (1.0 + expect.abs()),
                "{got} vs {expect}"
            );
        }
    }
    // the single-site radial diagonal is twice the single-site term
    let s = FunctionalSetup::new(1, 1, 0.0, 0.4).unwrap();
    for r in [0.2, 1.0, 3.0] {
        let co = RadialCoords {
            r: vec![[r, r]],
            rot: vec![(0.0, 0.0)],
        };
        assert!((s.eval_ltilde(&co).re - 2.0 * b_tilde(&s, &[r])).abs() < 1e-12);
    }
}

#[test]
fn saddle_values() {
    for s in setups() {
        let n = s.sites();
        let k = s.consts;
        let lm = BoostCoords {
            r: vec![[1.0, 1.0]; n],
            boost: vec![(0.0, 0.0); n],
        };
        assert!(s.eval_lm(&lm).norm() < 1e-12);
        // U_* is real, so only the real part vanishes away from λ0 = 0
        let lt = RadialCoords {
            r: vec![[1.0, 1.0]; n],
            rot: vec![(0.3, 1.0); n],
        };
        assert!(s.eval_ltilde(&lt).re.abs() < 1e-12);
        // all sites at L_+, any rotation
        let kp = CompactCoords {
            phi: vec![[k.phi_plus, k.phi_plus]; n],
            rot: vec![(0.9, 0.2); n],
        };
        assert!(s.eval_km(&kp).re.abs() < 1e-12);
        // L_± with V = I
        let kpm = CompactCoords {
            phi: vec![[k.phi_plus, PI - k.phi_plus]; n],
            rot: vec![(0.0, 0.0); n],
        };
        assert!(s.eval_km(&kpm).re.abs() < 1e-12);
        // every enumerated label is a zero of Re K
        for label in enumerate_saddles(n) {
            let ang = label.angles(n, k.phi_plus);
            let rot = label
                .rotation_moduli(n)
                .iter()
                .map(|m| match m {
                    Some(v) => (v.asin(), 0.4),
                    None => (0.6, 1.1),
                })
                .collect();
            let co = CompactCoords { phi: ang, rot };
            assert!(s.eval_km(&co).re.abs() < 1e-12, "{label}");
        }
    }
}

fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let all = setups();
    for i in 0..100 {
        let s = &all[i % all.len()];
        let n = s.sites();
        let k = random_compact(n, &mut rng);
        let x = k.to_flat();
        let fd = fd_gradient(&|z| s.grad_km(&CompactCoords::from_flat(z, n)).0, &x, 1e-6);
        assert!(max_rel_diff(&s.grad_km(&k).1, &fd) < 1e-6);

        let l = random_boost(n, &mut rng);
        let x = l.to_flat();
        let fd = fd_gradient(&|z| s.grad_lm(&BoostCoords::from_flat(z, n)).0, &x, 1e-6);
        assert!(max_rel_diff(&s.grad_lm(&l).1, &fd) < 1e-6);

        let t = random_radial(n, &mut rng);
        let x = t.to_flat();
        let fd = fd_gradient(
            &|z| s.grad_ltilde(&RadialCoords::from_flat(z, n)).0,
            &x,
            1e-6,
        );
        assert!(max_rel_diff(&s.grad_ltilde(&t).1, &fd) < 1e-6);
    }
}

#[test]
fn minimizers_land_on_predicted_sets() {
    let s = FunctionalSetup::new(1, 2, 0.2, 0.0).unwrap();
    for kind in [
        FunctionalKind::Lm,
        FunctionalKind::Ltilde,
        FunctionalKind::Km,
    ] {
        let rep = minimize_functional(&s, kind, 10, 7);
        assert!(rep.value <= 1e-8, "{kind}: value {}", rep.value);
        assert!(
            rep.distance <= 1e-4,
            "{kind}: distance {} ({})",
            rep.distance,
            rep.label
        );
    }
    let s = FunctionalSetup::new(1, 3, 0.2, 1.0).unwrap();
    for kind in [
        FunctionalKind::Lm,
        FunctionalKind::Ltilde,
        FunctionalKind::Km,
    ] {
        let rep = minimize_functional(&s, kind, 10, 8);
        assert!(rep.value <= 1e-8 && rep.distance <= 1e-4, "{kind}: {rep:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn real_parts_are_nonnegative(seed in any::<u64>(), which in 0usize..9) {
        let s = &setups()[which];
        let n = s.sites();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(s.eval_km(&random_compact(n, &mut rng)).re >= -1e-10);
        prop_assert!(s.eval_lm(&random_boost(n, &mut rng)).re >= -1e-10);
        prop_assert!(s.eval_ltilde(&random_radial(n, &mut rng)).re >= -1e-10);
    }

    #[test]
    fn coupled_quadratic_form_bound(x in proptest::collection::vec(-3.0f64..3.0, 9), d in 1usize..3) {
        let s = FunctionalSetup::new(d, 3, 0.24 / d as f64, 0.0).unwrap();
        let x = &x[..s.sites()];
        let grad: f64 = s.lattice.edges.iter().map(|&(j, k)| (x[j] - x[k]).powi(2)).sum();
        let sq: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!(-s.alpha * grad + sq >= (1.0 - 4.0 * d as f64 * s.alpha) * sq - 1e-12);
    }
}

#[test]
fn entropy_term_is_nonnegative() {
    for i in 1..10_000 {
        let r = i as f64 * 1e-3;
        let v = r - r.ln() - 1.0;
        assert!(v >= 0.0);
        if (r - 1.0).abs() > 1e-3 {
            assert!(v > 0.0);
        }
    }
}

// --- determinant

#[test]
fn d_vanishes_with_zero_gradient_at_every_label() {
    for (m, l0) in [(2, 0.0), (2, 0.5), (3, 1.0)] {
        let s = FunctionalSetup::new(1, m, 0.2, l0).unwrap();
        for (label, rel, der) in saddle_table(&s, 1e-4).unwrap() {
            assert!(rel < 1e-10, "{label}: |D|/scale = {rel}");
            assert!(der < 1e-6, "{label}: derivative residual {der}");
        }
    }
}

#[test]
fn derivative_residual_is_second_order() {
    let s = FunctionalSetup::new(1, 2, 0.2, 0.5).unwrap();
    let label = SaddleLabel::TypeII;
    let r1 = saddle_derivative_check(&s, &label, 4e-4).unwrap();
    let r2 = saddle_derivative_check(&s, &label, 2e-4).unwrap();
    if r1 > 1e-10 {
        let ratio = r1 / r2;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }
}

/// The four scalar determinants whose product is `D` for diagonal entries.
fn factorized(s: &FunctionalSetup, u: &[[Complex64; 2]], b: &[[Complex64; 2]]) -> Complex64 {
    let n = s.sites();
    let lap = bbrm::lattice::laplacian(&s.lattice);
    let mut out = c(1.0, 0.0);
    for a in 0..2 {
        for l in 0..2 {
            let sign = if l == 0 { 1.0 } else { -1.0 };
            let m = DMatrix::from_fn(n, n, |j, k| {
                let mut v = c(s.alpha * lap[j * n + k], 0.0);
                if j == k {
                    v += 1.0 + sign / (u[j][a] * b[j][l]);
                }
                v
            });
            out *= m.determinant();
        }
    }
    out
}

#[test]
fn d_factorizes_for_diagonal_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (d, m) in [(1, 2), (1, 3), (2, 2)] {
        let s = FunctionalSetup::new(d, m, 0.2 / d as f64, 0.3).unwrap();
        let n = s.sites();
        for _ in 0..20 {
            let u: Vec<[Complex64; 2]> = (0..n)
                .map(|_| {
                    [
                        Complex64::from_polar(1.0, rng.gen_range(-3.0..3.0)),
                        Complex64::from_polar(1.0, rng.gen_range(-3.0..3.0)),
                    ]
                })
                .collect();
            let b: Vec<[Complex64; 2]> = (0..n)
                .map(|_| {
                    [
                        c(rng.gen_range(0.2..3.0), rng.gen_range(-1.0..1.0)),
                        c(rng.gen_range(0.2..3.0), rng.gen_range(-1.0..1.0)),
                    ]
                })
                .collect();
            let cfg = SaddleConfig {
                u: u.clone(),
                v: vec![Mat2::IDENTITY; n],
                b: b.clone(),
                t: vec![Mat2::IDENTITY; n],
            };
            let direct = cfg.d(&s.lattice, s.alpha).unwrap();
            let fact = factorized(&s, &u, &b);
            assert!((direct - fact).norm() < 1e-10 * (1.0 + fact.norm()));
        }
    }
    let s = FunctionalSetup::new(1, 3, 0.0, 0.0).unwrap();
    let eye = vec![Mat2::IDENTITY; 3];
    let d = superdeterminant_d(&s.lattice, 0.0, &eye, &eye).unwrap();
    assert!((d - c(16f64.powi(3), 0.0)).norm() < 1e-8);
}

#[test]
fn a3_matches_mixed_second_difference() {
    for l0 in [0.0, 0.5] {
        let s = FunctionalSetup::new(1, 2, 0.2, l0).unwrap();
        let closed = a3_closed(&s);
        for j in 0..2 {
            for k in 0..2 {
                let fd = a3_finite_difference(&s, j, k, 1e-3).unwrap();
                assert!(
                    (fd - closed).norm() <= 1e-4 * closed.norm(),
                    "l0={l0} j={j} k={k}: {fd} vs {closed}"
                );
            }
        }
    }
}

// --- boundary integrals

fn k(l0: f64) -> SaddleConstants {
    SaddleConstants::new(l0).unwrap()
}

#[test]
fn boundary_integrals_at_saddle_one() {
    for l0 in [0.0, 0.5, 1.0] {
        let k = k(l0);
        let p = Boundary::new(0.3, -0.2, 0.4);
        let th = p.theta(&k);
        let phi = k.c0 * th;
        let (u, b) = saddle_one(&k, 3);
        let shift = l0 * (p.xi1 + p.xi2) / (2.0 * k.rho0);
        let fu = c(shift, 0.0).exp() * ((I * phi).exp() - (-I * phi).exp()) / (2.0 * k.c0 * I * th);
        let fb = c(-shift, 0.0).exp() * (-I * phi).exp() / (2.0 * k.c0 * I * th);
        assert!((exp_f_u(&k, &u, p) - fu).norm() < 1e-13 * fu.norm());
        assert!((exp_f_b(&k, &b, p).unwrap() - fb).norm() < 1e-13 * fb.norm());
    }
}

#[test]
fn boundary_integrals_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut tested_b = 0;
    for _ in 0..20 {
        let k = k(rng.gen_range(-1.3..1.3));
        let p = Boundary::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.2..1.0),
        );
        let u = [[
            Complex64::from_polar(1.0, rng.gen_range(-PI..PI)),
            Complex64::from_polar(1.0, rng.gen_range(-PI..PI)),
        ]];
        let closed = exp_f_u(&k, &u, p);
        let quad = exp_f_u_quadrature(&k, &u, p, 48, 8);
        assert!(
            (closed - quad).norm() <= 1e-6 * closed.norm(),
            "{closed} vs {quad}"
        );

        let w = Complex64::from_polar(1.0, k.phi_plus);
        let b = [[
            w * rng.gen_range(0.3..2.0),
            w.conj() * rng.gen_range(0.3..2.0),
        ]];
        if let Ok(closed) = exp_f_b(&k, &b, p) {
            let quad = exp_f_b_quadrature(&k, &b, p, 20.0, 8).unwrap();
            assert!(
                (closed - quad).norm() <= 1e-6 * closed.norm(),
                "{closed} vs {quad}"
            );
            tested_b += 1;
        }
    }
    assert!(tested_b >= 10);
}

/// `∂/∂ξ1'` of `log exp f_u` from quadrature, by central differences.
fn f_u1_quadrature(k: &SaddleConstants, u: &[[Complex64; 2]], p: Boundary, h: f64) -> Complex64 {
    let plus = exp_f_u_quadrature(
        k,
        u,
        Boundary {
            xi1: p.xi1 + h,
            ..p
        },
        48,
        4,
    );
    let minus = exp_f_u_quadrature(
        k,
        u,
        Boundary {
            xi1: p.xi1 - h,
            ..p
        },
        48,
        4,
    );
    (plus / minus).ln() / (2.0 * h)
}

/// The `ξ2'`-derivative comes from the second entry only, so the shifted boundary
/// keeps `ξ1` and moves the `x2` diagonal entry.
fn f_b1_quadrature(k: &SaddleConstants, b: &[[Complex64; 2]], p: Boundary, h: f64) -> Complex64 {
    let plus = exp_f_b_quadrature(
        k,
        b,
        Boundary {
            xi2: p.xi2 + h,
            ..p
        },
        12.0,
        4,
    )
    .unwrap();
    let minus = exp_f_b_quadrature(
        k,
        b,
        Boundary {
            xi2: p.xi2 - h,
            ..p
        },
        12.0,
        4,
    )
    .unwrap();
    (plus / minus).ln() / (2.0 * h)
}

#[test]
fn boundary_derivatives_match_quadrature_differences() {
    let k = k(0.6);
    let p = Boundary::new(0.25, -0.35, 0.5);
    let (u, b) = saddle_one(&k, 1);
    assert!((f_u1(&k, &u, p) - f_u1_quadrature(&k, &u, p, 1e-4)).norm() < 1e-7);
    assert!((f_b1(&k, &b, p) - f_b1_quadrature(&k, &b, p, 1e-4)).norm() < 1e-7);
}

#[test]
fn first_order_coefficients_match_quadrature() {
    for l0 in [0.0, 0.5, 1.0] {
        let setup = FunctionalSetup::new(1, 1, 0.0, l0).unwrap();
        let k = setup.consts;
        let p = Boundary::new(0.3, -0.4, 0.5);
        let coef = lemma7_coefficients(&setup, p).unwrap();
        let (u0, b0) = saddle_one(&k, 1);
        let h = 2e-4;
        let hx = 2e-4;
        let du = |l: usize, s: f64| {
            let mut u = u0.clone();
            u[0][l] *= Complex64::from_polar(1.0, s * h);
            f_u1_quadrature(&k, &u, p, hx)
        };
        let c1 = (du(0, 1.0) - du(0, -1.0)) / (2.0 * h);
        let c2 = (du(1, 1.0) - du(1, -1.0)) / (2.0 * h);
        let db = |l: usize, s: f64| {
            let mut b = b0.clone();
            b[0][l] *= 1.0 + s * h;
            f_b1_quadrature(&k, &b, p, hx)
        };
        let d1 = (db(0, 1.0) - db(0, -1.0)) / (2.0 * h);
        let d2 = (db(1, 1.0) - db(1, -1.0)) / (2.0 * h);
        assert!(
            (c1 - coef.c1).norm() < 1e-5,
            "l0={l0}: c1 {c1} vs {}",
            coef.c1
        );
        assert!(
            (c2 - coef.c2).norm() < 1e-5,
            "l0={l0}: c2 {c2} vs {}",
            coef.c2
        );
        assert!(
            (d2 - coef.d2).norm() < 1e-5,
            "l0={l0}: d2 {d2} vs {}",
            coef.d2
        );
        assert!(d1.norm() < 1e-5);
    }
}

// --- assembly and closure

#[test]
fn assembly_matches_compact_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let k = k(rng.gen_range(-1.4..1.4));
        let p = Boundary::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.0..1.0),
        );
        let a = g2_pm_second_derivative(&k, p);
        let b = g2_pm_second_derivative_compact(&k, p);
        assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()), "{a} vs {b}");
    }
}

#[test]
fn closure_constant_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let k = SaddleConstants::new_inner(rng.gen_range(-1.414..1.414)).unwrap();
        assert!((closure_constant(&k) - 1.0).abs() < 1e-12);
        assert!(((k.a_plus * k.a_minus) + 1.0).norm() < 1e-14);
        assert!((k.a_plus.norm() - 1.0).abs() < 1e-14 && (k.a_minus.norm() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn closure_reproduces_sine_kernel() {
    for l0 in [0.0, 0.5, 1.0, -1.2] {
        // integer separations put a near-zero denominator in the assembly; see
        // closure_near_integer_separation
        for s in [0.25, 0.5, 1.3, 1.7, 2.5] {
            let v = closure_identity(0.1, 0.1 + s, l0).unwrap();
            let expect = bbrm::stats::sine_kernel_r2(s);
            assert!((v - expect).abs() < 1e-10, "l0={l0} s={s}: {v} vs {expect}");
        }
        let v = closure_identity(0.0, 1e-4, l0).unwrap();
        assert!(v.abs() < 1e-6);
    }
    assert!((closure_identity(0.0, 0.5, 0.0).unwrap() - (1.0 - 4.0 / (PI * PI))).abs() < 1e-10);
}

#[test]
fn closure_near_integer_separation() {
    for s in [1.0, 2.0, 3.0] {
        let v = closure_identity(0.0, s, 0.3).unwrap();
        assert!((v - 1.0).abs() < 1e-7, "s={s}: {v}");
    }
}
