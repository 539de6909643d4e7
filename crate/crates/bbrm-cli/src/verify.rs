//! The deterministic verification subcommands. Each returns its tables, a
//! summary and an overall pass flag.

use std::collections::BTreeMap;

use bbrm::grassmann::{
    gaussian_berezin, verify_superbosonization_p1, verify_superdeterminant, Monomial,
};
use bbrm::group::{hciz_u11, hciz_u2, quad_u11, quad_u2};
use bbrm::mat2::Mat2;
use bbrm::saddle::{
    a3_closed, a3_finite_difference, closure_constant, closure_identity, exp_f_b,
    exp_f_b_quadrature, exp_f_u, exp_f_u_quadrature, minimize_functional, saddle_table, Boundary,
    FunctionalKind, FunctionalSetup, SaddleConstants,
};
use bbrm::stats::sine_kernel_r2;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::output::{num, Table};
use crate::CliError;

pub type Verified = (Vec<Table>, BTreeMap<String, f64>, bool);

fn flag(ok: bool) -> String {
    if ok { "PASS" } else { "FAIL" }.to_string()
}

fn setup(cfg: &RunConfig) -> Result<FunctionalSetup, CliError> {
    let e = &cfg.ensemble;
    Ok(FunctionalSetup::new(e.d, e.m, e.alpha, cfg.lambda0)?)
}

pub fn saddle_scan(cfg: &RunConfig) -> Result<Verified, CliError> {
    let s = setup(cfg)?;
    let mut t = Table::new(
        "saddle-scan",
        &[
            "functional",
            "value",
            "distance",
            "label",
            "iterations",
            "pass",
        ],
    );
    let mut all = true;
    let mut summary = BTreeMap::new();
    for kind in [
        FunctionalKind::Km,
        FunctionalKind::Lm,
        FunctionalKind::Ltilde,
    ] {
        let rep = minimize_functional(&s, kind, cfg.restarts, cfg.ensemble.seed);
        let ok = rep.value <= 1e-8 && rep.distance <= 1e-4;
        all &= ok;
        summary.insert(format!("{kind}_value"), rep.value);
        summary.insert(format!("{kind}_distance"), rep.distance);
        t.push(vec![
            kind.to_string(),
            num(rep.value),
            num(rep.distance),
            rep.label,
            rep.iterations.to_string(),
            flag(ok),
        ]);
    }
    Ok((vec![t], summary, all))
}

pub fn saddle_verify(cfg: &RunConfig) -> Result<Verified, CliError> {
    let s = setup(cfg)?;
    let mut labels = Table::new(
        "saddle-verify",
        &["label", "relative_value", "max_first_difference", "pass"],
    );
    let mut all = true;
    let (mut worst_rel, mut worst_der) = (0.0f64, 0.0f64);
    for (label, rel, der) in saddle_table(&s, 1e-4)? {
        let ok = rel <= 1e-10 && der <= 1e-6;
        all &= ok;
        worst_rel = worst_rel.max(rel);
        worst_der = worst_der.max(der);
        labels.push(vec![label.to_string(), num(rel), num(der), flag(ok)]);
    }
    let mut a3 = Table::new(
        "saddle-verify-a3",
        &[
            "j",
            "k",
            "fd_re",
            "fd_im",
            "closed_re",
            "closed_im",
            "relative",
            "pass",
        ],
    );
    let closed = a3_closed(&s);
    let mut worst_a3 = 0.0f64;
    for j in 0..s.sites() {
        for k in 0..s.sites() {
            let fd = a3_finite_difference(&s, j, k, 1e-3)?;
            let rel = (fd - closed).norm() / closed.norm();
            let ok = rel <= 1e-4;
            all &= ok;
            worst_a3 = worst_a3.max(rel);
            a3.push(vec![
                j.to_string(),
                k.to_string(),
                num(fd.re),
                num(fd.im),
                num(closed.re),
                num(closed.im),
                num(rel),
                flag(ok),
            ]);
        }
    }
    let summary = BTreeMap::from([
        ("worst_relative_value".to_string(), worst_rel),
        ("worst_first_difference".to_string(), worst_der),
        ("worst_a3_relative".to_string(), worst_a3),
    ]);
    Ok((vec![labels, a3], summary, all))
}

fn random_matrix(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn grassmann_verify(cfg: &RunConfig) -> Result<Verified, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.ensemble.seed);
    let mut t = Table::new(
        "grassmann-verify",
        &["identity", "size", "residual", "tolerance", "pass"],
    );
    let mut all = true;
    let mut summary = BTreeMap::new();
    let mut row = |t: &mut Table, id: &str, size: String, r: f64, tol: f64| {
        let ok = r <= tol;
        all &= ok;
        let key = format!("{id}_worst");
        let w = summary.entry(key).or_insert(0.0f64);
        *w = w.max(r);
        t.push(vec![id.to_string(), size, num(r), num(tol), flag(ok)]);
    };
    for n in 1..=6 {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let a = random_matrix(n, &mut rng);
            let det = a.clone().lu().determinant();
            worst = worst.max((gaussian_berezin(&a)? - det).norm() / det.norm().max(1e-3));
        }
        row(&mut t, "gaussian", format!("n={n}"), worst, 1e-12);
    }
    for k in 1..=2 {
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let a = random_matrix(k, &mut rng) + DMatrix::identity(k, k) * Complex64::new(2.0, 0.0);
            let g = random_matrix(k, &mut rng);
            let b = &g * g.adjoint() + DMatrix::identity(k, k) * Complex64::new(0.5, 0.0);
            worst = worst.max(verify_superdeterminant(&a, &b)?);
        }
        row(
            &mut t,
            "superdeterminant",
            format!("k={k}"),
            worst,
            if k == 1 { 1e-12 } else { 1e-10 },
        );
    }
    for n in 1..=3 {
        for f in Monomial::test_set() {
            let r = verify_superbosonization_p1(n, f)?;
            let size = format!("n={n} F=({},{},{},{})", f.alpha, f.beta, f.gamma, f.delta);
            row(&mut t, "superbosonization", size, r.residual, 1e-8);
        }
    }
    Ok((vec![t], summary, all))
}

fn cz(rng: &mut impl Rng, r: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

pub fn hciz_verify(cfg: &RunConfig) -> Result<Verified, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.ensemble.seed);
    let mut t = Table::new(
        "hciz-verify",
        &[
            "group",
            "case",
            "closed_re",
            "closed_im",
            "quad_re",
            "quad_im",
            "relative",
            "pass",
        ],
    );
    let mut all = true;
    let mut summary: BTreeMap<String, f64> = BTreeMap::new();
    let mut row = |t: &mut Table, group: &str, case: usize, closed: Complex64, quad: Complex64| {
        let rel = (closed - quad).norm() / closed.norm();
        let ok = rel <= 1e-6;
        all &= ok;
        let w = summary.entry(format!("{group}_worst")).or_insert(0.0);
        *w = w.max(rel);
        t.push(vec![
            group.into(),
            case.to_string(),
            num(closed.re),
            num(closed.im),
            num(quad.re),
            num(quad.im),
            num(rel),
            flag(ok),
        ]);
    };
    for case in 0..50 {
        let (c, d) = (
            [cz(&mut rng, 1.0), cz(&mut rng, 1.0)],
            [cz(&mut rng, 1.0), cz(&mut rng, 1.0)],
        );
        let r = Complex64::from_polar(
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let (cm, dm) = (Mat2::diag(c[0], c[1]), Mat2::diag(d[0], d[1]));
        let q = quad_u2(|u| (r * (cm * u.adjoint() * dm * *u).trace()).exp(), 48, 64);
        row(&mut t, "U(2)", case, hciz_u2(c, d, r), q);
    }
    let mut case = 0;
    while case < 50 {
        let (c, d) = (
            [cz(&mut rng, 1.5), cz(&mut rng, 1.5)],
            [cz(&mut rng, 1.5), cz(&mut rng, 1.5)],
        );
        let r = Complex64::from_polar(
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        if (r * (c[0] - c[1]) * (d[0] - d[1])).re < 0.1 {
            continue;
        }
        let (cm, dm) = (Mat2::diag(c[0], c[1]), Mat2::diag(d[0], d[1]));
        let q = quad_u11(
            |s| (-r * (cm * s.inverse() * dm * *s).trace()).exp(),
            20.0,
            8,
        )?;
        row(&mut t, "U(1,1)", case, hciz_u11(c, d, r)?, q);
        case += 1;
    }
    let (mut nu, mut nb) = (0, 0);
    while nu < 10 || nb < 10 {
        let k = SaddleConstants::new(rng.gen_range(-1.3..1.3))?;
        let p = Boundary::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.2..1.0),
        );
        if nu < 10 {
            let u = [[
                Complex64::from_polar(1.0, rng.gen_range(-3.1..3.1)),
                Complex64::from_polar(1.0, rng.gen_range(-3.1..3.1)),
            ]];
            row(
                &mut t,
                "exp f_u",
                nu,
                exp_f_u(&k, &u, p),
                exp_f_u_quadrature(&k, &u, p, 48, 8),
            );
            nu += 1;
        }
        let w = Complex64::from_polar(1.0, k.phi_plus);
        let b = [[
            w * rng.gen_range(0.3..2.0),
            w.conj() * rng.gen_range(0.3..2.0),
        ]];
        if nb < 10 {
            if let Ok(closed) = exp_f_b(&k, &b, p) {
                row(
                    &mut t,
                    "exp f_b",
                    nb,
                    closed,
                    exp_f_b_quadrature(&k, &b, p, 20.0, 8)?,
                );
                nb += 1;
            }
        }
    }
    Ok((vec![t], summary, all))
}

/// Tolerance used for a closure point; separations near a nonzero integer sit
/// on a cancellation in the assembly and get a looser bound.
pub fn closure_tolerance(s: f64) -> f64 {
    if s.abs() < 1e-2 {
        1e-6
    } else if (s - s.round()).abs() < 0.05 {
        1e-7
    } else {
        1e-10
    }
}

pub fn closure(cfg: &RunConfig) -> Result<Verified, CliError> {
    let mut t = Table::new(
        "closure",
        &["s", "value", "prediction", "residual", "tolerance", "pass"],
    );
    let mut all = true;
    let mut worst = 0.0f64;
    for &s in &cfg.separations {
        let v = closure_identity(cfg.xi1, cfg.xi1 + s, cfg.lambda0)?;
        let p = sine_kernel_r2(s);
        let r = (v - p).abs();
        let tol = closure_tolerance(s);
        all &= r <= tol;
        worst = worst.max(r);
        t.push(vec![
            num(s),
            num(v),
            num(p),
            num(r),
            num(tol),
            flag(r <= tol),
        ]);
    }
    let c = closure_constant(&SaddleConstants::new_inner(cfg.lambda0)?);
    all &= (c - 1.0).abs() <= 1e-12;
    let summary = BTreeMap::from([
        ("worst_residual".to_string(), worst),
        ("closure_constant".to_string(), c),
    ]);
    Ok((vec![t], summary, all))
}
