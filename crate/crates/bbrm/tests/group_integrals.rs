use bbrm::group::{hciz_u11, hciz_u2, quad_u11, quad_u2};
use bbrm::mat2::Mat2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cz(rng: &mut impl Rng, r: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn u2_integrand(c: [Complex64; 2], d: [Complex64; 2], r: Complex64) -> impl Fn(&Mat2) -> Complex64 {
    move |u: &Mat2| {
        (r * (Mat2::diag(c[0], c[1]) * u.adjoint() * Mat2::diag(d[0], d[1]) * *u).trace()).exp()
    }
}

#[test]
fn u2_known_values() {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let v = hciz_u2([one, zero], [one, zero], one);
    assert!((v.re - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    let q = quad_u2(u2_integrand([one, zero], [one, zero], one), 48, 64);
    assert!((q - v).norm() < 1e-12);
    assert!((hciz_u2([one, one], [one, -one], one) - one).norm() < 1e-15);
    assert!((hciz_u2([one, zero], [one, zero], zero) - one).norm() < 1e-15);
}

#[test]
fn u2_quadrature_matches_closed_form_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let (c, d) = (
            [cz(&mut rng, 1.0), cz(&mut rng, 1.0)],
            [cz(&mut rng, 1.0), cz(&mut rng, 1.0)],
        );
        let r = Complex64::from_polar(
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let exact = hciz_u2(c, d, r);
        let f = u2_integrand(c, d, r);
        let coarse = (quad_u2(&f, 3, 8) - exact).norm() / exact.norm();
        let fine = (quad_u2(&f, 6, 16) - exact).norm() / exact.norm();
        let full = (quad_u2(&f, 48, 64) - exact).norm() / exact.norm();
        // spectral convergence in v^2: doubling at least squares the coarse error
        assert!(
            fine <= coarse.powi(2).max(1e-13) * 10.0 || fine < 1e-12,
            "coarse {coarse:e} fine {fine:e}"
        );
        worst = worst.max(full);
    }
    assert!(worst < 1e-6, "worst relative error {worst:e}");
}

#[test]
fn u2_conjugation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = Mat2([
        [cz(&mut rng, 1.0), cz(&mut rng, 1.0)],
        [cz(&mut rng, 1.0), cz(&mut rng, 1.0)],
    ]);
    let v = Mat2::diag(
        Complex64::from_polar(1.0, 0.4),
        Complex64::from_polar(1.0, -1.1),
    );
    let f = |u: &Mat2| (a * *u).trace().exp();
    let plain = quad_u2(f, 48, 64);
    let conj = quad_u2(|u| f(&(v.adjoint() * *u * v)), 48, 64);
    assert!((plain - conj).norm() < 1e-12 * plain.norm());
}

#[test]
fn u11_known_values() {
    let one = Complex64::new(1.0, 0.0);
    let l = [one, -one];
    let v = hciz_u11(l, l, one).unwrap();
    assert!((v.re - (-2f64).exp() / 4.0).abs() < 1e-15);
    assert!((v.re - 0.0338338).abs() < 1e-7);
    let v2 = hciz_u11(l, l, one * 2.0).unwrap();
    assert!((v2.re - (-4f64).exp() / 8.0).abs() < 1e-15);
    let q = quad_u11(
        |t| (-(Mat2::diag(one, -one) * t.inverse() * Mat2::diag(one, -one) * *t).trace()).exp(),
        20.0,
        8,
    )
    .unwrap();
    assert!((q - v).norm() < 1e-10);
}

#[test]
fn u11_quadrature_matches_closed_form_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut worst = 0.0f64;
    let mut accepted = 0;
    while accepted < 50 {
        let (c, d) = (
            [cz(&mut rng, 1.5), cz(&mut rng, 1.5)],
            [cz(&mut rng, 1.5), cz(&mut rng, 1.5)],
        );
        let r = Complex64::from_polar(
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let kappa = r * (c[0] - c[1]) * (d[0] - d[1]);
        // keep a margin from the convergence boundary so the cutoff stays meaningful
        if kappa.re < 0.1 {
            continue;
        }
        accepted += 1;
        let exact = hciz_u11(c, d, r).unwrap();
        let (cm, dm) = (Mat2::diag(c[0], c[1]), Mat2::diag(d[0], d[1]));
        let q = quad_u11(
            |t| (-r * (cm * t.inverse() * dm * *t).trace()).exp(),
            20.0,
            8,
        )
        .unwrap();
        worst = worst.max((q - exact).norm() / exact.norm());
    }
    assert!(worst < 1e-6, "worst relative error {worst:e}");
}

#[test]
fn u11_divergent_input_is_signaled() {
    let one = Complex64::new(1.0, 0.0);
    let (cm, dm) = (Mat2::diag(one, -one), Mat2::diag(one, -one));
    assert!(hciz_u11([one, -one], [one, -one], -one).is_err());
    assert!(quad_u11(
        |t| (0.01 * (cm * t.inverse() * dm * *t).trace()).exp(),
        20.0,
        8
    )
    .is_err());
}
