use bbrm_web::{berezin_vs_lu, closure_curve, density_of_states, DOS_RANGE};

#[test]
fn density_integrates_to_one() {
    let out = density_of_states(1, 2, 0.2, 20, 1, 4, 25).unwrap();
    let width = (DOS_RANGE.1 - DOS_RANGE.0) / 25.0;
    let mass: f64 = out[1..].iter().sum::<f64>() * width;
    assert!((mass - 1.0).abs() < 1e-12);
    assert!(out[0] > 0.0 && out[0] < 0.2);
}

#[test]
fn closure_curve_tracks_sine_kernel() {
    let c = closure_curve(0.3, 2.2, 11).unwrap();
    for t in c.chunks(3) {
        assert!((t[1] - t[2]).abs() < 1e-7, "s = {}", t[0]);
    }
}

#[test]
fn berezin_matches_lu() {
    for n in 1..=6 {
        let v = berezin_vs_lu(n, n as u64).unwrap();
        let scale = v[2].hypot(v[3]).max(1e-3);
        assert!((v[0] - v[2]).hypot(v[1] - v[3]) < 1e-12 * scale);
    }
    assert!(berezin_vs_lu(0, 1).is_err());
}

#[test]
fn bad_ensemble_is_an_error() {
    assert!(density_of_states(1, 2, 0.9, 20, 1, 1, 10).is_err());
}
