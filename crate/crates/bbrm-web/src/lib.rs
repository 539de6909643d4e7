//! Browser bindings for a few small experiments. The plain functions work on any
//! target; the `wasm_bindgen` wrappers only turn errors into JS exceptions.

use bbrm::eigen::eigenvalues;
use bbrm::ensemble::{EnsembleConfig, Sampler};
use bbrm::grassmann::gaussian_berezin;
use bbrm::saddle::closure_identity;
use bbrm::stats::{cdf_sup_distance, sine_kernel_r2, DosEstimate};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Histogram range used by [`density_of_states`].
pub const DOS_RANGE: (f64, f64) = (-2.5, 2.5);

/// Pools `samples` spectra and returns `[sup CDF distance to the semicircle, density per bin...]`.
pub fn density_of_states(
    d: usize,
    m: usize,
    alpha: f64,
    w: usize,
    seed: u64,
    samples: u64,
    bins: usize,
) -> bbrm::Result<Vec<f64>> {
    let sampler = Sampler::new(&EnsembleConfig {
        d,
        m,
        alpha,
        w,
        seed,
    })?;
    let mut dos = DosEstimate::uniform(DOS_RANGE.0, DOS_RANGE.1, bins)?;
    let mut spectra = Vec::new();
    for i in 0..samples {
        let s = eigenvalues(&sampler.sample(i))?;
        dos.add(&s);
        spectra.push(s);
    }
    let mut out = vec![cdf_sup_distance(&spectra)];
    out.extend(dos.density());
    Ok(out)
}

/// `[s, closure value, sine kernel]` triples on `points` separations in `(0, s_max]`.
pub fn closure_curve(lambda0: f64, s_max: f64, points: usize) -> bbrm::Result<Vec<f64>> {
    let mut out = Vec::with_capacity(3 * points);
    for i in 1..=points {
        let s = s_max * i as f64 / points as f64;
        out.extend([s, closure_identity(0.0, s, lambda0)?, sine_kernel_r2(s)]);
    }
    Ok(out)
}

/// Random complex `n x n` matrix: `[Berezin re, im, LU re, im]`.
pub fn berezin_vs_lu(n: usize, seed: u64) -> bbrm::Result<Vec<f64>> {
    if !(1..=8).contains(&n) {
        return Err(bbrm::Error::InvalidParam("n must be in 1..=8".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let g = gaussian_berezin(&a)?;
    let det = a.lu().determinant();
    Ok(vec![g.re, g.im, det.re, det.im])
}

fn js(e: bbrm::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = densityOfStates)]
pub fn density_of_states_js(
    d: usize,
    m: usize,
    alpha: f64,
    w: usize,
    seed: u64,
    samples: u32,
    bins: usize,
) -> Result<Vec<f64>, JsError> {
    density_of_states(d, m, alpha, w, seed, samples as u64, bins).map_err(js)
}

#[wasm_bindgen(js_name = closureCurve)]
pub fn closure_curve_js(lambda0: f64, s_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    closure_curve(lambda0, s_max, points).map_err(js)
}

#[wasm_bindgen(js_name = berezinVsLu)]
pub fn berezin_vs_lu_js(n: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    berezin_vs_lu(n, seed).map_err(js)
}
