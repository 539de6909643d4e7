//! Mergeable per-kind accumulators for the sampling experiments.

use std::collections::BTreeMap;

use bbrm::saddle::SaddleConstants;
use bbrm::stats::{
    default_pair_edges, g2_boundary_derivative, g2_sample, semicircle_cdf, wigner_surmise_cdf,
    ComplexMean, CorrelationEstimate, DosEstimate, F2Accumulator, G2Kind, G2Point, PairAccumulator,
    SpacingAccumulator,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{Kind, RunConfig};
use crate::output::{num, Table};
use crate::CliError;

/// Lower end of the separation range used for the summary checks.
pub const S_MIN: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Partial {
    pub lambda0: f64,
    pub n: usize,
    pub xi1: f64,
    pub xi2: f64,
    pub eps: f64,
    pub h: f64,
    /// `G2^{+-}` at `xi' = xi`.
    pub boundary: ComplexMean,
    pub max_deviation: f64,
    /// Central difference in `xi1'` at `xi' = xi`.
    pub derivative: ComplexMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum Partial {
    Dos(DosEstimate),
    R2(PairAccumulator),
    F2(F2Accumulator),
    G2(G2Partial),
    Spacing(SpacingAccumulator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFile {
    pub config_hash: String,
    pub config: String,
    pub partial: Partial,
}

pub const DOS_RANGE: (f64, f64) = (-2.2, 2.2);
pub const SPACING_EDGES: (f64, f64, usize) = (0.0, 3.0, 30);

impl Partial {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let n = cfg.ensemble.n();
        Ok(match cfg.kind {
            Kind::Dos => Partial::Dos(DosEstimate::uniform(DOS_RANGE.0, DOS_RANGE.1, cfg.bins)?),
            Kind::R2 => Partial::R2(PairAccumulator::new(
                cfg.lambda0,
                n,
                cfg.window,
                default_pair_edges(),
                cfg.batches,
            )?),
            Kind::F2 => Partial::F2(F2Accumulator::new(
                cfg.lambda0,
                n,
                cfg.bases.clone(),
                cfg.separations.clone(),
                cfg.eps.clone(),
                cfg.batches,
            )?),
            Kind::G2 => Partial::G2(G2Partial {
                lambda0: cfg.lambda0,
                n,
                xi1: cfg.xi1,
                xi2: cfg.xi2,
                eps: cfg.eps[0],
                h: cfg.h,
                boundary: ComplexMean::new(cfg.batches),
                max_deviation: 0.0,
                derivative: ComplexMean::new(cfg.batches),
            }),
            Kind::Spacing => Partial::Spacing(SpacingAccumulator::new(cfg.lambda0, n, cfg.window)),
            k => return Err(CliError::Usage(format!("{k} does not sample the ensemble"))),
        })
    }

    pub fn add(&mut self, index: u64, spectrum: &[f64]) {
        match self {
            Partial::Dos(a) => a.add(spectrum),
            Partial::R2(a) => a.add(index, spectrum),
            Partial::F2(a) => a.add(index, spectrum),
            Partial::G2(g) => {
                let p = G2Point {
                    xi1: g.xi1,
                    xi2: g.xi2,
                    xi1p: g.xi1,
                    xi2p: g.xi2,
                };
                let v = g2_sample(spectrum, g.lambda0, g.n, p, g.eps, G2Kind::PlusMinus);
                g.max_deviation = g.max_deviation.max((v - 1.0).norm());
                g.boundary.add(index, v);
                let d = g2_boundary_derivative(
                    spectrum,
                    g.lambda0,
                    g.n,
                    g.xi1,
                    g.xi2,
                    g.eps,
                    G2Kind::PlusMinus,
                    g.h,
                );
                g.derivative.add(index, d);
            }
            Partial::Spacing(a) => a.add(spectrum),
        }
    }

    pub fn merge(&mut self, other: &Partial) -> Result<(), CliError> {
        match (self, other) {
            (Partial::Dos(a), Partial::Dos(b)) => a.merge(b)?,
            (Partial::R2(a), Partial::R2(b)) => a.merge(b)?,
            (Partial::F2(a), Partial::F2(b)) => a.merge(b)?,
            (Partial::G2(a), Partial::G2(b)) => {
                a.boundary.merge(&b.boundary)?;
                a.derivative.merge(&b.derivative)?;
                a.max_deviation = a.max_deviation.max(b.max_deviation);
            }
            (Partial::Spacing(a), Partial::Spacing(b)) => a.merge(b),
            _ => {
                return Err(CliError::Usage(
                    "cannot merge partials of different kinds".into(),
                ))
            }
        }
        Ok(())
    }

    /// Sample counts per batch (a single entry for unbatched kinds).
    pub fn batch_samples(&self) -> Vec<u64> {
        match self {
            Partial::Dos(a) => vec![a.spectra],
            Partial::R2(a) => a.batch_spectra.clone(),
            Partial::F2(a) => a.batch_spectra.clone(),
            Partial::G2(g) => g.boundary.counts.clone(),
            Partial::Spacing(a) => vec![a.spectra],
        }
    }

    pub fn render(&self) -> (Vec<Table>, BTreeMap<String, f64>) {
        let mut summary = BTreeMap::new();
        let tables = match self {
            Partial::Dos(a) => {
                let mut t = Table::new("dos", &["lo", "hi", "center", "density", "semicircle"]);
                for ((w, c), d) in a.edges.windows(2).zip(a.centers()).zip(a.density()) {
                    let sc = (semicircle_cdf(w[1]) - semicircle_cdf(w[0])) / (w[1] - w[0]);
                    t.push(vec![num(w[0]), num(w[1]), num(c), num(d), num(sc)]);
                }
                let total: u64 = a.counts.iter().sum();
                let mut cum = 0u64;
                let mut dist: f64 = 0.0;
                for (k, &c) in a.counts.iter().enumerate() {
                    cum += c;
                    let (f0, f1) = (semicircle_cdf(a.edges[0]), semicircle_cdf(a.edges[k + 1]));
                    let want = (f1 - f0) / (semicircle_cdf(*a.edges.last().unwrap()) - f0);
                    dist = dist.max((cum as f64 / total.max(1) as f64 - want).abs());
                }
                summary.insert("spectra".into(), a.spectra as f64);
                summary.insert("outside".into(), a.outside as f64);
                summary.insert("cdf_distance_on_edges".into(), dist);
                vec![t]
            }
            Partial::R2(a) => {
                let e = a.estimate();
                summary.insert("worst_ratio".into(), worst_from(&e, S_MIN));
                summary.insert(
                    "low_statistics".into(),
                    if e.low_statistics { 1.0 } else { 0.0 },
                );
                vec![correlation_table("r2", &e)]
            }
            Partial::F2(a) => {
                let e = a.extrapolated();
                summary.insert("worst_ratio".into(), worst_from(&e, S_MIN));
                let mut raw = Table::new("f2_raw", &["eps", "s", "value", "stderr"]);
                for (k, &eps) in a.eps.iter().enumerate() {
                    let r = a.estimate(k, true);
                    for i in 0..r.grid.len() {
                        raw.push(vec![
                            num(eps),
                            num(r.grid[i]),
                            num(r.values[i]),
                            num(r.stderr[i]),
                        ]);
                    }
                }
                vec![correlation_table("f2", &e), raw]
            }
            Partial::G2(g) => {
                let mut t = Table::new(
                    "g2",
                    &[
                        "quantity",
                        "re",
                        "im",
                        "stderr_re",
                        "stderr_im",
                        "expected_re",
                        "expected_im",
                    ],
                );
                let expected = g2_expected_derivative(g.lambda0);
                let (bm, bre, bim) = g.boundary.summary();
                let (dm, dre, dim) = g.derivative.summary();
                t.push(vec![
                    "boundary_value".into(),
                    num(bm.re),
                    num(bm.im),
                    num(bre),
                    num(bim),
                    num(1.0),
                    num(0.0),
                ]);
                t.push(vec![
                    "d_dxi1p".into(),
                    num(dm.re),
                    num(dm.im),
                    num(dre),
                    num(dim),
                    num(expected.re),
                    num(expected.im),
                ]);
                summary.insert("max_boundary_deviation".into(), g.max_deviation);
                summary.insert("derivative_z_re".into(), (dm.re - expected.re).abs() / dre);
                summary.insert("derivative_z_im".into(), (dm.im - expected.im).abs() / dim);
                vec![t]
            }
            Partial::Spacing(a) => {
                let (lo, hi, bins) = SPACING_EDGES;
                let edges: Vec<f64> = (0..=bins)
                    .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
                    .collect();
                let mut t = Table::new("spacing", &["lo", "hi", "density", "surmise"]);
                if let Ok(h) = a.histogram(&edges) {
                    for (w, d) in edges.windows(2).zip(h.density()) {
                        let s =
                            (wigner_surmise_cdf(w[1]) - wigner_surmise_cdf(w[0])) / (w[1] - w[0]);
                        t.push(vec![num(w[0]), num(w[1]), num(d), num(s)]);
                    }
                }
                summary.insert("gaps".into(), a.gaps.len() as f64);
                summary.insert("ks_vs_surmise".into(), a.ks_vs_surmise());
                vec![t]
            }
        };
        (tables, summary)
    }
}

/// `-i a_+ / rho(lambda0)`, the `xi1'`-derivative of `G2^{+-}` at `xi' = xi`.
pub fn g2_expected_derivative(lambda0: f64) -> Complex64 {
    match SaddleConstants::new(lambda0) {
        Ok(k) => -Complex64::i() * k.a_plus / k.rho0,
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    }
}

/// `max |value - prediction| / max(3 stderr, 0.07)` over grid points `s >= s_min`.
pub fn worst_from(e: &CorrelationEstimate, s_min: f64) -> f64 {
    (0..e.grid.len())
        .filter(|&i| e.grid[i] >= s_min)
        .map(|i| (e.values[i] - e.prediction[i]).abs() / (3.0 * e.stderr[i]).max(0.07))
        .fold(0.0, f64::max)
}

fn correlation_table(name: &str, e: &CorrelationEstimate) -> Table {
    let mut t = Table::new(name, &["s", "value", "stderr", "prediction"]);
    for i in 0..e.grid.len() {
        t.push(vec![
            num(e.grid[i]),
            num(e.values[i]),
            num(e.stderr[i]),
            num(e.prediction[i]),
        ]);
    }
    t
}
