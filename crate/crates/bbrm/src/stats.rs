//! Density of states and local eigenvalue statistics.
//!
//! Accumulators are mergeable: every spectrum is tagged with its sample index,
//! which also fixes its batch (`index % batches`). Merging two runs over disjoint
//! index sets gives exactly the result of one run over their union.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_BATCHES: usize = 20;

pub fn semicircle_density(lambda: f64) -> f64 {
    if lambda.abs() >= 2.0 {
        0.0
    } else {
        (4.0 - lambda * lambda).sqrt() / (2.0 * PI)
    }
}

pub fn semicircle_cdf(lambda: f64) -> f64 {
    if lambda <= -2.0 {
        0.0
    } else if lambda >= 2.0 {
        1.0
    } else {
        (lambda * (4.0 - lambda * lambda).sqrt() / 4.0 + (lambda / 2.0).asin()) / PI + 0.5
    }
}

/// Inverse of [`semicircle_cdf`] on `[0, 1]`, by bisection.
pub fn semicircle_quantile(p: f64) -> f64 {
    let (mut lo, mut hi) = (-2.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if semicircle_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Two-point function of the sine process, `1 - (sin(pi s) / (pi s))^2`.
pub fn sine_kernel_r2(s: f64) -> f64 {
    if s.abs() < 1e-8 {
        return PI * PI * s * s / 3.0;
    }
    let x = PI * s;
    1.0 - (x.sin() / x).powi(2)
}

/// GUE Wigner surmise `P(s) = 32 s^2 / pi^2 exp(-4 s^2 / pi)`.
pub fn wigner_surmise_pdf(s: f64) -> f64 {
    32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp()
}

pub fn wigner_surmise_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    statrs::function::erf::erf(2.0 * s / PI.sqrt()) - 4.0 * s / PI * (-4.0 * s * s / PI).exp()
}

/// Kolmogorov distance between the empirical distribution of `points` and `cdf`.
pub fn ks_statistic(points: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = points.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Sup distance between the pooled empirical spectral CDF and the semicircle CDF.
pub fn cdf_sup_distance(spectra: &[Vec<f64>]) -> f64 {
    let pooled: Vec<f64> = spectra.iter().flatten().copied().collect();
    ks_statistic(&pooled, semicircle_cdf)
}

/// Histogram density estimate.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct DosEstimate {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Eigenvalues outside the outermost edges.
    pub outside: u64,
    pub spectra: u64,
}

impl DosEstimate {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParam(
                "bin edges must be strictly increasing, at least two".into(),
            ));
        }
        let bins = edges.len() - 1;
        Ok(DosEstimate {
            edges,
            counts: vec![0; bins],
            outside: 0,
            spectra: 0,
        })
    }

    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        let edges = (0..=bins)
            .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
            .collect();
        Self::new(edges)
    }

    pub fn add(&mut self, spectrum: &[f64]) {
        let (lo, hi) = (self.edges[0], *self.edges.last().unwrap());
        for &x in spectrum {
            if !(x >= lo && x <= hi) {
                self.outside += 1;
                continue;
            }
            // first edge strictly greater than x, clamped so x == hi lands in the last bin
            let k = self
                .edges
                .partition_point(|&e| e <= x)
                .clamp(1, self.counts.len());
            self.counts[k - 1] += 1;
        }
        self.spectra += 1;
    }

    pub fn merge(&mut self, other: &DosEstimate) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::InvalidParam(
                "cannot merge density estimates with different bins".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside += other.outside;
        self.spectra += other.spectra;
        Ok(())
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Normalized so that `sum(density * width) = 1` over in-range eigenvalues.
    pub fn density(&self) -> Vec<f64> {
        let total: u64 = self.counts.iter().sum();
        self.edges
            .windows(2)
            .zip(&self.counts)
            .map(|(w, &c)| {
                if total == 0 {
                    0.0
                } else {
                    c as f64 / (total as f64 * (w[1] - w[0]))
                }
            })
            .collect()
    }
}

pub fn estimate_dos(spectra: &[Vec<f64>], edges: &[f64]) -> Result<DosEstimate> {
    let mut dos = DosEstimate::new(edges.to_vec())?;
    for s in spectra {
        dos.add(s);
    }
    Ok(dos)
}

/// A function of one variable estimated on a grid, with batch-means standard errors.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub prediction: Vec<f64>,
    pub samples: u64,
    pub low_statistics: bool,
}

impl CorrelationEstimate {
    /// Largest `|value - prediction|` in units of `max(k * stderr, floor)`; at most 1 passes.
    pub fn worst_ratio(&self, k: f64, floor: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.prediction)
            .zip(&self.stderr)
            .map(|((v, p), e)| (v - p).abs() / (k * e).max(floor))
            .fold(0.0, f64::max)
    }
}

/// Mean and standard error from per-batch sums and counts.
fn batch_summary(sums: &[f64], counts: &[u64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let mean = sums.iter().sum::<f64>() / total.max(1) as f64;
    let means: Vec<f64> = sums
        .iter()
        .zip(counts)
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let b = means.len();
    if b < 2 {
        return (mean, f64::INFINITY);
    }
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    (mean, (var / b as f64).sqrt())
}

/// Linear unfolding around `lambda0`: `x = N rho(lambda0) (lambda - lambda0)`.
fn unfold_linear(spectrum: &[f64], lambda0: f64, n: usize) -> impl Iterator<Item = f64> + '_ {
    let scale = n as f64 * semicircle_density(lambda0);
    spectrum.iter().map(move |&l| scale * (l - lambda0))
}

/// Pair counting for the two-point function on the scale of the local mean spacing.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct PairAccumulator {
    pub lambda0: f64,
    pub n: usize,
    /// Half-width of the counting window in mean spacings.
    pub window: f64,
    pub edges: Vec<f64>,
    /// `counts[batch][bin]`
    pub counts: Vec<Vec<u64>>,
    pub batch_spectra: Vec<u64>,
}

impl PairAccumulator {
    pub fn new(
        lambda0: f64,
        n: usize,
        window: f64,
        edges: Vec<f64>,
        batches: usize,
    ) -> Result<Self> {
        if !(lambda0.abs() < 2.0) {
            return Err(Error::InvalidParam(format!(
                "lambda0 = {lambda0} is outside the bulk"
            )));
        }
        if edges.len() < 2 || edges[0] < 0.0 || *edges.last().unwrap() >= 2.0 * window {
            return Err(Error::InvalidParam(
                "pair bins must lie in [0, 2 * window)".into(),
            ));
        }
        let bins = edges.len() - 1;
        Ok(PairAccumulator {
            lambda0,
            n,
            window,
            edges,
            counts: vec![vec![0; bins]; batches],
            batch_spectra: vec![0; batches],
        })
    }

    pub fn add(&mut self, index: u64, spectrum: &[f64]) {
        let b = (index % self.counts.len() as u64) as usize;
        let mut xs: Vec<f64> = unfold_linear(spectrum, self.lambda0, self.n)
            .filter(|x| x.abs() <= self.window)
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let smax = *self.edges.last().unwrap();
        let (lo, bins) = (self.edges[0], self.counts[b].len());
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                let s = xs[j] - xs[i];
                if s > smax {
                    break;
                }
                if s < lo {
                    continue;
                }
                let k = self.edges.partition_point(|&e| e <= s).clamp(1, bins);
                self.counts[b][k - 1] += 1;
            }
        }
        self.batch_spectra[b] += 1;
    }

    pub fn merge(&mut self, other: &PairAccumulator) -> Result<()> {
        if self.edges != other.edges
            || self.counts.len() != other.counts.len()
            || self.window != other.window
            || self.lambda0 != other.lambda0
        {
            return Err(Error::InvalidParam(
                "pair accumulators differ in setup".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.batch_spectra.iter_mut().zip(&other.batch_spectra) {
            *a += b;
        }
        Ok(())
    }

    /// Normalized so that uncorrelated points of unit density give 1.
    pub fn estimate(&self) -> CorrelationEstimate {
        let l = 2.0 * self.window;
        let bins = self.edges.len() - 1;
        let mut grid = Vec::with_capacity(bins);
        let mut values = Vec::with_capacity(bins);
        let mut stderr = Vec::with_capacity(bins);
        let mut prediction = Vec::with_capacity(bins);
        let mut min_count = u64::MAX;
        for k in 0..bins {
            let (a, b) = (self.edges[k], self.edges[k + 1]);
            // exposure of one spectrum: integral of (L - s) over the bin
            let exposure = (b - a) * (l - 0.5 * (a + b));
            let sums: Vec<f64> = self.counts.iter().map(|c| c[k] as f64 / exposure).collect();
            let (mean, se) = batch_summary(&sums, &self.batch_spectra);
            grid.push(0.5 * (a + b));
            values.push(mean);
            stderr.push(se);
            prediction.push(weighted_bin_average(sine_kernel_r2, a, b, l));
            min_count = min_count.min(self.counts.iter().map(|c| c[k]).sum());
        }
        let samples = self.batch_spectra.iter().sum();
        CorrelationEstimate {
            grid,
            values,
            stderr,
            prediction,
            samples,
            low_statistics: min_count < 100,
        }
    }
}

/// Average of `f` over `[a, b]` with weight `L - s` (Simpson, 64 panels).
fn weighted_bin_average(f: impl Fn(f64) -> f64, a: f64, b: f64, l: f64) -> f64 {
    let n = 64;
    let h = (b - a) / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=n {
        let s = a + h * i as f64;
        let c = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        num += c * f(s) * (l - s);
        den += c * (l - s);
    }
    num / den
}

pub fn default_pair_edges() -> Vec<f64> {
    (0..=30).map(|i| 0.1 * i as f64).collect()
}

pub fn estimate_r2_pairs(
    spectra: &[Vec<f64>],
    lambda0: f64,
    n: usize,
    window: f64,
) -> Result<CorrelationEstimate> {
    let mut acc = PairAccumulator::new(lambda0, n, window, default_pair_edges(), DEFAULT_BATCHES)?;
    for (i, s) in spectra.iter().enumerate() {
        acc.add(i as u64, s);
    }
    Ok(acc.estimate())
}

/// Spectral parameter `lambda0 + i eps / N + xi / (N rho(lambda0))`.
pub fn local_z(lambda0: f64, n: usize, xi: f64, eps: f64) -> Complex64 {
    let nf = n as f64;
    Complex64::new(lambda0 + xi / (nf * semicircle_density(lambda0)), eps / nf)
}

/// Resolvent-based two-point function at separations `s`, averaged over base
/// points: each entry uses `(xi1, xi2) = (b, b + s)` for every `b` in `bases`.
///
/// Per spectrum the full product
/// `Tr(G(z1) - G(conj z1)) Tr(G(z2) - G(conj z2)) / (2 pi i N rho)^2` is recorded,
/// together with the same product with the diagonal `i = j` terms removed. The
/// diagonal part is a Lorentzian self-correlation that vanishes as `eps -> 0`
/// for `xi1 != xi2`, and removing it makes the `eps -> 0` extrapolation smooth.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct F2Accumulator {
    pub lambda0: f64,
    pub n: usize,
    pub bases: Vec<f64>,
    pub separations: Vec<f64>,
    pub eps: Vec<f64>,
    /// `full[batch][eps][separation]`, summed over bases
    pub full: Vec<Vec<Vec<f64>>>,
    pub distinct: Vec<Vec<Vec<f64>>>,
    pub batch_spectra: Vec<u64>,
}

impl F2Accumulator {
    pub fn new(
        lambda0: f64,
        n: usize,
        bases: Vec<f64>,
        separations: Vec<f64>,
        eps: Vec<f64>,
        batches: usize,
    ) -> Result<Self> {
        if !(lambda0.abs() < 2.0) {
            return Err(Error::InvalidParam(format!(
                "lambda0 = {lambda0} is outside the bulk"
            )));
        }
        if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::InvalidParam("eps values must be positive".into()));
        }
        if bases.is_empty() || batches == 0 {
            return Err(Error::InvalidParam(
                "need at least one base point and one batch".into(),
            ));
        }
        let zero = vec![vec![vec![0.0; separations.len()]; eps.len()]; batches];
        Ok(F2Accumulator {
            lambda0,
            n,
            bases,
            separations,
            eps,
            full: zero.clone(),
            distinct: zero,
            batch_spectra: vec![0; batches],
        })
    }

    /// `2 Im 1/(l - z)` for every eigenvalue, so that `Tr(G(z) - G(conj z)) = i * sum`.
    fn lorentz(&self, spectrum: &[f64], xi: f64, eps: f64) -> Vec<f64> {
        let z = local_z(self.lambda0, self.n, xi, eps);
        spectrum
            .iter()
            .map(|&l| 2.0 * (Complex64::new(l, 0.0) - z).inv().im)
            .collect()
    }

    pub fn add(&mut self, index: u64, spectrum: &[f64]) {
        let b = (index % self.batch_spectra.len() as u64) as usize;
        // (i t1)(i t2) / (2 pi i N rho)^2 = t1 t2 / (2 pi N rho)^2
        let norm = (2.0 * PI * self.n as f64 * semicircle_density(self.lambda0)).powi(2)
            * self.bases.len() as f64;
        for ei in 0..self.eps.len() {
            let eps = self.eps[ei];
            for &base in &self.bases.clone() {
                let a = self.lorentz(spectrum, base, eps);
                let t1: f64 = a.iter().sum();
                for si in 0..self.separations.len() {
                    let c = self.lorentz(spectrum, base + self.separations[si], eps);
                    let t2: f64 = c.iter().sum();
                    let diag: f64 = a.iter().zip(&c).map(|(x, y)| x * y).sum();
                    self.full[b][ei][si] += t1 * t2 / norm;
                    self.distinct[b][ei][si] += (t1 * t2 - diag) / norm;
                }
            }
        }
        self.batch_spectra[b] += 1;
    }

    pub fn merge(&mut self, other: &F2Accumulator) -> Result<()> {
        if self.bases != other.bases
            || self.separations != other.separations
            || self.eps != other.eps
            || self.batch_spectra.len() != other.batch_spectra.len()
            || self.lambda0 != other.lambda0
        {
            return Err(Error::InvalidParam(
                "F2 accumulators differ in setup".into(),
            ));
        }
        for (dst, src) in [
            (&mut self.full, &other.full),
            (&mut self.distinct, &other.distinct),
        ] {
            for (a, b) in dst.iter_mut().zip(src) {
                for (x, y) in a.iter_mut().zip(b) {
                    for (p, q) in x.iter_mut().zip(y) {
                        *p += q;
                    }
                }
            }
        }
        for (a, b) in self.batch_spectra.iter_mut().zip(&other.batch_spectra) {
            *a += b;
        }
        Ok(())
    }

    fn summarize(&self, weights: &[f64], distinct: bool) -> CorrelationEstimate {
        let src = if distinct { &self.distinct } else { &self.full };
        let mut values = Vec::new();
        let mut stderr = Vec::new();
        for si in 0..self.separations.len() {
            let sums: Vec<f64> = src
                .iter()
                .map(|batch| weights.iter().zip(batch).map(|(w, row)| w * row[si]).sum())
                .collect();
            let (m, e) = batch_summary(&sums, &self.batch_spectra);
            values.push(m);
            stderr.push(e);
        }
        let grid = self.separations.clone();
        let prediction = grid.iter().map(|&s| sine_kernel_r2(s)).collect();
        let samples: u64 = self.batch_spectra.iter().sum();
        CorrelationEstimate {
            grid,
            values,
            stderr,
            prediction,
            samples,
            low_statistics: samples < 10 * self.batch_spectra.len() as u64,
        }
    }

    /// Raw estimate at `eps[k]`.
    pub fn estimate(&self, k: usize, distinct: bool) -> CorrelationEstimate {
        let mut w = vec![0.0; self.eps.len()];
        w[k] = 1.0;
        self.summarize(&w, distinct)
    }

    /// Polynomial extrapolation of the distinct-pair estimate to `eps = 0`.
    pub fn extrapolated(&self) -> CorrelationEstimate {
        self.summarize(&lagrange_weights_at_zero(&self.eps), true)
    }
}

/// Weights `w_k` with `p(0) = sum w_k p(x_k)` for the interpolating polynomial.
pub fn lagrange_weights_at_zero(xs: &[f64]) -> Vec<f64> {
    (0..xs.len())
        .map(|k| {
            xs.iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &xj)| (0.0 - xj) / (xs[k] - xj))
                .product()
        })
        .collect()
}

pub fn estimate_f2(
    spectra: &[Vec<f64>],
    lambda0: f64,
    n: usize,
    xi1: f64,
    xi2: f64,
    eps: f64,
) -> Result<CorrelationEstimate> {
    let mut acc = F2Accumulator::new(
        lambda0,
        n,
        vec![xi1],
        vec![xi2 - xi1],
        vec![eps],
        DEFAULT_BATCHES,
    )?;
    for (i, s) in spectra.iter().enumerate() {
        acc.add(i as u64, s);
    }
    Ok(acc.estimate(0, false))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum G2Kind {
    /// `det(H - z1') det(H - conj z2) / (det(H - z1) det(H - conj z2'))`
    PlusMinus,
    /// `det(H - z1') det(H - z2) / (det(H - z1) det(H - z2'))`
    PlusPlus,
}

/// Shifts `(xi1, xi2)` in the denominator and `(xi1', xi2')` in the numerator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Point {
    pub xi1: f64,
    pub xi2: f64,
    pub xi1p: f64,
    pub xi2p: f64,
}

/// Ratio of characteristic polynomials for one spectrum, accumulated in logs.
/// Each eigenvalue contributes `log(l - a) - log(l - b)` pairs, so identical
/// numerator and denominator points give exactly 1.
pub fn g2_sample(
    spectrum: &[f64],
    lambda0: f64,
    n: usize,
    p: G2Point,
    eps: f64,
    kind: G2Kind,
) -> Complex64 {
    let z1 = local_z(lambda0, n, p.xi1, eps);
    let z1p = local_z(lambda0, n, p.xi1p, eps);
    let (z2, z2p) = match kind {
        G2Kind::PlusMinus => (
            local_z(lambda0, n, p.xi2, eps).conj(),
            local_z(lambda0, n, p.xi2p, eps).conj(),
        ),
        G2Kind::PlusPlus => (
            local_z(lambda0, n, p.xi2, eps),
            local_z(lambda0, n, p.xi2p, eps),
        ),
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for &l in spectrum {
        let l = Complex64::new(l, 0.0);
        acc += ((l - z1p).ln() - (l - z1).ln()) + ((l - z2).ln() - (l - z2p).ln());
    }
    acc.exp()
}

/// Central difference of [`g2_sample`] in `xi1'` at `xi' = xi`.
pub fn g2_boundary_derivative(
    spectrum: &[f64],
    lambda0: f64,
    n: usize,
    xi1: f64,
    xi2: f64,
    eps: f64,
    kind: G2Kind,
    h: f64,
) -> Complex64 {
    let at = |d: f64| {
        g2_sample(
            spectrum,
            lambda0,
            n,
            G2Point {
                xi1,
                xi2,
                xi1p: xi1 + d,
                xi2p: xi2,
            },
            eps,
            kind,
        )
    };
    (at(h) - at(-h)) / (2.0 * h)
}

/// Complex mean with separate batch-means errors for real and imaginary parts.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMean {
    pub sums: Vec<Complex64>,
    pub counts: Vec<u64>,
}

impl ComplexMean {
    pub fn new(batches: usize) -> Self {
        ComplexMean {
            sums: vec![Complex64::new(0.0, 0.0); batches],
            counts: vec![0; batches],
        }
    }

    pub fn add(&mut self, index: u64, value: Complex64) {
        let b = (index % self.counts.len() as u64) as usize;
        self.sums[b] += value;
        self.counts[b] += 1;
    }

    pub fn merge(&mut self, other: &ComplexMean) -> Result<()> {
        if self.counts.len() != other.counts.len() {
            return Err(Error::InvalidParam("batch counts differ".into()));
        }
        for i in 0..self.counts.len() {
            self.sums[i] += other.sums[i];
            self.counts[i] += other.counts[i];
        }
        Ok(())
    }

    /// `(mean, stderr of real part, stderr of imaginary part)`
    pub fn summary(&self) -> (Complex64, f64, f64) {
        let re: Vec<f64> = self.sums.iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.sums.iter().map(|z| z.im).collect();
        let (mr, er) = batch_summary(&re, &self.counts);
        let (mi, ei) = batch_summary(&im, &self.counts);
        (Complex64::new(mr, mi), er, ei)
    }
}

/// Nearest-neighbor spacings of spectra unfolded with the semicircle CDF.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingAccumulator {
    pub lambda0: f64,
    pub n: usize,
    pub window: f64,
    pub gaps: Vec<f64>,
    pub spectra: u64,
}

impl SpacingAccumulator {
    pub fn new(lambda0: f64, n: usize, window: f64) -> Self {
        SpacingAccumulator {
            lambda0,
            n,
            window,
            gaps: Vec::new(),
            spectra: 0,
        }
    }

    pub fn add(&mut self, spectrum: &[f64]) {
        let nf = self.n as f64;
        let center = nf * semicircle_cdf(self.lambda0);
        let mut xs: Vec<f64> = spectrum
            .iter()
            .map(|&l| nf * semicircle_cdf(l))
            .filter(|x| (x - center).abs() <= self.window)
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        self.gaps.extend(xs.windows(2).map(|w| w[1] - w[0]));
        self.spectra += 1;
    }

    pub fn merge(&mut self, other: &SpacingAccumulator) {
        self.gaps.extend_from_slice(&other.gaps);
        self.spectra += other.spectra;
    }

    /// Gaps rescaled to unit mean.
    pub fn normalized_gaps(&self) -> Vec<f64> {
        let mean = self.gaps.iter().sum::<f64>() / self.gaps.len().max(1) as f64;
        self.gaps.iter().map(|g| g / mean).collect()
    }

    pub fn ks_vs_surmise(&self) -> f64 {
        ks_statistic(&self.normalized_gaps(), wigner_surmise_cdf)
    }

    /// Histogram density of normalized gaps on `edges`.
    pub fn histogram(&self, edges: &[f64]) -> Result<DosEstimate> {
        estimate_dos(&[self.normalized_gaps()], edges)
    }
}
