//! Ensemble configuration, the block band sampler and the raw matrix file format.

use std::fmt::Write as _;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lattice::{build_lattice, variance_profile, Lattice};

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub d: usize,
    pub m: usize,
    pub alpha: f64,
    pub w: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            d: 1,
            m: 2,
            alpha: 0.2,
            w: 200,
            seed: 20240601,
        }
    }
}

impl EnsembleConfig {
    pub fn sites(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    /// Matrix dimension `N = W * m^d`.
    pub fn n(&self) -> usize {
        self.w * self.sites()
    }

    pub fn validate(&self) -> Result<()> {
        let lat = build_lattice(self.d, self.m)?;
        variance_profile(&lat, self.alpha, self.w).map(|_| ())
    }

    /// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = EnsembleConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Format(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Format(format!("bad value {v:?} for {key}")))
        }
        match key {
            "d" => self.d = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "W" | "w" => self.w = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::Format(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Canonical text form; round-trips through [`EnsembleConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "d = {}", self.d).unwrap();
        writeln!(s, "m = {}", self.m).unwrap();
        writeln!(s, "alpha = {:?}", self.alpha).unwrap();
        writeln!(s, "W = {}", self.w).unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        s
    }
}

/// Dense Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.n + c] = v;
    }

    /// Largest `|H_rc - conj(H_cr)|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for c in r..self.n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }
}

/// Generator for sample `index` under `seed`. Streams are independent and do not
/// depend on how samples are distributed over workers.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Precomputed lattice and profile for repeated sampling.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub config: EnsembleConfig,
    pub lattice: Lattice,
    pub profile: Vec<f64>,
}

impl Sampler {
    pub fn new(config: &EnsembleConfig) -> Result<Self> {
        let lattice = build_lattice(config.d, config.m)?;
        let profile = variance_profile(&lattice, config.alpha, config.w)?;
        Ok(Sampler {
            config: config.clone(),
            lattice,
            profile,
        })
    }

    /// Draws sample `index`: rows are ordered site-major, `row = j * W + a`.
    pub fn sample(&self, index: u64) -> HermitianMatrix {
        let n = self.config.n();
        let w = self.config.w;
        let sites = self.lattice.len();
        let mut rng = sample_rng(self.config.seed, index);
        let mut h = HermitianMatrix::zeros(n);
        for r in 0..n {
            let jr = r / w;
            let var = self.profile[jr * sites + jr];
            let g: f64 = StandardNormal.sample(&mut rng);
            h.set(r, r, Complex64::new(g * var.sqrt(), 0.0));
            for c in r + 1..n {
                let jc = c / w;
                let sd = (self.profile[jr * sites + jc] / 2.0).sqrt();
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                let z = Complex64::new(re * sd, im * sd);
                h.set(r, c, z);
                h.set(c, r, z.conj());
            }
        }
        h
    }
}

pub fn sample(config: &EnsembleConfig, index: u64) -> Result<HermitianMatrix> {
    Ok(Sampler::new(config)?.sample(index))
}

const MAGIC: &[u8; 4] = b"BBRM";
const VERSION: u32 = 1;

/// Writes the 16-byte header (magic, version, N) followed by row-major
/// little-endian `(re, im)` f64 pairs.
pub fn write_matrix<W: Write>(mut out: W, h: &HermitianMatrix) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(h.n as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(h.data.len() * 16);
    for z in &h.data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_matrix<R: Read>(mut input: R) -> Result<HermitianMatrix> {
    let mut header = [0u8; 16];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if &header[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let len = n
        .checked_mul(n)
        .and_then(|x| x.checked_mul(16))
        .ok_or_else(|| Error::Format("size overflow".into()))?;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != len {
        return Err(Error::Format(format!(
            "expected {len} payload bytes, found {}",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok(HermitianMatrix { n, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> EnsembleConfig {
        EnsembleConfig {
            d: 1,
            m: 2,
            alpha: 0.1,
            w: 3,
            seed: 7,
        }
    }

    #[test]
    fn config_round_trip() {
        let cfg = EnsembleConfig {
            d: 2,
            m: 3,
            alpha: 0.05,
            w: 11,
            seed: 99,
        };
        assert_eq!(EnsembleConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn config_rejects_garbage() {
        assert!(EnsembleConfig::parse("d = 1\nfoo = 2\n").is_err());
        assert!(EnsembleConfig::parse("alpha = 0.3\n").is_err());
        assert!(EnsembleConfig::parse("d 1\n").is_err());
    }

    #[test]
    fn sample_is_hermitian_and_reproducible() {
        let cfg = small();
        let a = sample(&cfg, 5).unwrap();
        let b = sample(&cfg, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.asymmetry(), 0.0);
        assert_eq!(a.n, 6);
        assert_ne!(a, sample(&cfg, 6).unwrap());
    }

    #[test]
    fn binary_round_trip() {
        let h = sample(&small(), 0).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &h).unwrap();
        assert_eq!(buf.len(), 16 + 36 * 16);
        assert_eq!(read_matrix(&buf[..]).unwrap(), h);
        buf[0] = b'X';
        assert!(read_matrix(&buf[..]).is_err());
    }
}
