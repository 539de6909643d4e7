//! Flat `key = value` run configuration.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use bbrm::ensemble::EnsembleConfig;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Dos,
    R2,
    F2,
    G2,
    Spacing,
    SaddleScan,
    SaddleVerify,
    GrassmannVerify,
    HcizVerify,
    Closure,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Dos,
        Kind::R2,
        Kind::F2,
        Kind::G2,
        Kind::Spacing,
        Kind::SaddleScan,
        Kind::SaddleVerify,
        Kind::GrassmannVerify,
        Kind::HcizVerify,
        Kind::Closure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Dos => "dos",
            Kind::R2 => "r2",
            Kind::F2 => "f2",
            Kind::G2 => "g2",
            Kind::Spacing => "spacing",
            Kind::SaddleScan => "saddle-scan",
            Kind::SaddleVerify => "saddle-verify",
            Kind::GrassmannVerify => "grassmann-verify",
            Kind::HcizVerify => "hciz-verify",
            Kind::Closure => "closure",
        }
    }

    /// Kinds that sample the ensemble.
    pub fn is_monte_carlo(self) -> bool {
        matches!(
            self,
            Kind::Dos | Kind::R2 | Kind::F2 | Kind::G2 | Kind::Spacing
        )
    }

    /// Kinds whose statistics are only meaningful well inside the bulk.
    fn needs_bulk(self) -> bool {
        matches!(
            self,
            Kind::R2 | Kind::F2 | Kind::G2 | Kind::Spacing | Kind::Closure
        )
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown experiment kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: Kind,
    pub ensemble: EnsembleConfig,
    pub lambda0: f64,
    /// Separations `s` for f2 and closure.
    pub separations: Vec<f64>,
    /// Base points averaged over by f2.
    pub bases: Vec<f64>,
    /// Imaginary offsets for f2; g2 uses the first one.
    pub eps: Vec<f64>,
    pub xi1: f64,
    pub xi2: f64,
    /// Central difference step for g2.
    pub h: f64,
    pub samples: u64,
    pub first_sample: u64,
    /// Half-width of the r2/spacing window in mean spacings.
    pub window: f64,
    pub bins: usize,
    pub batches: usize,
    pub restarts: usize,
    pub workers: usize,
    pub out: PathBuf,
    pub cache: Option<PathBuf>,
}

pub const OUT_ENV: &str = "BBRM_OUT";

impl RunConfig {
    pub fn new(kind: Kind) -> Self {
        RunConfig {
            kind,
            ensemble: EnsembleConfig::default(),
            lambda0: 0.0,
            separations: (1..=12).map(|i| 0.25 * i as f64).collect(),
            bases: (-8..=8).map(f64::from).collect(),
            eps: vec![0.25, 0.5, 1.0],
            xi1: 0.0,
            xi2: 0.5,
            h: 1e-4,
            samples: 200,
            first_sample: 0,
            window: 8.0,
            bins: 44,
            batches: 20,
            restarts: 20,
            workers: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            out: std::env::var_os(OUT_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("bbrm-out")),
            cache: None,
        }
    }

    /// Parses `key = value` lines over the defaults for `kind`. A `kind` key in
    /// the text must agree with the argument.
    pub fn parse(kind: Kind, text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::new(kind);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::Usage(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
            v.parse()
                .map_err(|_| CliError::Usage(format!("bad value {v:?} for {key}")))
        }
        fn list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
            v.split(',').map(|x| num(key, x.trim())).collect()
        }
        match key {
            "kind" => {
                let k: Kind = value.parse()?;
                if k != self.kind {
                    return Err(CliError::Usage(format!(
                        "config is for {k}, not {}",
                        self.kind
                    )));
                }
            }
            "d" | "m" | "alpha" | "W" | "w" | "seed" => self
                .ensemble
                .set(key, value)
                .map_err(|e| CliError::Usage(e.to_string()))?,
            "lambda0" => self.lambda0 = num(key, value)?,
            "separations" => self.separations = list(key, value)?,
            "bases" => self.bases = list(key, value)?,
            "eps" => self.eps = list(key, value)?,
            "xi1" => self.xi1 = num(key, value)?,
            "xi2" => self.xi2 = num(key, value)?,
            "h" => self.h = num(key, value)?,
            "samples" => self.samples = num(key, value)?,
            "first_sample" => self.first_sample = num(key, value)?,
            "window" => self.window = num(key, value)?,
            "bins" => self.bins = num(key, value)?,
            "batches" => self.batches = num(key, value)?,
            "restarts" => self.restarts = num(key, value)?,
            "workers" => self.workers = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "cache" => self.cache = Some(PathBuf::from(value)),
            _ => return Err(CliError::Usage(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Checks every parameter domain before anything runs.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        self.ensemble
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if self.kind.needs_bulk() && !(self.lambda0.abs() < 2f64.sqrt()) {
            return bad(format!(
                "lambda0 = {} must satisfy |lambda0| < sqrt 2",
                self.lambda0
            ));
        }
        if self.kind.is_monte_carlo() && self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0)) {
            return bad("eps values must be positive".into());
        }
        if self.separations.is_empty() || self.separations.iter().any(|s| !s.is_finite()) {
            return bad("separations must be a nonempty list of finite numbers".into());
        }
        if self.kind == Kind::Closure && self.separations.iter().any(|&s| s == 0.0) {
            return bad("closure separations must be nonzero".into());
        }
        if self.bases.is_empty() {
            return bad("bases must be nonempty".into());
        }
        if !(self.h > 0.0 && self.h < 0.1) {
            return bad(format!("h = {} must lie in (0, 0.1)", self.h));
        }
        if self.kind == Kind::R2 && !(2.0 * self.window > 3.0) {
            return bad(format!(
                "window = {} must exceed 1.5 for pair separations up to 3",
                self.window
            ));
        }
        if !(self.window > 0.0) {
            return bad("window must be positive".into());
        }
        if self.bins == 0 || self.batches < 2 || self.workers == 0 || self.restarts == 0 {
            return bad(
                "bins, restarts and workers must be positive and batches at least 2".into(),
            );
        }
        Ok(())
    }

    /// Every key that affects numerical results, in canonical form. Sample range,
    /// worker count and paths are left out, so runs that differ only in those
    /// share a hash and can be merged.
    pub fn scientific_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut s = format!("kind = {}\n", self.kind);
        s.push_str(&self.ensemble.to_text());
        writeln!(s, "lambda0 = {:?}", self.lambda0).unwrap();
        writeln!(s, "separations = {}", join(&self.separations)).unwrap();
        writeln!(s, "bases = {}", join(&self.bases)).unwrap();
        writeln!(s, "eps = {}", join(&self.eps)).unwrap();
        writeln!(s, "xi1 = {:?}", self.xi1).unwrap();
        writeln!(s, "xi2 = {:?}", self.xi2).unwrap();
        writeln!(s, "h = {:?}", self.h).unwrap();
        writeln!(s, "window = {:?}", self.window).unwrap();
        writeln!(s, "bins = {}", self.bins).unwrap();
        writeln!(s, "batches = {}", self.batches).unwrap();
        writeln!(s, "restarts = {}", self.restarts).unwrap();
        s
    }

    /// Full canonical text; round-trips through [`RunConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut s = self.scientific_text();
        writeln!(s, "samples = {}", self.samples).unwrap();
        writeln!(s, "first_sample = {}", self.first_sample).unwrap();
        writeln!(s, "workers = {}", self.workers).unwrap();
        writeln!(s, "out = {}", self.out.display()).unwrap();
        if let Some(c) = &self.cache {
            writeln!(s, "cache = {}", c.display()).unwrap();
        }
        s
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.scientific_text().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::new(Kind::F2);
        cfg.set("eps", "0.5, 1").unwrap();
        cfg.set("W", "30").unwrap();
        cfg.cache = Some(PathBuf::from("/tmp/c"));
        let back = RunConfig::parse(Kind::F2, &cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn hash_ignores_sample_range_and_workers() {
        let a = RunConfig::new(Kind::Dos);
        let mut b = a.clone();
        b.workers = 7;
        b.first_sample = 1000;
        b.samples = 3;
        assert_eq!(a.hash(), b.hash());
        b.lambda0 = 0.1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn bounds_are_named() {
        let mut cfg = RunConfig::new(Kind::R2);
        cfg.lambda0 = 1.5;
        let e = cfg.validate().unwrap_err().to_string();
        assert!(e.contains("sqrt 2"), "{e}");
        let mut cfg = RunConfig::new(Kind::Dos);
        cfg.set("alpha", "0.3").unwrap();
        assert!(cfg.validate().is_err());
        assert!(RunConfig::parse(Kind::Dos, "kind = r2").is_err());
        assert!(RunConfig::parse(Kind::Dos, "colour = 3").is_err());
    }
}
