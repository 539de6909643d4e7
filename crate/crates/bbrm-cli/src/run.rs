//! Orchestration: sample indices go to a worker pool in fixed chunks, and the
//! resulting spectra are folded into the accumulator serially in index order, so
//! every output byte is independent of the worker count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bbrm::eigen::eigenvalues;
use bbrm::ensemble::Sampler;
use rayon::prelude::*;

use crate::config::{sha256_hex, Kind, RunConfig};
use crate::output::{unix_now, write_file, RunManifest, Table};
use crate::partial::{Partial, PartialFile};
use crate::{verify, CliError};

const CHUNK: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub partial: Option<Partial>,
    pub summary: BTreeMap<String, f64>,
    /// `None` for plain data runs.
    pub passed: Option<bool>,
}

fn cache_path(dir: &Path, ensemble_hash: &str, index: u64) -> PathBuf {
    dir.join(&ensemble_hash[..16]).join(format!("{index}.f64"))
}

fn read_cached(path: &Path, n: usize) -> Option<Vec<f64>> {
    let bytes = std::fs::read(path).ok()?;
    if bytes.len() != 8 * n {
        return None;
    }
    Some(
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    )
}

fn spectrum(
    sampler: &Sampler,
    index: u64,
    cache: Option<(&Path, &str)>,
) -> Result<Vec<f64>, CliError> {
    let n = sampler.config.n();
    if let Some((dir, hash)) = cache {
        let path = cache_path(dir, hash, index);
        if let Some(s) = read_cached(&path, n) {
            return Ok(s);
        }
        let s = eigenvalues(&sampler.sample(index))?;
        std::fs::create_dir_all(path.parent().unwrap())?;
        let bytes: Vec<u8> = s.iter().flat_map(|x| x.to_le_bytes()).collect();
        std::fs::write(&path, bytes)?;
        return Ok(s);
    }
    Ok(eigenvalues(&sampler.sample(index))?)
}

/// Calls `f(index, spectrum)` for every sample of `cfg` in increasing index order.
pub fn for_each_spectrum(cfg: &RunConfig, mut f: impl FnMut(u64, &[f64])) -> Result<(), CliError> {
    let sampler = Sampler::new(&cfg.ensemble)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let hash = sha256_hex(cfg.ensemble.to_text().as_bytes());
    let cache = cfg.cache.as_deref().map(|d| (d, hash.as_str()));
    let end = cfg.first_sample + cfg.samples;
    let mut start = cfg.first_sample;
    while start < end {
        let stop = (start + CHUNK).min(end);
        let chunk: Vec<Result<Vec<f64>, CliError>> = pool.install(|| {
            (start..stop)
                .into_par_iter()
                .map(|i| spectrum(&sampler, i, cache))
                .collect()
        });
        for (i, s) in (start..stop).zip(chunk) {
            f(i, &s?);
        }
        start = stop;
    }
    Ok(())
}

/// All spectra of `cfg`, in index order.
pub fn spectra(cfg: &RunConfig) -> Result<Vec<Vec<f64>>, CliError> {
    let mut out = Vec::with_capacity(cfg.samples as usize);
    for_each_spectrum(cfg, |_, s| out.push(s.to_vec()))?;
    Ok(out)
}

/// Runs the experiment without touching the output directory.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    if cfg.kind.is_monte_carlo() {
        let mut partial = Partial::new(cfg)?;
        for_each_spectrum(cfg, |i, s| partial.add(i, s))?;
        let (tables, summary) = partial.render();
        return Ok(RunOutput {
            tables,
            partial: Some(partial),
            summary,
            passed: None,
        });
    }
    let (tables, summary, passed) = match cfg.kind {
        Kind::SaddleScan => verify::saddle_scan(cfg)?,
        Kind::SaddleVerify => verify::saddle_verify(cfg)?,
        Kind::GrassmannVerify => verify::grassmann_verify(cfg)?,
        Kind::HcizVerify => verify::hciz_verify(cfg)?,
        Kind::Closure => verify::closure(cfg)?,
        _ => unreachable!("sampling kinds handled above"),
    };
    Ok(RunOutput {
        tables,
        partial: None,
        summary,
        passed: Some(passed),
    })
}

fn write_outputs(
    dir: &Path,
    kind: Kind,
    config: String,
    science: String,
    config_hash: String,
    started: u64,
    out: &RunOutput,
) -> Result<RunManifest, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut outputs = BTreeMap::new();
    for t in &out.tables {
        let name = format!("{}.csv", t.name);
        let h = write_file(dir, &name, &t.to_csv()?)?;
        outputs.insert(name, h);
    }
    let (samples, batch_samples) = match &out.partial {
        Some(p) => {
            let file = PartialFile {
                config_hash: config_hash.clone(),
                config: science,
                partial: p.clone(),
            };
            let h = write_file(dir, "partial.json", &serde_json::to_vec_pretty(&file)?)?;
            outputs.insert("partial.json".into(), h);
            (spectra_count(p), p.batch_samples())
        }
        None => (0, Vec::new()),
    };
    let manifest = RunManifest {
        kind,
        config,
        config_hash,
        started,
        finished: unix_now(),
        samples,
        batch_samples,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs,
        summary: out
            .summary
            .iter()
            .map(|(k, v)| (k.clone(), v.is_finite().then_some(*v)))
            .collect(),
        passed: out.passed,
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_vec_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

fn spectra_count(p: &Partial) -> u64 {
    match p {
        Partial::Dos(a) => a.spectra,
        Partial::Spacing(a) => a.spectra,
        _ => p.batch_samples().iter().sum(),
    }
}

/// Executes `cfg` and writes its tables, partial accumulator and manifest.
pub fn run(cfg: &RunConfig) -> Result<(RunManifest, RunOutput), CliError> {
    let started = unix_now();
    let out = execute(cfg)?;
    let manifest = write_outputs(
        &cfg.out,
        cfg.kind,
        cfg.to_text(),
        cfg.scientific_text(),
        cfg.hash(),
        started,
        &out,
    )?;
    Ok((manifest, out))
}

pub fn read_partial(path: &Path) -> Result<PartialFile, CliError> {
    let bytes = std::fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Merges partial files in the given order; all must share one config hash.
pub fn merge_partials(files: &[PartialFile]) -> Result<PartialFile, CliError> {
    let first = files
        .first()
        .ok_or_else(|| CliError::Usage("nothing to merge".into()))?;
    let mut acc = first.partial.clone();
    for f in &files[1..] {
        if f.config_hash != first.config_hash {
            return Err(CliError::Usage(format!(
                "config hash {} does not match {}",
                f.config_hash, first.config_hash
            )));
        }
        acc.merge(&f.partial)?;
    }
    Ok(PartialFile {
        config_hash: first.config_hash.clone(),
        config: first.config.clone(),
        partial: acc,
    })
}

/// Reads, merges and renders partial files into `out`.
pub fn merge_files(paths: &[PathBuf], out: &Path) -> Result<(RunManifest, RunOutput), CliError> {
    let started = unix_now();
    let files = paths
        .iter()
        .map(|p| read_partial(p))
        .collect::<Result<Vec<_>, _>>()?;
    let merged = merge_partials(&files)?;
    let kind = match merged.partial {
        Partial::Dos(_) => Kind::Dos,
        Partial::R2(_) => Kind::R2,
        Partial::F2(_) => Kind::F2,
        Partial::G2(_) => Kind::G2,
        Partial::Spacing(_) => Kind::Spacing,
    };
    let (tables, summary) = merged.partial.render();
    let result = RunOutput {
        tables,
        partial: Some(merged.partial),
        summary,
        passed: None,
    };
    let manifest = write_outputs(
        out,
        kind,
        merged.config.clone(),
        merged.config,
        merged.config_hash,
        started,
        &result,
    )?;
    Ok((manifest, result))
}
