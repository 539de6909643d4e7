use std::path::PathBuf;
use std::process::ExitCode;

use bbrm_cli::{merge_files, run, CliError, Kind, RunConfig, RunOutput};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bbrm",
    version,
    about = "Block band random matrix experiments and verification suites"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: $BBRM_OUT, else ./bbrm-out)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    samples: Option<u64>,
    /// Extra key=value overrides, applied after the config file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Density of states histogram
    Dos(Common),
    /// Pair-counting two-point function
    R2(Common),
    /// Resolvent two-point function, extrapolated in eps
    F2(Common),
    /// Ratio of characteristic polynomials at the boundary
    G2(Common),
    /// Nearest-neighbor spacing distribution
    Spacing(Common),
    /// Multi-start minimization of the saddle functionals
    SaddleScan(Common),
    /// Determinant checks at every saddle label
    SaddleVerify(Common),
    /// Berezin integration identities
    GrassmannVerify(Common),
    /// Group integral closed forms against quadrature
    HcizVerify(Common),
    /// Two-point function assembled from the saddle contributions
    Closure(Common),
    /// Merge partial.json files from runs with the same config hash
    Merge {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn build_config(kind: Kind, c: Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::parse(kind, &std::fs::read_to_string(p)?)?,
        None => RunConfig::new(kind),
    };
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = c.seed {
        cfg.ensemble.seed = s;
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    if let Some(o) = c.out {
        cfg.out = o;
    }
    if let Some(n) = c.samples {
        cfg.samples = n;
    }
    Ok(cfg)
}

fn report(out: &RunOutput, dir: &std::path::Path) {
    if out.passed.is_some() {
        for t in &out.tables {
            println!("{}\n", t.to_pretty());
        }
    }
    for (k, v) in &out.summary {
        if v.fract() == 0.0 && v.abs() < 1e15 {
            println!("{k} = {v}");
        } else {
            println!("{k} = {v:.6e}");
        }
    }
    match out.passed {
        Some(true) => println!("PASS"),
        Some(false) => println!("FAIL"),
        None => {}
    }
    println!("outputs in {}", dir.display());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = (|| -> Result<Option<bool>, CliError> {
        let (kind, common) = match cli.cmd {
            Cmd::Merge { files, out } => {
                let dir = out.unwrap_or_else(|| RunConfig::new(Kind::Dos).out);
                let (_, res) = merge_files(&files, &dir)?;
                report(&res, &dir);
                return Ok(res.passed);
            }
            Cmd::Dos(c) => (Kind::Dos, c),
            Cmd::R2(c) => (Kind::R2, c),
            Cmd::F2(c) => (Kind::F2, c),
            Cmd::G2(c) => (Kind::G2, c),
            Cmd::Spacing(c) => (Kind::Spacing, c),
            Cmd::SaddleScan(c) => (Kind::SaddleScan, c),
            Cmd::SaddleVerify(c) => (Kind::SaddleVerify, c),
            Cmd::GrassmannVerify(c) => (Kind::GrassmannVerify, c),
            Cmd::HcizVerify(c) => (Kind::HcizVerify, c),
            Cmd::Closure(c) => (Kind::Closure, c),
        };
        let cfg = build_config(kind, common)?;
        let (_, res) = run(&cfg)?;
        report(&res, &cfg.out);
        Ok(res.passed)
    })();
    match result {
        Ok(Some(false)) => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bbrm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
