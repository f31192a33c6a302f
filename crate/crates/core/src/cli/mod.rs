//! The `fracperc` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 conditioning failed
//! (extinction-dominated), 4 resource cap hit, 1 any other failure.

pub mod commands;
pub mod config;
pub mod pgm;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
pub use config::{parse_config, parse_direction, RunConfig, ValidatedConfig};

#[derive(Debug, Parser)]
#[command(name = "fracperc", version, about = "Fractal percolation sampler and analyser")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: number of processors).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample E_n and write it as a PGM raster.
    Sample,
    /// Project E_n and report the interval union.
    Project,
    /// Slice cell counts along one line.
    Slice,
    /// Slice box-dimension of the deterministic pattern.
    SliceDim,
    /// Projected-density eigenfunction and its residual.
    Eigen,
    /// Condition A or B certificate.
    Condition,
    /// Epsilon and p thresholds for an 8-cell carpet.
    Threshold,
    /// Direction scan with heuristic verdicts.
    Scan,
    /// Monte Carlo dimension, moment, conservation and visibility probes.
    Stats,
    /// Extinction probability.
    Extinction,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Project => "project",
            Command::Slice => "slice",
            Command::SliceDim => "slice-dim",
            Command::Eigen => "eigen",
            Command::Condition => "condition",
            Command::Threshold => "threshold",
            Command::Scan => "scan",
            Command::Stats => "stats",
            Command::Extinction => "extinction",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_)
        | Error::ProbabilityOutOfRange { .. }
        | Error::Parse(_)
        | Error::Domain(_)
        | Error::Precondition(_)
        | Error::OutOfModel(_)
        | Error::Mismatch(_)
        | Error::Structural(_) => 2,
        Error::ExtinctionDominated { .. } => 3,
        Error::LevelTooDeep(_) => 4,
        Error::BlowUp(_) | Error::EmptySum(_) => 1,
    }
}

fn load(path: Option<&Path>, seed: Option<u64>) -> crate::Result<(ValidatedConfig, PathBuf)> {
    let path = path.ok_or_else(|| Error::InvalidParams("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let mut raw: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(s) = seed {
        raw.params.seed = s;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((raw.validate()?, base))
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (cfg, base) = match load(cli.config.as_deref(), cli.seed) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("fracperc: {e}");
            return 2;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("fracperc: --jobs must be at least 1");
            return 2;
        }
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("fracperc: cannot start worker pool: {e}");
            return 1;
        }
    };
    let files = match pool.install(|| commands::execute(cli.command, &cfg, &base)) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("fracperc: {}: {e}", cli.command.name());
            return exit_code(&e);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("fracperc: cannot create {}: {e}", cli.out.display());
        return 1;
    }
    for f in files {
        let path = cli.out.join(&f.name);
        if let Err(e) = std::fs::write(&path, &f.bytes) {
            eprintln!("fracperc: cannot write {}: {e}", path.display());
            return 1;
        }
        println!("{}", path.display());
    }
    0
}
