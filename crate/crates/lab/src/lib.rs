//! File-level front end for `dirac-backaction-core`: JSON run configs,
//! parallel sweeps, CSV tables and JSON sidecars.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

use std::path::{Path, PathBuf};

pub use commands::{execute, Context};
pub use config::RunConfig;
pub use error::LabError;
use output::RunInfo;

/// Directory used when neither `--out` nor `output_path` is given.
pub const DEFAULT_OUTPUT_DIR: &str = "out";

/// One invocation of the runner.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub result: Result<Vec<PathBuf>, LabError>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match &self.result {
            Ok(_) => 0,
            Err(e) => e.exit_code(),
        }
    }
}

/// Reads, validates and executes a config file.
pub fn run_file(path: &Path, inv: &Invocation) -> Outcome {
    match std::fs::read_to_string(path) {
        Ok(text) => run_text(&text, inv),
        Err(e) => Outcome {
            out_dir: inv.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            result: Err(LabError::Config(format!("cannot read {}: {e}", path.display()))),
        },
    }
}

/// Executes a config document. Every failure after the output directory is
/// known leaves a diagnostic in `run.meta.json`.
pub fn run_text(text: &str, inv: &Invocation) -> Outcome {
    let parsed = config::parse(text);
    let out_dir = inv
        .out
        .clone()
        .or_else(|| parsed.as_ref().ok().and_then(|(c, _)| c.common().output_path.map(PathBuf::from)))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let (cfg, raw) = match parsed {
        Ok(p) => p,
        Err(e) => {
            let _ = output::write_failure(&out_dir, None, &e);
            return Outcome { out_dir, result: Err(e) };
        }
    };
    let common = cfg.common();
    let ctx = Context::new(inv.workers.or(common.workers).unwrap_or_else(sweep::default_workers), common.max_jobs);
    let info = RunInfo { command: cfg.name(), config: raw, seed: inv.seed };
    let result = execute(&cfg, &ctx).and_then(|a| output::write_all(&out_dir, &a, &info));
    if let Err(e) = &result {
        let _ = output::write_failure(&out_dir, Some(&info), e);
    }
    Outcome { out_dir, result }
}
