use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dirac_backaction_lab::{run_file, Invocation};

/// Dirac-oscillator measurement-backaction simulations.
#[derive(Debug, Parser)]
#[command(name = "dirac-lab", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_path` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Reserved. Every computation is deterministic; the value is only echoed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = run_file(&cli.config, &Invocation { out: cli.out, workers: cli.workers, seed: cli.seed });
    match &outcome.result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
        }
        Err(e) => eprintln!("dirac-lab: {e} (see {})", outcome.out_dir.join("run.meta.json").display()),
    }
    ExitCode::from(outcome.exit_code() as u8)
}
