use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use bern::cli::{output_dir, run, write_bundle, Command, RunOptions};

/// Bernstein-type derivative bounds for rational functions on curves and arcs.
#[derive(Parser)]
#[command(name = "bern", version)]
struct Args {
    command: Command,
    /// JSON run-spec.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Conformal-map cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("spec error at `config`: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let threads = std::env::var("BERN_THREADS").ok().and_then(|v| v.parse().ok()).filter(|&n: &usize| n > 0);
    let opts = RunOptions { cache: args.cache, threads };
    let result = run(args.command, &text, &opts).and_then(|b| write_bundle(&b, &output_dir(&text, args.out)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
