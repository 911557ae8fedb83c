use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use taubnut::cli::{parse_config, run, ConfigError, RunConfig, Task};

/// Exact and numerical verification tasks for the toric soliton family.
#[derive(Parser, Debug)]
#[command(name = "taubnut", version)]
struct Args {
    /// Key = value parameter file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the task named in the config.
    #[arg(long)]
    task: Option<Task>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.txt and CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance override, e.g. `--tolerance kahler=1e-8`; repeatable.
    #[arg(long = "tolerance", value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
}

fn load(args: &Args) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| ConfigError { line: None, message: format!("cannot read {}: {e}", args.config.display()) })?;
    let mut cfg = parse_config(&text)?;
    if let Some(t) = args.task {
        cfg.task = Some(t);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    for kv in &args.tolerances {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError { line: None, message: format!("--tolerance expects NAME=VALUE, got {kv:?}") })?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| ConfigError { line: None, message: format!("bad tolerance value {v:?}") })?;
        cfg.set_tolerance(k.trim(), v)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            if let Some(f) = outcome.failures.first() {
                eprintln!("assertion failed: {f}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
