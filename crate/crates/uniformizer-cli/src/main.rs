//! Batch front end: reads a JSON run configuration, dispatches one command and
//! writes report.json, data.csv and any SVG files into the output directory.

mod config;
mod output;
mod run;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;
use thiserror::Error;

use config::{Command, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "uniformizer", version, about = "Computations with Fuchsian uniformizations of Riemann surfaces")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration file; reads stdin when absent or "-".
    config: Option<PathBuf>,
    /// Output directory, overriding output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for Monte-Carlo quadrature; echoed in the report.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("computation failed: {0}")]
    Compute(#[from] uniformizer::Error),
    #[error("writing output failed: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 3,
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let text = match path {
        Some(p) if p != Path::new("-") => {
            std::fs::read_to_string(p).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::Invalid(format!("stdin: {e}")))?;
            s
        }
    };
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(e.to_string()))
}

fn configure_threads() -> Result<Option<usize>, CliError> {
    let Ok(v) = std::env::var("UNIFORMIZER_THREADS") else {
        return Ok(None);
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Invalid(format!("UNIFORMIZER_THREADS = {v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(Some(n))
}

fn execute(args: &Args) -> Result<PathBuf, CliError> {
    let threads = configure_threads()?;
    let mut cfg = read_config(args.config.as_deref())?;
    if let Some(out) = &args.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    cfg.validate(args.command).map_err(CliError::Invalid)?;
    cfg.command = Some(args.command);

    let start = Instant::now();
    let out = run::run(args.command, &cfg, args.seed)?;
    let seconds = start.elapsed().as_secs_f64();

    let dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&dir)?;
    out.table.write(&dir.join("data.csv"))?;
    let mut files = vec!["report.json".to_string(), "data.csv".to_string()];
    for (name, svg) in &out.svgs {
        std::fs::write(dir.join(name), svg)?;
        files.push(name.clone());
    }
    let report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": args.command.name(),
        "seed": args.seed,
        "threads": threads,
        "config": cfg,
        "results": out.results,
        "timing": { "seconds": seconds },
        "files": files,
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Invalid(e.to_string()))?;
    std::fs::write(dir.join("report.json"), text + "\n")?;
    Ok(dir)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(dir) => {
            println!("{}", dir.join("report.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("uniformizer: {e}");
            ExitCode::from(e.code())
        }
    }
}
