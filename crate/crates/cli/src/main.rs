//! `polaron-lab <task> --config <path> [--output <dir>] [--seed <int>]`
//!
//! Writes `<task>.json` and `<task>-<table>.csv` into the output directory.
//! On failure nothing is written, a JSON line with the error category goes to
//! stderr and the exit code identifies the category.

mod config;
mod error;
mod output;
mod tasks;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use clap::Parser;
use serde_json::json;

use config::{parse_config, RunConfig, DEFAULT_OUTPUT_DIR, DEFAULT_SEED};
use error::CliError;
use output::Staging;

pub const THREADS_ENV: &str = "POLARON_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "polaron-lab", version, about = "Batch runs of the polaron toolkit")]
struct Args {
    /// One of pekar-free, pekar-ball, hessian-ball, hessian-free,
    /// fock-confined, fiber, dispersion, bounds, report.
    task: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(THREADS_ENV, format!("must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(THREADS_ENV, e.to_string()))
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

fn execute(args: &Args) -> Result<PathBuf, CliError> {
    let mut cfg = load(&args.config)?;
    let task = cfg.resolve_task(Some(&args.task))?;
    configure_threads()?;
    let seed = args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let out_dir = args
        .output
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    cfg.task = Some(task.name().to_string());
    cfg.seed = Some(seed);
    cfg.output_dir = Some(out_dir.clone());

    let started_at = now();
    let result = tasks::run(task, &cfg, seed)?;

    let mut staging = Staging::new(&out_dir)?;
    let mut artifacts = Vec::new();
    for t in &result.tables {
        artifacts.push(staging.write_table(task.name(), t)?);
    }
    let record = json!({
        "toolkit": {"name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION")},
        "task": task,
        "status": "ok",
        "seed": seed,
        "threads": rayon::current_num_threads(),
        "started_at": started_at,
        "finished_at": now(),
        "config": cfg,
        "conventions": {
            "cutoff_convention": cfg.fock.cutoff_convention,
            "units": cfg.fock.units,
            "field_coupling": cfg.ball.coupling,
            "phonon_coupling": "c_j = g e_j^(-1/2)",
        },
        "results": result.results,
        "diagnostics": result.diagnostics,
        "warnings": result.warnings,
        "artifacts": artifacts,
    });
    let name = format!("{}.json", task.name());
    staging.write_json(&name, &record)?;
    staging.commit()?;
    Ok(out_dir.join(name))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut msg = json!({"status": "error", "category": e.category(), "message": e.to_string()});
            if let Some((line, column)) = e.position() {
                msg["line"] = json!(line);
                msg["column"] = json!(column);
            }
            eprintln!("{msg}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
