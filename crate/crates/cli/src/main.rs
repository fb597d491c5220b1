mod config;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::json;

use config::{Experiment, ExperimentConfig, Format, Overrides};

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "BOXSD_THREADS";

/// Sphere-decoding experiments: analytic complexity and Monte Carlo runs.
#[derive(Parser, Debug)]
#[command(name = "boxsd", version)]
struct Cli {
    experiment: Experiment,
    /// TOML config, or a JSON sidecar from an earlier run.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Table path; the sidecar goes next to it as `<stem>.meta.json`.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let overrides = Overrides {
        seed: cli.seed,
        trials: cli.trials,
        out: cli.out,
        format: cli.format,
    };
    let cfg = ExperimentConfig::load(&cli.config)?.resolve(cli.experiment, &overrides)?;
    let start = Instant::now();
    let table = experiments::run(&cfg)?;
    let wall = start.elapsed().as_secs_f64();

    let out = PathBuf::from(cfg.out_path());
    let meta = output::sidecar_path(&out);
    let sidecar = json!({
        "tool": "boxsd",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment().name(),
        "seed": cfg.seed,
        "wall_time_s": wall,
        "table": file_name(&out),
        "columns": table.columns,
        "rows": table.rows.len(),
        "config": cfg,
    });
    let mut meta_bytes = serde_json::to_vec_pretty(&sidecar)?;
    meta_bytes.push(b'\n');
    output::write_all_atomic(&[
        (out.clone(), table.encode(cfg.output.format)?),
        (meta.clone(), meta_bytes),
    ])?;
    eprintln!(
        "boxsd: wrote {} ({} rows) and {} in {wall:.2} s",
        out.display(),
        table.rows.len(),
        meta.display()
    );
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("boxsd: error: {msg}");
            ExitCode::from(1)
        }
    }
}
