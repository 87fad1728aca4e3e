mod config;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use config::Validated;
use output::Staging;

const VALIDATION: u8 = 1;
const RUNTIME: u8 = 2;

#[derive(Parser)]
#[command(
    name = "clusterlab",
    version,
    about = "Cluster and pattern statistics on lattice random fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment a configuration describes.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Master seed; overrides the configuration.
        #[arg(long, allow_negative_numbers = true)]
        seed: Option<i64>,
        /// Output directory; overrides the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads, 0 for one per core.
        #[arg(long, allow_negative_numbers = true)]
        workers: Option<i64>,
    },
    /// Check a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn report_diagnostics(path: &Path, diags: &[String]) {
    eprintln!("{}: {} problem(s)", path.display(), diags.len());
    for d in diags {
        eprintln!("  {d}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(VALIDATION),
            };
        }
    };
    match cli.command {
        Command::Validate { config } => match config::validate(&config) {
            Ok(v) => {
                println!("{}: ok (kind = {:?})", config.display(), v.raw.kind);
                ExitCode::SUCCESS
            }
            Err(d) => {
                report_diagnostics(&config, &d);
                ExitCode::from(VALIDATION)
            }
        },
        Command::Run {
            config,
            seed,
            out,
            workers,
        } => {
            let mut diags = Vec::new();
            if let Some(s) = seed {
                if s < 0 {
                    diags.push(format!("--seed: must be non-negative, got {s}"));
                }
            }
            if let Some(w) = workers {
                if w < 0 {
                    diags.push(format!("--workers: must be non-negative, got {w}"));
                }
            }
            let mut v = match config::validate(&config) {
                Ok(v) if diags.is_empty() => v,
                Ok(_) => {
                    report_diagnostics(&config, &diags);
                    return ExitCode::from(VALIDATION);
                }
                Err(mut d) => {
                    d.extend(diags);
                    report_diagnostics(&config, &d);
                    return ExitCode::from(VALIDATION);
                }
            };
            if let Some(s) = seed {
                v.seed = s as u64;
            }
            let base = config.parent().unwrap_or(Path::new("."));
            let out = out
                .or_else(|| v.raw.out.as_ref().map(|o| base.join(o)))
                .unwrap_or_else(|| PathBuf::from("out"));
            let workers = workers.or(v.raw.workers).unwrap_or(0) as usize;
            execute(&v, &out, workers)
        }
    }
}

fn execute(v: &Validated, out: &Path, workers: usize) -> ExitCode {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(RUNTIME);
        }
    };
    let mut staging = match Staging::new(out) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot stage output next to {}: {e}", out.display());
            return ExitCode::from(RUNTIME);
        }
    };
    let start = Instant::now();
    let outcome = match pool.install(|| run::run(v, &mut staging)) {
        Ok(o) => o,
        Err(e) => {
            // Dropping the staging directory discards partial outputs.
            eprintln!("error: {e}");
            return ExitCode::from(RUNTIME);
        }
    };
    let mut outputs = staging.files().to_vec();
    outputs.push("manifest.json".into());
    let inputs: Vec<_> = v
        .inputs
        .iter()
        .map(|p| {
            json!({
                "path": p.display().to_string(),
                "bytes": std::fs::metadata(p).map(|m| m.len()).ok(),
            })
        })
        .collect();
    let manifest = json!({
        "program": "clusterlab",
        "version": env!("CARGO_PKG_VERSION"),
        "kind": v.raw.kind,
        "config": v.path.display().to_string(),
        "config_text": v.text,
        "inputs": inputs,
        "master_seed": v.seed,
        "seeds": outcome.seeds,
        "workers": workers,
        "wall_seconds": start.elapsed().as_secs_f64(),
        "outputs": outputs,
        "summary": outcome.summary,
        "check_failed": outcome.check_failed,
    });
    let committed = staging
        .write_json("manifest.json", &manifest)
        .and_then(|()| staging.commit());
    if let Err(e) = committed {
        eprintln!("error: writing {}: {e}", out.display());
        return ExitCode::from(RUNTIME);
    }
    match outcome.check_failed {
        Some(msg) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(RUNTIME)
        }
        None => {
            println!("wrote {} file(s) to {}", outputs.len(), out.display());
            ExitCode::SUCCESS
        }
    }
}
