//! Command-line entry point: config-driven experiment runner.
//!
//! Exit codes: 0 success, 2 validation/config error, 3 numerical failure,
//! 4 invariant violation.

use clap::{Parser, Subcommand};
use hyplab::config::RunConfig;
use hyplab::runner::{catalog_text, execute, RunError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Default output root when neither --out nor the config supplies one.
const OUT_ENV: &str = "HYPLAB_OUT";

#[derive(Parser)]
#[command(name = "hyplab", version, about = "numerical laboratory for singular hyperbolic Cauchy problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment described by a JSON config
    Run {
        /// path to the experiment config (JSON)
        config: PathBuf,
        /// output directory (overrides config and environment)
        #[arg(long)]
        out: Option<PathBuf>,
        /// worker threads (0 = automatic); recorded in the manifest
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Parse and validate a config without running it
    Validate {
        /// path to the experiment config (JSON)
        config: PathBuf,
    },
    /// List built-in profiles, coefficient models, and experiment kinds
    Catalog,
}

fn load_config(path: &PathBuf) -> Result<(RunConfig, String), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((cfg, text))
}

fn resolve_out_dir(cfg: &RunConfig, cli_out: &Option<PathBuf>, config_hash8: &str) -> PathBuf {
    if let Some(dir) = cli_out {
        return dir.clone();
    }
    if let Some(dir) = &cfg.out_dir {
        return dir.clone();
    }
    let root = std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("hyplab-out"));
    root.join(format!("{}-{config_hash8}", cfg.experiment.kind()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalog => {
            print!("{}", catalog_text());
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load_config(&config) {
            Err(msg) => {
                eprintln!(
                    "{}",
                    serde_json::json!({"error": "validation", "exit_code": 2, "message": msg})
                );
                ExitCode::from(2)
            }
            Ok((cfg, _)) => match cfg.validate() {
                Ok(()) => {
                    println!(
                        "{}",
                        serde_json::json!({"valid": true, "experiment": cfg.experiment.kind()})
                    );
                    ExitCode::SUCCESS
                }
                Err(errs) => {
                    eprintln!(
                        "{}",
                        serde_json::json!({"error": "validation", "exit_code": 2,
                            "message": errs})
                    );
                    ExitCode::from(2)
                }
            },
        },
        Command::Run { config, out, threads } => {
            let (mut cfg, text) = match load_config(&config) {
                Ok(v) => v,
                Err(msg) => {
                    eprintln!(
                        "{}",
                        serde_json::json!({"error": "validation", "exit_code": 2,
                            "message": msg})
                    );
                    return ExitCode::from(2);
                }
            };
            if threads != 0 {
                cfg.threads = threads;
            }
            // hash prefix for the default directory name: same digest that
            // lands in the manifest
            let hash8 = {
                use sha2::{Digest, Sha256};
                let mut h = Sha256::new();
                h.update(text.as_bytes());
                format!("{:x}", h.finalize())[..8].to_string()
            };
            let out_dir = resolve_out_dir(&cfg, &out, &hash8);
            match execute(&cfg, &text, &out_dir) {
                Ok(manifest) => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "ok": true,
                            "experiment": manifest.experiment,
                            "out_dir": out_dir,
                            "wall_ms": manifest.wall_ms,
                            "verdicts": manifest.verdicts,
                        })
                    );
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    eprintln!("{}", err.to_json());
                    let code = RunError::exit_code(&err);
                    ExitCode::from(code as u8)
                }
            }
        }
    }
}
