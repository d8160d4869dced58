use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qtt_cli::check::run_checks;
use qtt_cli::{list_scenarios, resolve, run, write_outputs, Overrides};
use qtt_core::ModelTemplate;

#[derive(Debug, Parser)]
#[command(name = "qtt", version, about = "Three-qubit quantum thermal transistor sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a canned scenario and write <scenario>.csv plus its manifest.
    Run {
        scenario: String,
        /// TOML file overriding scenario defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed for random initial states.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the scenario catalog as TOML.
    List,
    /// Run the invariant suite on the default model.
    Check,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            print!("{}", list_scenarios());
            ExitCode::SUCCESS
        }
        Command::Check => {
            let outcomes = run_checks(&ModelTemplate::default());
            for o in &outcomes {
                let tag = if o.passed { "PASS" } else { "FAIL" };
                println!("{tag} {}: {}", o.name, o.detail);
            }
            if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Run {
            scenario,
            config,
            seed,
            out,
            jobs,
        } => {
            let overrides = Overrides {
                config,
                seed,
                out,
                jobs,
            };
            let cfg = match resolve(&scenario, &overrides) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let result = match run(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            match write_outputs(&cfg, &result, &cfg.out_dir) {
                Ok(files) => {
                    println!(
                        "{} rows -> {} ({} failed points; manifest {})",
                        result.records.len(),
                        files.csv.display(),
                        result.failures.len(),
                        files.manifest.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
