use clap::{Parser, Subcommand};
use qrf_cli::runner::{resolve_out_dir, run_parsed, run_scenario, RunError, RunOutcome};
use qrf_cli::scenario::validate_file;
use std::path::PathBuf;
use std::process::ExitCode;

/// Relational Gaussian states: scenario runner and validator.
#[derive(Parser)]
#[command(name = "qrf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write report.json, series.csv and plotdata/.
    Run {
        /// Scenario JSON file (schema qrf-scenario/v1).
        scenario: PathBuf,
        /// Output directory (default: scenario `output`, then
        /// $QRF_OUT_DIR/<name>, then ./qrf-out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed of a `random` initial state.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Validate a scenario file and list every schema violation.
    Validate {
        scenario: PathBuf,
    },
    /// Run one of the built-in demo scenarios.
    Demo {
        /// Demo name; omit to list the available ones.
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_PARSE: u8 = 101;
const EXIT_ACTION: u8 = 102;

fn print_outcome(outcome: &RunOutcome) {
    for check in &outcome.checks {
        let margin = check
            .margin
            .map(|m| format!(" (margin {m:+.3e})"))
            .unwrap_or_default();
        println!("[{}] {}{}", check.status, check.name, margin);
    }
    println!(
        "{} checks, {} failed; artifacts in {}",
        outcome.checks.len(),
        outcome
            .checks
            .iter()
            .filter(|c| c.status == qrf_cli::runner::CheckStatus::Fail)
            .count(),
        outcome.out_dir.display()
    );
    if let Some(name) = &outcome.first_failure {
        eprintln!("first failing check: {name}");
    }
}

fn finish(result: Result<RunOutcome, RunError>) -> ExitCode {
    match result {
        Ok(outcome) => {
            print_outcome(&outcome);
            ExitCode::from(outcome.exit_code.clamp(0, 99) as u8)
        }
        Err(e @ RunError::Parse { .. }) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_PARSE)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_ACTION)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out, seed } => {
            finish(run_scenario(&scenario, out.as_deref(), seed))
        }
        Command::Validate { scenario } => {
            let diagnostics = validate_file(&scenario);
            if diagnostics.is_empty() {
                println!("{}: OK", scenario.display());
                ExitCode::SUCCESS
            } else {
                for d in &diagnostics {
                    println!("{d}");
                }
                eprintln!("{} violation(s)", diagnostics.len());
                ExitCode::FAILURE
            }
        }
        Command::Demo { name, out } => {
            let Some(name) = name else {
                println!("available demos:");
                for d in qrf_cli::demos::DEMO_NAMES {
                    println!("  {d}");
                }
                return ExitCode::SUCCESS;
            };
            let Some(source) = qrf_cli::demos::demo_source(&name) else {
                eprintln!(
                    "unknown demo `{name}`; available: {}",
                    qrf_cli::demos::DEMO_NAMES.join(", ")
                );
                return ExitCode::from(EXIT_PARSE);
            };
            let value: serde_json::Value =
                serde_json::from_str(&source).expect("built-in demos are valid JSON");
            let scenario = qrf_cli::scenario::parse_scenario(&value, &name)
                .expect("built-in demos validate");
            let out_dir = resolve_out_dir(&scenario, out.as_deref());
            if let Err(e) = std::fs::create_dir_all(&out_dir) {
                eprintln!("cannot create {}: {e}", out_dir.display());
                return ExitCode::from(EXIT_ACTION);
            }
            if let Err(e) = std::fs::write(out_dir.join("scenario.json"), &source) {
                eprintln!("cannot write demo scenario: {e}");
                return ExitCode::from(EXIT_ACTION);
            }
            finish(run_parsed(&scenario, &out_dir, None))
        }
    }
}
