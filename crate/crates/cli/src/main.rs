use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polarsim_cli::pipeline::{self, CheckOutcome};
use polarsim_cli::{load_scenario, run_scenario, sweep, CliError};

/// Opinion dynamics simulator.
#[derive(Debug, Parser)]
#[command(name = "polarsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write CSV, JSON and SVG artifacts.
    Simulate {
        scenario: PathBuf,
        #[arg(short, long, default_value = "out")]
        output: PathBuf,
    },
    /// Run a scenario and verify every applicable convergence property.
    Check { scenario: PathBuf },
    /// Run a scenario and print its analysis as JSON.
    Analyze { scenario: PathBuf },
    /// Run a scenario over a grid of graph constants and step budgets.
    Sweep {
        scenario: PathBuf,
        /// Clique or circular constants, comma separated.
        #[arg(short, long, value_delimiter = ',')]
        c: Vec<f64>,
        /// Step budgets, comma separated.
        #[arg(short, long, value_delimiter = ',')]
        steps: Vec<usize>,
        #[arg(short, long, default_value = "sweep")]
        output: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io = |source| CliError::Io { path: PathBuf::from("<stdout>"), source };
    match cli.command {
        Command::Simulate { scenario, output } => {
            let manifest = run_scenario(&load_scenario(&scenario)?, &output)?;
            for file in manifest.files {
                writeln!(out, "{}", file.display()).map_err(io)?;
            }
        }
        Command::Check { scenario } => {
            let s = load_scenario(&scenario)?;
            let outcome = pipeline::simulate(&s)?;
            let mut failed = 0;
            for result in pipeline::check(&s, &outcome)? {
                match result {
                    CheckOutcome::Ran(r) if r.passed => writeln!(out, "[PASS] {}", r.name),
                    CheckOutcome::Ran(r) => {
                        failed += 1;
                        let v = r.first_violation.expect("failed checks carry a violation");
                        writeln!(
                            out,
                            "[FAIL] {}: t={} agent={} lhs={} rhs={} slack={}",
                            r.name, v.t, v.agent, v.lhs, v.rhs, v.slack
                        )
                    }
                    CheckOutcome::Skipped { name, reason } => writeln!(out, "[SKIP] {name}: {reason}"),
                }
                .map_err(io)?;
            }
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
        Command::Analyze { scenario } => {
            let s = load_scenario(&scenario)?;
            let analysis = pipeline::analyze(&s, &pipeline::simulate(&s)?)?;
            out.write_all(pipeline::analysis_json(&analysis).as_bytes()).map_err(io)?;
        }
        Command::Sweep { scenario, c, steps, output } => {
            let rows = sweep::sweep(&load_scenario(&scenario)?, &c, &steps, &output)?;
            writeln!(out, "{} runs, summary in {}", rows.len(), output.join("summary.csv").display())
                .map_err(io)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
