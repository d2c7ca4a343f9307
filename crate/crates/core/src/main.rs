use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use layerflow::driver::{run_scenario, OutputPlan};
use layerflow::verification::run_all;
use layerflow::{parse_config, Error, Scenario};

/// Layer-averaged free-surface flow simulator.
#[derive(Parser)]
#[command(name = "layerflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write snapshots and the energy series.
    Run {
        config: PathBuf,
        /// Output directory (overrides output.directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Snapshot interval in seconds (overrides output.snapshot_every).
        #[arg(long, value_name = "SECONDS")]
        snapshot_every: Option<f64>,
    },
    /// Parse and validate a scenario without running it.
    Check { config: PathBuf },
    /// Run the built-in acceptance suite.
    Verify,
}

fn load(path: &PathBuf) -> Result<Scenario, Error> {
    let text = fs::read_to_string(path)?;
    let scenario = parse_config(&text)?;
    scenario.initial_state()?;
    scenario.solver()?;
    Ok(scenario)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match cli.command {
        Command::Check { config } => match load(&config) {
            Ok(s) => {
                println!(
                    "ok: {} cells, {} layers, t_end {}",
                    s.n_cells, s.n_layers, s.controls.t_end
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run {
            config,
            out,
            snapshot_every,
        } => {
            let scenario = match load(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let mut plan = OutputPlan::from_scenario(&scenario);
            if let Some(dir) = out {
                plan.directory = dir;
            }
            if let Some(every) = snapshot_every {
                if !(every.is_finite() && every > 0.0) {
                    eprintln!("error: --snapshot-every must be positive, got {every}");
                    return ExitCode::from(1);
                }
                plan.snapshot_every = Some(every);
            }
            match run_scenario(&scenario, &plan, std::io::stderr()) {
                Ok(summary) => {
                    println!(
                        "done: {} steps, t = {}, mass drift {:.3e}, min H {:.6e}, energy drift {:.3e}",
                        summary.steps, summary.final_time, summary.mass_drift, summary.min_depth, summary.energy_drift
                    );
                    ExitCode::SUCCESS
                }
                Err(e @ (Error::SolverAbort { .. } | Error::NonFiniteTrace { .. })) => {
                    eprintln!("solver abort: {e}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Verify => {
            let reports = run_all();
            for r in &reports {
                println!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!("{} of {} criteria passed", reports.len() - failed, reports.len());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
