//! Scenario runner: loads a TOML scenario, executes its command, writes the
//! CSV outputs and a summary record, and exits nonzero when an embedded
//! tolerance check fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use hj_junction::scenario::{run_scenario, Scenario};

#[derive(Parser)]
#[command(name = "hjj", about = "Effective junction conditions: scenario runner")]
struct Args {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,

    /// Output directory for CSV files and the summary record.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Seed for randomized audits (overrides the scenario field).
    #[arg(long)]
    seed: Option<u64>,

    /// Multiplies every embedded tolerance (overrides the scenario field).
    #[arg(long)]
    tolerance_scale: Option<f64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let scenario = match Scenario::from_path(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_scenario(&scenario, &args.out, args.seed, args.tolerance_scale) {
        Ok(report) => {
            println!(
                "{}: {} (max error {:e}, tolerance {:e})",
                report.command, report.status, report.max_error, report.tolerance
            );
            println!("{}", report.detail);
            for f in &report.files {
                println!("wrote {f}");
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
