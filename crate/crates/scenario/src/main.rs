use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hmflow_scenario::oracle::run_oracle;
use hmflow_scenario::run::run_path;
use hmflow_scenario::verify::{verify_suite, SUITES};

#[derive(Parser)]
#[command(name = "hmflow", version, about = "Harmonic map heat flow into CAT(0) targets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite: cat0, flow, regularity or all.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write reference values for an oracle case as CSV.
    Oracle {
        #[arg(long)]
        case: String,
        #[arg(long, num_args = 0..)]
        params: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn create(dir: &PathBuf) -> Result<(), ExitCode> {
    std::fs::create_dir_all(dir).map_err(|e| {
        eprintln!("error: cannot create {}: {e}", dir.display());
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => match run_path(&config, out.as_deref()) {
            Ok(outcome) => {
                for r in &outcome.reports {
                    println!("{} {:<40} min={:+.3e} max={:+.3e} tol={:.1e}", if r.pass { "PASS" } else { "FAIL" }, r.check, r.min, r.max, r.tolerance);
                }
                ExitCode::from(outcome.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Verify { suite, seed, out } => {
            let Some(summary) = verify_suite(&suite, seed) else {
                eprintln!("error: unknown suite `{suite}` (known: {})", SUITES.join(", "));
                return ExitCode::from(3);
            };
            if let Err(code) = create(&out) {
                return code;
            }
            let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
            json.push('\n');
            let path = out.join(format!("verify_{suite}.json"));
            if let Err(e) = std::fs::write(&path, json) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(1);
            }
            println!("{} reports, {} failed", summary.reports.len(), summary.failed.len());
            for f in &summary.failed {
                println!("FAIL {f}");
            }
            ExitCode::from(if summary.pass { 0 } else { 2 })
        }
        Command::Oracle { case, params, out } => match run_oracle(&case, &params) {
            Ok(table) => {
                if let Err(code) = create(&out) {
                    return code;
                }
                let path = out.join(format!("{case}.csv"));
                match table.write_csv(&path) {
                    Ok(()) => {
                        println!("{}", path.display());
                        ExitCode::SUCCESS
                    }
                    Err(e) => {
                        eprintln!("error: writing {}: {e}", path.display());
                        ExitCode::from(1)
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
    }
}
