use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tamperlab::cli::{self, ExperimentConfig, OutputFormat, OutputSpec};
use tamperlab::LabError;

#[derive(Parser)]
#[command(name = "tamperlab", version, about = "Run and replay tamper-resilience experiments")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite and print or store its report.
    Run {
        /// Suite name; overrides the config file.
        #[arg(long)]
        suite: Option<String>,
        /// JSON experiment config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Output file; `.csv` selects CSV, anything else JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a stored JSON report and compare every value.
    Replay {
        #[arg(long)]
        report: PathBuf,
    },
    /// List the available suites.
    Suites,
}

const EXIT_VIOLATED: u8 = 1;
const EXIT_INVALID: u8 = 2;

fn load_config(suite: Option<String>, config: Option<PathBuf>, seed: Option<u64>, trials: Option<usize>, out: Option<PathBuf>) -> Result<ExperimentConfig, LabError> {
    let mut cfg = match (&config, &suite) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).map_err(|e| LabError::InvalidConfig(format!("{}: {e}", p.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(s)) => ExperimentConfig::new(s),
        (None, None) => return Err(LabError::InvalidConfig("give --suite or --config".into())),
    };
    if let Some(s) = suite {
        cfg.suite = s;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if trials.is_some() {
        cfg.trials = trials;
    }
    if let Some(p) = out {
        let format = if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) { OutputFormat::Csv } else { OutputFormat::Json };
        cfg.output = Some(OutputSpec { path: p.display().to_string(), format });
    }
    cfg.check_basic()?;
    Ok(cfg)
}

fn fail(e: &LabError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INVALID)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match args.command {
        Command::Suites => {
            for s in cli::SUITES {
                println!("{s}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { suite, config, seed, trials, out } => {
            let cfg = match load_config(suite, config, seed, trials, out) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let report = match cli::run_suite(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            for c in &report.checks {
                eprintln!("{} {} = {:.6e} (bound {:.6e})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value, c.bound);
            }
            match &cfg.output {
                Some(o) => {
                    if let Err(e) = cli::write_report(&report, o) {
                        return fail(&e);
                    }
                }
                None => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VIOLATED)
            }
        }
        Command::Replay { report } => {
            let stored = match cli::read_report(&report) {
                Ok(r) => r,
                Err(e) => return fail(&e),
            };
            match cli::replay(&stored) {
                Err(e) => fail(&e),
                Ok(r) if r.matches() => {
                    println!("replay matches: {} values within {:e} (max difference {:e})", r.fresh.checks.len(), cli::REPLAY_TOLERANCE, r.max_difference);
                    ExitCode::SUCCESS
                }
                Ok(r) => {
                    for m in &r.mismatches {
                        eprintln!("mismatch: {m}");
                    }
                    ExitCode::from(EXIT_VIOLATED)
                }
            }
        }
    }
}
