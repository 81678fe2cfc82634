//! `previval` command line tool.
//!
//! Exit codes: 0 success, 1 internal or I/O error (and failed checks),
//! 2 malformed config, 3 zero-probability conditioning.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use previval::cli::{
    check_suite, parse_config, preset, run_to_file, validate_config, BAYES_THRESHOLD,
    ORACLE_THRESHOLD,
};
use previval::Error;

#[derive(Parser)]
#[command(name = "previval", version, about = "Predictive and retrodictive Jaynes-Cummings scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the CSV for a published-figure preset.
    Figure {
        /// One of: fig1, fig2a, fig2b, fig2c, fig3.
        preset: String,
        /// Output CSV path.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a scan described by a config file.
    Run {
        /// Config file path (flat `key = value` format).
        #[arg(short, long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(short, long)]
        output: PathBuf,
        /// Also run the Bayes-equivalence and oracle-deviation checks on
        /// the configured scenario.
        #[arg(long)]
        validate: bool,
    },
    /// Run the full Bayes + oracle consistency suite.
    Check,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => 2,
        Error::ZeroProbabilityOutcome { .. } => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Figure { preset: name, output } => {
            let config = preset(&name)?;
            run_to_file(&config, &output)?;
            Ok(true)
        }
        Command::Run { config, output, validate } => {
            let text = std::fs::read_to_string(&config)?;
            let config = parse_config(&text)?;
            run_to_file(&config, &output)?;
            if validate {
                let report = validate_config(&config)?;
                println!(
                    "bayes max deviation = {:.3e} (threshold {BAYES_THRESHOLD:.0e}): {}",
                    report.bayes_deviation,
                    if report.bayes_deviation < BAYES_THRESHOLD { "PASS" } else { "FAIL" }
                );
                println!(
                    "oracle max deviation = {:.3e} (threshold {ORACLE_THRESHOLD:.0e}): {}",
                    report.oracle_deviation,
                    if report.oracle_deviation < ORACLE_THRESHOLD { "PASS" } else { "FAIL" }
                );
                return Ok(report.passed());
            }
            Ok(true)
        }
        Command::Check => {
            let mut all_passed = true;
            for (label, report) in check_suite()? {
                let passed = report.passed();
                all_passed &= passed;
                println!(
                    "{label}: bayes = {:.3e}, oracle = {:.3e}: {}",
                    report.bayes_deviation,
                    report.oracle_deviation,
                    if passed { "PASS" } else { "FAIL" }
                );
            }
            Ok(all_passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
