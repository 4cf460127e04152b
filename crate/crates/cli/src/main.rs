//! `qeos`: command-line front-end for the electro-optic sampling toolkit.
//!
//! Six subcommands cover the simulated measurement chain end to end:
//! `stats` enumerates per-pulse probe statistics, `simulate` writes
//! time-tag streams, `analyze` demodulates them into phase estimates,
//! `scan` drives a full delay scan, and `calibrate`/`spectrum`
//! post-process field traces.
//!
//! Every run is deterministic given its configuration and seed, and JSON
//! reports carry both. Exit codes: 0 success, 2 configuration error,
//! 3 data/parse error, 4 numerical failure.

mod args;
mod cmd;
mod config;
mod csvio;
mod error;
mod report;

use clap::{Parser, Subcommand};

/// Simulated electro-optic sampling of terahertz fields with quantum
/// probes: time-tag generation, lock-in demodulation, and field-trace
/// utilities.
#[derive(Debug, Parser)]
#[command(name = "qeos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// The pipeline stages exposed on the command line.
#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate per-pulse click statistics of the configured probe.
    Stats(cmd::stats::StatsArgs),
    /// Simulate an acquisition and write a .qttg time-tag stream.
    Simulate(cmd::simulate::SimulateArgs),
    /// Demodulate a .qttg stream into a phase estimate.
    Analyze(cmd::analyze::AnalyzeArgs),
    /// Scan the waveform in delay; write trace, field, and spectrum CSVs.
    Scan(cmd::scan::ScanArgs),
    /// Scale an arbitrary-units trace to absolute field.
    Calibrate(cmd::calibrate::CalibrateArgs),
    /// Power spectrum of a trace CSV.
    Spectrum(cmd::spectrum::SpectrumArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Stats(args) => cmd::stats::run(args),
        Command::Simulate(args) => cmd::simulate::run(args),
        Command::Analyze(args) => cmd::analyze::run(args),
        Command::Scan(args) => cmd::scan::run(args),
        Command::Calibrate(args) => cmd::calibrate::run(args),
        Command::Spectrum(args) => cmd::spectrum::run(args),
    };
    if let Err(error) = result {
        eprintln!("{}", error.to_json());
        std::process::exit(error.exit_code());
    }
}
