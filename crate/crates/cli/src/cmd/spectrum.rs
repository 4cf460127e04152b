//! `qeos spectrum`: one-sided power spectrum of a trace.

use std::io;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use qeos_core::thz::{power_spectrum, FieldUnits};

use crate::csvio;
use crate::error::CliError;

/// Compute the power spectrum of a trace (CSV `t_s,value`) and write it as
/// CSV `frequency_hz,power` — to stdout, or to a file plus a JSON summary.
#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Input trace CSV.
    #[arg(long, short, value_name = "PATH")]
    input: PathBuf,

    /// Output CSV path; omitted, the rows go to stdout.
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

pub fn run(args: &SpectrumArgs) -> Result<(), CliError> {
    let trace = csvio::read_trace(&args.input, FieldUnits::Arbitrary)?;
    let spectrum = power_spectrum(&trace);
    match &args.output {
        Some(path) => {
            csvio::write_spectrum_path(path, &spectrum)?;
            let report = json!({
                "input": args.input.display().to_string(),
                "output": path.display().to_string(),
                "bins": spectrum.frequencies.len(),
                "bin_width_hz": spectrum.bin_width(),
                "peak_frequency_hz": spectrum.peak_frequency(),
            });
            crate::report::emit_json(&report);
        }
        None => csvio::write_spectrum(io::stdout().lock(), &spectrum, "stdout")?,
    }
    Ok(())
}
