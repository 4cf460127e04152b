//! `qeos calibrate`: scale an arbitrary-units trace to absolute field.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use qeos_core::thz::{calibrate_trace, FieldUnits, ThzError};

use crate::config::FileConfig;
use crate::csvio;
use crate::error::CliError;

/// Calibrate a raw trace (CSV `t_s,value`) against a known pulse energy
/// and focus geometry, reporting the absolute peak field as JSON.
#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Input trace CSV in arbitrary units.
    #[arg(long, short, value_name = "PATH")]
    input: PathBuf,

    /// JSON configuration file supplying beam and pulse-energy defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Pulse energy through the focus, J.
    #[arg(long, allow_hyphen_values = true)]
    pulse_energy_j: Option<f64>,

    /// Horizontal 1/e field radius of the focus, m.
    #[arg(long, allow_hyphen_values = true)]
    sigma_x_m: Option<f64>,

    /// Vertical 1/e field radius of the focus, m.
    #[arg(long, allow_hyphen_values = true)]
    sigma_y_m: Option<f64>,

    /// Also write the calibrated trace as CSV `t_s,field_v_per_m`.
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
}

pub fn run(args: &CalibrateArgs) -> Result<(), CliError> {
    let mut cfg = FileConfig::load(args.config.as_deref())?;
    if let Some(pulse_energy_j) = args.pulse_energy_j {
        cfg.pulse_energy_j = pulse_energy_j;
    }
    if let Some(sigma_x) = args.sigma_x_m {
        cfg.beam.sigma_x = sigma_x;
    }
    if let Some(sigma_y) = args.sigma_y_m {
        cfg.beam.sigma_y = sigma_y;
    }

    let raw = csvio::read_trace(&args.input, FieldUnits::Arbitrary)?;
    let (calibrated, summary) =
        calibrate_trace(&raw, cfg.pulse_energy_j, &cfg.beam).map_err(classify_thz_error)?;

    if let Some(path) = &args.output {
        csvio::write_waveform(path, &calibrated)?;
    }

    let report = json!({
        "input": args.input.display().to_string(),
        "pulse_energy_j": cfg.pulse_energy_j,
        "beam": cfg.beam,
        "samples": calibrated.len(),
        "dt_s": calibrated.dt(),
        "peak_field_v_per_m": summary.peak_field_v_per_m,
        "peak_field_v_per_cm": summary.peak_field_v_per_m / 100.0,
        "tau_eff_s": summary.tau_eff_s,
        "scale": summary.scale,
        "output": args.output.as_ref().map(|p| p.display().to_string()),
    });
    crate::report::emit_json(&report);
    Ok(())
}

/// Bad beam or energy parameters are configuration errors; a degenerate
/// trace is a data error.
fn classify_thz_error(err: ThzError) -> CliError {
    match err {
        ThzError::InvalidBeam(..) | ThzError::InvalidPulseEnergy(_) => CliError::config(err),
        _ => CliError::data(err),
    }
}
