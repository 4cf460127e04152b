//! `qeos scan`: drive a full delay scan and write its tables.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use qeos_core::scan::{run_scan, ScanConfig, ScanError, WaveformSource};
use qeos_core::thz::{field_from_phase, power_spectrum, FieldUnits, Spectrum, ThzWaveform};

use crate::args::{AcquisitionArgs, ProbeArgs};
use crate::config::FileConfig;
use crate::csvio;
use crate::error::CliError;

/// Run the configured delay scan — at every delay, simulate an acquisition
/// at the waveform-injected phase and demodulate it — then write the phase
/// trace, the reconstructed field, and its power spectrum as CSV, plus a
/// summary JSON on stdout.
#[derive(Debug, Args)]
pub struct ScanArgs {
    /// JSON configuration file; omitted fields keep the reference defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(flatten)]
    probe: ProbeArgs,

    #[command(flatten)]
    acquisition: AcquisitionArgs,

    /// First delay, s.
    #[arg(long, allow_hyphen_values = true)]
    delay_start_s: Option<f64>,

    /// Last delay, s.
    #[arg(long, allow_hyphen_values = true)]
    delay_stop_s: Option<f64>,

    /// Delay increment, s.
    #[arg(long, allow_hyphen_values = true)]
    delay_step_s: Option<f64>,

    /// Peak frequency of the synthetic single-cycle waveform, Hz.
    #[arg(long, allow_hyphen_values = true)]
    f_peak_hz: Option<f64>,

    /// Peak phase excursion of the synthetic waveform, rad; sets its
    /// amplitude through the crystal's phase-per-field factor.
    #[arg(long, allow_hyphen_values = true)]
    peak_phase: Option<f64>,

    /// Scan a stored trace (CSV `t_s,field_v_per_m`) instead of the
    /// synthetic waveform.
    #[arg(long, value_name = "PATH")]
    trace_csv: Option<PathBuf>,

    /// Directory receiving trace.csv, field.csv, and spectrum.csv.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

pub fn run(args: &ScanArgs) -> Result<(), CliError> {
    let mut cfg = FileConfig::load(args.config.as_deref())?;
    args.probe.apply(&mut cfg.probe);
    args.acquisition.apply(&mut cfg.acquisition);
    if let Some(start_s) = args.delay_start_s {
        cfg.delays.start_s = start_s;
    }
    if let Some(stop_s) = args.delay_stop_s {
        cfg.delays.stop_s = stop_s;
    }
    if let Some(step_s) = args.delay_step_s {
        cfg.delays.step_s = step_s;
    }
    apply_source_overrides(args, &mut cfg)?;

    let scan_config = ScanConfig {
        acquisition: cfg.acquisition,
        probe: cfg.probe,
        crystal: cfg.crystal,
        delays: cfg.delays,
        source: cfg.source,
    };
    let result = run_scan(&scan_config).map_err(classify_scan_error)?;

    let out_dir = args
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    std::fs::create_dir_all(&out_dir)
        .map_err(|err| CliError::data(format!("cannot create {}: {err}", out_dir.display())))?;
    let trace_path = out_dir.join("trace.csv");
    let field_path = out_dir.join("field.csv");
    let spectrum_path = out_dir.join("spectrum.csv");

    let trace = result.trace().map_err(CliError::numerical)?;
    csvio::write_trace_rows(&trace_path, &trace)?;
    let field = result.reconstructed_field(&scan_config.crystal);
    csvio::write_field(&field_path, &field)?;

    // A spectrum needs a waveform-sized grid; scans too short for one
    // still produce the trace and field tables.
    let spectrum = field_spectrum(&field, &scan_config);
    if let Some(spectrum) = &spectrum {
        csvio::write_spectrum_path(&spectrum_path, spectrum)?;
    }

    let report = json!({
        "seed": scan_config.acquisition.rng_seed,
        "alpha": result.alpha,
        "points": result.points.len(),
        "config": scan_config,
        "outputs": {
            "trace_csv": trace_path.display().to_string(),
            "field_csv": field_path.display().to_string(),
            "spectrum_csv": spectrum
                .as_ref()
                .map(|_| spectrum_path.display().to_string()),
        },
        "spectrum": spectrum.as_ref().map(|s| json!({
            "peak_frequency_hz": s.peak_frequency(),
            "bin_width_hz": s.bin_width(),
        })),
    });
    crate::report::emit_json(&report);
    Ok(())
}

fn apply_source_overrides(args: &ScanArgs, cfg: &mut FileConfig) -> Result<(), CliError> {
    if let Some(path) = &args.trace_csv {
        if args.f_peak_hz.is_some() || args.peak_phase.is_some() {
            return Err(CliError::config(
                "--trace-csv replaces the synthetic waveform; --f-peak-hz and \
                 --peak-phase do not apply to a stored trace",
            ));
        }
        cfg.source = WaveformSource::Trace {
            waveform: csvio::read_trace(path, FieldUnits::VoltsPerMeter)?,
        };
        return Ok(());
    }
    if args.f_peak_hz.is_none() && args.peak_phase.is_none() {
        return Ok(());
    }
    let WaveformSource::SingleCycle {
        f_peak_hz,
        peak_field_v_per_m,
    } = &mut cfg.source
    else {
        return Err(CliError::config(
            "--f-peak-hz/--peak-phase shape the synthetic waveform, but the config \
             names a stored trace",
        ));
    };
    if let Some(f) = args.f_peak_hz {
        *f_peak_hz = f;
    }
    if let Some(phase) = args.peak_phase {
        *peak_field_v_per_m = field_from_phase(phase, &cfg.crystal);
    }
    Ok(())
}

/// Validation failures are configuration errors; a failure at a delay
/// point is a numerical one (its message names the failing delay).
fn classify_scan_error(err: ScanError) -> CliError {
    match err {
        ScanError::Simulation { .. } | ScanError::Demodulation { .. } => CliError::numerical(err),
        _ => CliError::config(err),
    }
}

fn field_spectrum(field: &[(f64, f64)], config: &ScanConfig) -> Option<Spectrum> {
    let samples: Vec<f64> = field.iter().map(|&(_, e)| e).collect();
    ThzWaveform::new(
        samples,
        config.delays.step_s,
        config.delays.start_s,
        FieldUnits::VoltsPerMeter,
    )
    .ok()
    .map(|waveform| power_spectrum(&waveform))
}
