//! `qeos simulate`: generate one acquisition and write its time-tag stream.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use qeos_core::tags::{encode_stream, simulate_stream, Channel, StreamHeader};
use qeos_core::thz::phase_from_field;

use crate::args::{AcquisitionArgs, ProbeArgs};
use crate::config::FileConfig;
use crate::error::CliError;

/// Simulate a lock-in acquisition, write it as a `.qttg` stream, and print
/// a summary JSON on stdout.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON configuration file; omitted fields keep the reference defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(flatten)]
    probe: ProbeArgs,

    #[command(flatten)]
    acquisition: AcquisitionArgs,

    /// Probe phase shift during ON half-periods, rad.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "delay_s")]
    phase: Option<f64>,

    /// Sample the configured waveform source at this delay instead of
    /// stating the phase directly.
    #[arg(long, allow_hyphen_values = true)]
    delay_s: Option<f64>,

    /// Output `.qttg` path.
    #[arg(long, short, value_name = "PATH")]
    output: PathBuf,
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = FileConfig::load(args.config.as_deref())?;
    args.probe.apply(&mut cfg.probe);
    args.acquisition.apply(&mut cfg.acquisition);
    let (acquisition, probe) = (cfg.acquisition, cfg.probe);

    let phase = match (args.phase, args.delay_s) {
        (Some(phase), _) => phase,
        (None, Some(delay_s)) => {
            cfg.crystal.validate().map_err(CliError::config)?;
            cfg.source.validate().map_err(CliError::config)?;
            phase_from_field(cfg.source.field_at(delay_s), &cfg.crystal)
        }
        (None, None) => 0.0,
    };

    let records = simulate_stream(&acquisition, &probe, phase).map_err(CliError::config)?;
    let header = StreamHeader::new(
        records.len() as u64,
        acquisition.rep_rate_hz,
        acquisition.f_mod_hz,
    );
    let bytes = encode_stream(&header, &records).map_err(CliError::data)?;
    fs::write(&args.output, &bytes)
        .map_err(|err| CliError::data(format!("cannot write {}: {err}", args.output.display())))?;

    let mut clicks = [0u64; 2];
    let mut markers = 0u64;
    for record in &records {
        match record.channel {
            Channel::Detector1 => clicks[0] += 1,
            Channel::Detector2 => clicks[1] += 1,
            Channel::Marker => markers += 1,
        }
    }
    let duration_s = acquisition.num_periods as f64 / acquisition.f_mod_hz as f64;
    let report = json!({
        "output": args.output.display().to_string(),
        "seed": acquisition.rng_seed,
        "phase_rad": phase,
        "delay_s": args.delay_s,
        "config": {
            "acquisition": acquisition,
            "probe": probe,
            "crystal": cfg.crystal,
            "source": cfg.source,
        },
        "pulses": acquisition.num_periods * 2 * acquisition.pulses_per_half(),
        "records": records.len(),
        "markers": markers,
        "clicks": { "detector1": clicks[0], "detector2": clicks[1] },
        "click_rate_hz": {
            "detector1": clicks[0] as f64 / duration_s,
            "detector2": clicks[1] as f64 / duration_s,
        },
        "bytes": bytes.len(),
    });
    crate::report::emit_json(&report);
    Ok(())
}
