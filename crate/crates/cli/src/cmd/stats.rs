//! `qeos stats`: enumerated per-pulse statistics of the configured probe.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use qeos_core::fock::{
    apply_loss, click_stats, detected_distribution, per_pulse_sensitivity, polarimetric_split,
    probe_distribution, responsivity, DetectorMode, PhotonNumberDistribution, ProbeSpec,
};

use crate::args::ProbeArgs;
use crate::config::FileConfig;
use crate::error::CliError;

/// Report the probe's click statistics, responsivity, and per-pulse
/// sensitivities as JSON on stdout.
#[derive(Debug, Args)]
pub struct StatsArgs {
    /// JSON configuration file; omitted fields keep the reference defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(flatten)]
    probe: ProbeArgs,

    /// Photon-number cutoff for the click statistics (default: automatic).
    #[arg(long)]
    n_max: Option<usize>,
}

pub fn run(args: &StatsArgs) -> Result<(), CliError> {
    let mut cfg = FileConfig::load(args.config.as_deref())?;
    args.probe.apply(&mut cfg.probe);
    let probe = cfg.probe;
    probe.validate().map_err(CliError::config)?;

    let detected = detected_at_cutoff(&probe, args.n_max)?;
    let joint = polarimetric_split(&detected, 0.0).map_err(CliError::config)?;
    let stats = click_stats(&joint);
    let alpha = responsivity(&probe).map_err(CliError::config)?;
    let u_onoff = per_pulse_sensitivity(&probe, DetectorMode::OnOff).map_err(CliError::config)?;
    let u_resolved =
        per_pulse_sensitivity(&probe, DetectorMode::NumberResolved).map_err(CliError::config)?;

    let report = json!({
        "probe": probe,
        "n_max": detected.n_max(),
        "c1": stats.c1,
        "c_plus": stats.c_plus,
        "sigma_minus": stats.sigma_diff,
        "alpha": alpha,
        "u_onoff": u_onoff,
        "u_resolved": u_resolved,
    });
    crate::report::emit_json(&report);
    Ok(())
}

fn detected_at_cutoff(
    probe: &ProbeSpec,
    n_max: Option<usize>,
) -> Result<PhotonNumberDistribution, CliError> {
    match n_max {
        Some(n_max) => {
            let source = probe_distribution(probe, n_max).map_err(CliError::config)?;
            apply_loss(&source, probe.efficiency).map_err(CliError::config)
        }
        None => detected_distribution(probe).map_err(CliError::config),
    }
}
