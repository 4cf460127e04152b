//! Run configuration: a single JSON document with reference-sampler
//! defaults, overridden field by field from command-line flags.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qeos_core::fock::ProbeSpec;
use qeos_core::scan::{DelayGrid, WaveformSource};
use qeos_core::tags::AcquisitionConfig;
use qeos_core::thz::{field_from_phase, BeamProfile, CrystalSpec};

use crate::error::CliError;

/// Peak phase excursion of the default synthetic waveform, rad.
pub const DEFAULT_PEAK_PHASE_RAD: f64 = 7.5e-4;

/// Pulse energy assumed when none is configured, J.
pub const DEFAULT_PULSE_ENERGY_J: f64 = 1e-15;

/// Everything a run needs: acquisition timing, probe state, detection
/// crystal, delay grid, waveform source, focus geometry, and pulse energy.
///
/// Fields missing from the JSON document keep the reference-sampler
/// defaults (80 MHz pulses, 10 kHz modulation, squeezed probe of 0.05
/// photons at 65 % efficiency, the reference crystal, and a 1.5 THz
/// single-cycle waveform scanned over one picosecond).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub acquisition: AcquisitionConfig,
    pub probe: ProbeSpec,
    pub crystal: CrystalSpec,
    pub delays: DelayGrid,
    pub source: WaveformSource,
    pub beam: BeamProfile,
    pub pulse_energy_j: f64,
    /// Directory where `scan` writes its CSV outputs.
    pub out_dir: String,
}

impl Default for FileConfig {
    fn default() -> Self {
        let crystal = CrystalSpec::default();
        Self {
            acquisition: AcquisitionConfig::default(),
            probe: ProbeSpec::default(),
            crystal,
            delays: DelayGrid {
                start_s: -0.5e-12,
                stop_s: 0.5e-12,
                step_s: 0.025e-12,
            },
            source: WaveformSource::SingleCycle {
                f_peak_hz: 1.5e12,
                peak_field_v_per_m: field_from_phase(DEFAULT_PEAK_PHASE_RAD, &crystal),
            },
            beam: BeamProfile::default(),
            pulse_energy_j: DEFAULT_PULSE_ENERGY_J,
            out_dir: ".".to_string(),
        }
    }
}

impl FileConfig {
    /// Loads `path`, or the built-in defaults when no file is named.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|err| {
            CliError::config(format!("cannot read config {}: {err}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|err| CliError::config(format!("invalid config {}: {err}", path.display())))
    }
}
