//! Time-tagged detection streams: acquisition configuration, record types,
//! a compact binary codec, a deterministic simulator, and the windower that
//! folds records into per-modulation-period counts.
//!
//! A stream interleaves three channels on a common picosecond clock: the two
//! click detectors behind the polarimetric split and a marker channel that
//! ticks at twice the modulation frequency. Markers delimit the ON and OFF
//! half-periods of the field modulation; the first half of every period is
//! ON. Records are strictly time-ordered, and at equal timestamps a marker
//! precedes the clicks it gates, so stream order — not timestamp arithmetic
//! — decides which half a click belongs to.

mod codec;
mod simulate;
mod window;

pub use codec::{
    decode_stream, encode_stream, parse_stream, StreamError, StreamHeader, StreamParser,
    FORMAT_VERSION, HEADER_LEN, MAGIC, RECORD_LEN,
};
pub use simulate::{simulate_stream, simulate_window_counts, SimulateError};
pub use window::{window_counts, WindowCounts, WindowDiagnostics, Windower};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dead time of the reference single-photon avalanche diodes, in seconds.
pub const SPAD_DEAD_TIME_S: f64 = 2e-6;

/// Source channel of a time-tag record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    /// Click detector on output port 1 of the polarimetric split.
    Detector1 = 0,
    /// Click detector on output port 2.
    Detector2 = 1,
    /// Modulation half-period boundary.
    Marker = 2,
}

impl Channel {
    /// Wire value used by the binary codec.
    pub fn to_byte(self) -> u8 {
        self as u8
    }

    /// Inverse of [`Channel::to_byte`]; `None` for unassigned values.
    pub fn from_byte(byte: u8) -> Option<Self> {
        match byte {
            0 => Some(Channel::Detector1),
            1 => Some(Channel::Detector2),
            2 => Some(Channel::Marker),
            _ => None,
        }
    }
}

/// One detection or marker event on the common picosecond clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeTagRecord {
    pub timestamp_ps: u64,
    pub channel: Channel,
}

impl TimeTagRecord {
    pub fn new(timestamp_ps: u64, channel: Channel) -> Self {
        Self {
            timestamp_ps,
            channel,
        }
    }
}

/// Errors from acquisition-configuration validation.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("repetition rate must be positive")]
    ZeroRepRate,
    #[error("modulation frequency must be positive")]
    ZeroModulationFrequency,
    #[error(
        "repetition rate {rep_rate_hz} Hz is not an integer multiple of twice the \
         modulation frequency {f_mod_hz} Hz; each half-period must hold a whole \
         number of pulses"
    )]
    IncommensurateRates { rep_rate_hz: u64, f_mod_hz: u64 },
    #[error(
        "half-period of {marker_spacing_ps} ps does not equal {pulses_per_half} pulses \
         of {pulse_period_ps} ps on the picosecond clock; choose rates whose periods \
         are exact in picoseconds"
    )]
    GridMisaligned {
        marker_spacing_ps: u64,
        pulses_per_half: u64,
        pulse_period_ps: u64,
    },
    #[error("number of modulation periods must be at least 1")]
    ZeroPeriods,
    #[error("dead time must be finite and non-negative, got {0}")]
    InvalidDeadTime(f64),
    #[error("dark-count rate must be finite and non-negative, got {0}")]
    InvalidDarkRate(f64),
}

/// Timing and detector-imperfection parameters of one acquisition.
///
/// The defaults describe the reference sampler: an 80 MHz pulse train,
/// 10 kHz field modulation (hence 4000 pulses per half-period), ideal
/// detectors, and a fixed seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcquisitionConfig {
    /// Laser repetition rate in Hz.
    pub rep_rate_hz: u64,
    /// Field-modulation frequency in Hz.
    pub f_mod_hz: u64,
    /// Number of modulation periods to acquire (windows `K`).
    pub num_periods: u64,
    /// Detector dead time in seconds; 0 disables dead-time suppression.
    pub dead_time_s: f64,
    /// Detector dark-count rate in Hz per detector; 0 disables dark counts.
    pub dark_rate_hz: f64,
    /// Seed of the deterministic random streams (see [`crate::rng`]).
    pub rng_seed: u64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            rep_rate_hz: 80_000_000,
            f_mod_hz: 10_000,
            num_periods: 1000,
            dead_time_s: 0.0,
            dark_rate_hz: 0.0,
            rng_seed: 1,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rep_rate_hz == 0 {
            return Err(ConfigError::ZeroRepRate);
        }
        if self.f_mod_hz == 0 {
            return Err(ConfigError::ZeroModulationFrequency);
        }
        if !self.rep_rate_hz.is_multiple_of(2 * self.f_mod_hz) {
            return Err(ConfigError::IncommensurateRates {
                rep_rate_hz: self.rep_rate_hz,
                f_mod_hz: self.f_mod_hz,
            });
        }
        if self.num_periods == 0 {
            return Err(ConfigError::ZeroPeriods);
        }
        if !self.dead_time_s.is_finite() || self.dead_time_s < 0.0 {
            return Err(ConfigError::InvalidDeadTime(self.dead_time_s));
        }
        if !self.dark_rate_hz.is_finite() || self.dark_rate_hz < 0.0 {
            return Err(ConfigError::InvalidDarkRate(self.dark_rate_hz));
        }
        if self.marker_spacing_ps() != self.pulses_per_half() * self.pulse_period_ps() {
            return Err(ConfigError::GridMisaligned {
                marker_spacing_ps: self.marker_spacing_ps(),
                pulses_per_half: self.pulses_per_half(),
                pulse_period_ps: self.pulse_period_ps(),
            });
        }
        Ok(())
    }

    /// Pulses per modulation half-period (`M`).
    pub fn pulses_per_half(&self) -> u64 {
        self.rep_rate_hz / (2 * self.f_mod_hz)
    }

    /// Pulse-to-pulse spacing on the picosecond clock.
    pub fn pulse_period_ps(&self) -> u64 {
        (1e12 / self.rep_rate_hz as f64).round() as u64
    }

    /// Marker-to-marker spacing (one modulation half-period) in picoseconds.
    pub fn marker_spacing_ps(&self) -> u64 {
        (1e12 / (2.0 * self.f_mod_hz as f64)).round() as u64
    }

    /// Dead time on the picosecond clock.
    pub fn dead_time_ps(&self) -> u64 {
        (self.dead_time_s * 1e12).round() as u64
    }

    /// Probability of at least one dark count per detector per pulse slot,
    /// folding the Poissonian dark process onto the pulse grid.
    pub fn dark_prob_per_pulse(&self) -> f64 {
        if self.dark_rate_hz == 0.0 {
            0.0
        } else {
            1.0 - (-self.dark_rate_hz / self.rep_rate_hz as f64).exp()
        }
    }

    /// True when neither dead time nor dark counts are modelled, so click
    /// counts per half-period can be drawn directly.
    pub(crate) fn is_ideal(&self) -> bool {
        self.dead_time_s == 0.0 && self.dark_rate_hz == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_the_reference_sampler() {
        let cfg = AcquisitionConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.pulses_per_half(), 4000);
        assert_eq!(cfg.pulse_period_ps(), 12_500);
        assert_eq!(cfg.marker_spacing_ps(), 50_000_000);
        assert_eq!(cfg.marker_spacing_ps(), 4000 * 12_500);
    }

    #[test]
    fn incommensurate_rates_are_rejected() {
        let cfg = AcquisitionConfig {
            rep_rate_hz: 80_000_001,
            ..Default::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::IncommensurateRates { .. })
        ));
    }

    #[test]
    fn off_grid_periods_are_rejected() {
        // 81 MHz divides evenly into half-periods of 4050 pulses, but the
        // 12345.68 ps pulse period does not tile the 50 us half-period on
        // the integer picosecond clock.
        let cfg = AcquisitionConfig {
            rep_rate_hz: 81_000_000,
            ..Default::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::GridMisaligned { .. })
        ));
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        for cfg in [
            AcquisitionConfig {
                rep_rate_hz: 0,
                ..Default::default()
            },
            AcquisitionConfig {
                f_mod_hz: 0,
                ..Default::default()
            },
            AcquisitionConfig {
                num_periods: 0,
                ..Default::default()
            },
            AcquisitionConfig {
                dead_time_s: -1e-6,
                ..Default::default()
            },
            AcquisitionConfig {
                dark_rate_hz: f64::NAN,
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn dark_probability_folds_onto_pulse_grid() {
        let cfg = AcquisitionConfig {
            dark_rate_hz: 200.0,
            ..Default::default()
        };
        let expected = 1.0 - (-200.0f64 / 80e6).exp();
        assert!((cfg.dark_prob_per_pulse() - expected).abs() < 1e-18);
        assert_eq!(AcquisitionConfig::default().dark_prob_per_pulse(), 0.0);
    }

    #[test]
    fn channel_bytes_round_trip() {
        for ch in [Channel::Detector1, Channel::Detector2, Channel::Marker] {
            assert_eq!(Channel::from_byte(ch.to_byte()), Some(ch));
        }
        assert_eq!(Channel::from_byte(3), None);
        assert_eq!(Channel::from_byte(255), None);
    }
}
