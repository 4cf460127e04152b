//! End-to-end delay scans: sample a waveform at each delay, convert field
//! to probe phase, simulate the acquisition, and demodulate back to a
//! phase trace.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{responsivity, FockError, ProbeSpec};
use crate::lockin::{estimate_phase, window_phase, LockinError, PhaseEstimate, TraceRow};
use crate::rng::derive_seed;
use crate::tags::{simulate_window_counts, AcquisitionConfig, ConfigError, SimulateError};
use crate::thz::{
    field_from_phase, phase_from_field, single_cycle_field, CrystalSpec, ThzError, ThzWaveform,
};

/// Errors from configuring or running a delay scan.
#[derive(Debug, Error)]
pub enum ScanError {
    #[error("delay bounds must be finite, got start={0}, stop={1}")]
    NonFiniteDelayBounds(f64, f64),
    #[error("delay step must be positive and finite, got {0}")]
    InvalidDelayStep(f64),
    #[error("delay stop {stop_s} precedes start {start_s}")]
    ReversedDelayBounds { start_s: f64, stop_s: f64 },
    #[error("waveform peak field must be finite, got {0}")]
    NonFinitePeakField(f64),
    #[error(transparent)]
    Acquisition(#[from] ConfigError),
    #[error(transparent)]
    Probe(#[from] FockError),
    #[error(transparent)]
    Waveform(#[from] ThzError),
    #[error("simulation failed at delay {delay_s:.6e} s (point {index}): {source}")]
    Simulation {
        index: usize,
        delay_s: f64,
        source: SimulateError,
    },
    #[error("demodulation failed at delay {delay_s:.6e} s (point {index}): {source}")]
    Demodulation {
        index: usize,
        delay_s: f64,
        source: LockinError,
    },
}

/// Uniform delay grid over `[start, stop]`, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayGrid {
    pub start_s: f64,
    pub stop_s: f64,
    pub step_s: f64,
}

impl DelayGrid {
    pub fn validate(&self) -> Result<(), ScanError> {
        if !self.start_s.is_finite() || !self.stop_s.is_finite() {
            return Err(ScanError::NonFiniteDelayBounds(self.start_s, self.stop_s));
        }
        if !self.step_s.is_finite() || self.step_s <= 0.0 {
            return Err(ScanError::InvalidDelayStep(self.step_s));
        }
        if self.stop_s < self.start_s {
            return Err(ScanError::ReversedDelayBounds {
                start_s: self.start_s,
                stop_s: self.stop_s,
            });
        }
        Ok(())
    }

    /// Number of grid points; the stop bound counts when it lies within a
    /// billionth of a step of the grid.
    pub fn num_points(&self) -> usize {
        ((self.stop_s - self.start_s) / self.step_s + 1e-9).floor() as usize + 1
    }

    pub fn delays(&self) -> Vec<f64> {
        (0..self.num_points())
            .map(|i| self.start_s + i as f64 * self.step_s)
            .collect()
    }
}

/// The waveform a scan samples: a closed-form single-cycle pulse, or a
/// stored trace interpolated linearly and zero outside its support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaveformSource {
    SingleCycle {
        f_peak_hz: f64,
        peak_field_v_per_m: f64,
    },
    Trace {
        waveform: ThzWaveform,
    },
}

impl WaveformSource {
    pub fn validate(&self) -> Result<(), ScanError> {
        match self {
            Self::SingleCycle {
                f_peak_hz,
                peak_field_v_per_m,
            } => {
                if !f_peak_hz.is_finite() || *f_peak_hz <= 0.0 {
                    return Err(ThzError::InvalidPeakFrequency(*f_peak_hz).into());
                }
                if !peak_field_v_per_m.is_finite() {
                    return Err(ScanError::NonFinitePeakField(*peak_field_v_per_m));
                }
                Ok(())
            }
            Self::Trace { .. } => Ok(()),
        }
    }

    /// Field at time `t`, V/m.
    pub fn field_at(&self, t_s: f64) -> f64 {
        match self {
            Self::SingleCycle {
                f_peak_hz,
                peak_field_v_per_m,
            } => {
                let tau = 1.0 / (2.0 * std::f64::consts::PI * f_peak_hz);
                single_cycle_field(t_s, tau, *peak_field_v_per_m)
            }
            Self::Trace { waveform } => {
                let x = (t_s - waveform.t0()) / waveform.dt();
                let last = (waveform.len() - 1) as f64;
                if x < 0.0 || x > last {
                    return 0.0;
                }
                let i = (x.floor() as usize).min(waveform.len() - 2);
                let frac = x - i as f64;
                let samples = waveform.samples();
                samples[i] * (1.0 - frac) + samples[i + 1] * frac
            }
        }
    }
}

/// Full description of a delay scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub acquisition: AcquisitionConfig,
    pub probe: ProbeSpec,
    pub crystal: CrystalSpec,
    pub delays: DelayGrid,
    pub source: WaveformSource,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), ScanError> {
        self.acquisition.validate()?;
        self.crystal.validate()?;
        self.delays.validate()?;
        self.source.validate()?;
        responsivity(&self.probe)?;
        Ok(())
    }
}

/// One measured delay point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub delay_s: f64,
    /// Phase the waveform injects at this delay, rad.
    pub injected_phase_rad: f64,
    /// Derived acquisition seed used for this point.
    pub seed: u64,
    pub estimate: PhaseEstimate,
}

/// A completed scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// Responsivity used for every point.
    pub alpha: f64,
    pub points: Vec<ScanPoint>,
}

impl ScanResult {
    /// The corrected phase trace, one row per delay.
    pub fn trace(&self) -> Result<Vec<TraceRow>, LockinError> {
        let estimates: Vec<(f64, PhaseEstimate)> = self
            .points
            .iter()
            .map(|p| (p.delay_s, p.estimate))
            .collect();
        crate::lockin::trace_from_scan(&estimates)
    }

    /// The measured field at each delay, inverting the Pockels map.
    pub fn reconstructed_field(&self, crystal: &CrystalSpec) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| {
                (
                    p.delay_s,
                    field_from_phase(p.estimate.phi_corrected, crystal),
                )
            })
            .collect()
    }
}

/// Runs the scan: each delay gets its own derived seed, so points are
/// independent and the whole result is a pure function of the config.
pub fn run_scan(config: &ScanConfig) -> Result<ScanResult, ScanError> {
    config.validate()?;
    let alpha = responsivity(&config.probe)?;
    let points = config
        .delays
        .delays()
        .par_iter()
        .enumerate()
        .map(|(index, &delay_s)| {
            let injected_phase_rad =
                phase_from_field(config.source.field_at(delay_s), &config.crystal);
            let seed = derive_seed(config.acquisition.rng_seed, index as u64 + 1);
            let acquisition = AcquisitionConfig {
                rng_seed: seed,
                ..config.acquisition
            };
            let windows = simulate_window_counts(&acquisition, &config.probe, injected_phase_rad)
                .map_err(|source| ScanError::Simulation {
                index,
                delay_s,
                source,
            })?;
            let samples: Vec<_> = windows.iter().map(window_phase).collect();
            let estimate =
                estimate_phase(&samples, alpha).map_err(|source| ScanError::Demodulation {
                    index,
                    delay_s,
                    source,
                })?;
            Ok(ScanPoint {
                delay_s,
                injected_phase_rad,
                seed,
                estimate,
            })
        })
        .collect::<Result<Vec<_>, ScanError>>()?;
    Ok(ScanResult { alpha, points })
}
