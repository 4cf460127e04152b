//! THz-side physics: the Pockels phase map between field and probe phase,
//! absolute field calibration from pulse energy and beam geometry,
//! knife-edge beam-size fitting, single-cycle waveform synthesis, and power
//! spectra.

mod calibrate;
mod knife_edge;
mod spectrum;

pub use calibrate::{calibrate_trace, CalibrationSummary};
pub use knife_edge::{knife_edge_fit, knife_edge_model, KnifeEdgeFit, KnifeEdgeScan};
pub use spectrum::{analytic_signal, power_spectrum, Spectrum};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Impedance of free space, ohms.
pub const VACUUM_IMPEDANCE: f64 = 376.730_313_668;

/// Errors from THz-side operations.
#[derive(Debug, Error)]
pub enum ThzError {
    #[error("crystal parameters must be positive and finite")]
    InvalidCrystal,
    #[error("beam widths must be positive and finite, got sigma_x={0}, sigma_y={1}")]
    InvalidBeam(f64, f64),
    #[error("waveform needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("waveform sample spacing must be positive and finite, got {0}")]
    InvalidSampleSpacing(f64),
    #[error("waveform contains a non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("trace is identically zero; nothing to calibrate")]
    AllZeroTrace,
    #[error("pulse energy must be positive and finite, got {0}")]
    InvalidPulseEnergy(f64),
    #[error(
        "grid under-resolves the pulse: need span >= {min_span:.3e} s and \
         dt <= {max_dt:.3e} s, got span {span:.3e} s, dt {dt:.3e} s"
    )]
    UnderResolvedGrid {
        span: f64,
        dt: f64,
        min_span: f64,
        max_dt: f64,
    },
    #[error("spectral peak frequency must be positive and finite, got {0}")]
    InvalidPeakFrequency(f64),
    #[error("waveform amplitude must be finite, got {0}")]
    NonFiniteAmplitude(f64),
    #[error("knife-edge scan needs at least {min} points, got {got}")]
    ScanTooShort { min: usize, got: usize },
    #[error("knife-edge positions and powers differ in length: {positions} vs {powers}")]
    ScanLengthMismatch { positions: usize, powers: usize },
    #[error("knife-edge positions must be strictly monotonic and finite")]
    NonMonotonicPositions,
    #[error("knife-edge powers must be finite and non-negative")]
    InvalidPowers,
    #[error("knife-edge scan is degenerate: all powers are equal")]
    DegenerateScan,
    #[error("knife-edge fit did not converge within {iterations} iterations")]
    FitDidNotConverge { iterations: usize },
}

/// Electro-optic detection crystal.
///
/// The default is the reference GaAs crystal: `r41 = 1.5 pm/V`, `n = 3.38`,
/// `L = 250 um`, probed at 1.56 um.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrystalSpec {
    /// Electro-optic coefficient, m/V.
    pub r41: f64,
    /// Refractive index at the probe wavelength.
    pub n_index: f64,
    /// Crystal thickness, m.
    pub length: f64,
    /// Probe wavelength, m.
    pub probe_wavelength: f64,
}

impl Default for CrystalSpec {
    fn default() -> Self {
        Self {
            r41: 1.5e-12,
            n_index: 3.38,
            length: 250e-6,
            probe_wavelength: 1.56e-6,
        }
    }
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<(), ThzError> {
        let fields = [self.r41, self.n_index, self.length, self.probe_wavelength];
        if fields.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(ThzError::InvalidCrystal);
        }
        Ok(())
    }

    /// Probe angular frequency `2 pi c / lambda`, rad/s.
    pub fn probe_angular_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / self.probe_wavelength
    }

    /// Phase shift per unit field, rad/(V/m): `r41 n^3 omega L / c`.
    pub fn phase_per_field(&self) -> f64 {
        self.r41 * self.n_index.powi(3) * self.probe_angular_frequency() * self.length
            / SPEED_OF_LIGHT
    }
}

/// Gaussian focus `G(x, y) = exp(-x^2/sigma_x^2 - y^2/sigma_y^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamProfile {
    /// Horizontal 1/e field radius, m.
    pub sigma_x: f64,
    /// Vertical 1/e field radius, m.
    pub sigma_y: f64,
}

impl Default for BeamProfile {
    /// The reference focus: `sigma_x = sigma_y = 200 um`.
    fn default() -> Self {
        Self {
            sigma_x: 200e-6,
            sigma_y: 200e-6,
        }
    }
}

impl BeamProfile {
    pub fn validate(&self) -> Result<(), ThzError> {
        if !self.sigma_x.is_finite()
            || !self.sigma_y.is_finite()
            || self.sigma_x <= 0.0
            || self.sigma_y <= 0.0
        {
            return Err(ThzError::InvalidBeam(self.sigma_x, self.sigma_y));
        }
        Ok(())
    }

    /// `Int G dx dy = pi sigma_x sigma_y`, exactly.
    pub fn area_integral(&self) -> f64 {
        std::f64::consts::PI * self.sigma_x * self.sigma_y
    }
}

/// Unit of a waveform's field values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldUnits {
    /// Uncalibrated detector units.
    Arbitrary,
    /// Absolute electric field, V/m.
    VoltsPerMeter,
}

/// A field waveform on a uniform delay grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThzWaveform {
    samples: Vec<f64>,
    /// Sample spacing, s.
    dt: f64,
    /// Time of the first sample, s.
    t0: f64,
    units: FieldUnits,
}

/// Minimum number of samples in a waveform.
const MIN_SAMPLES: usize = 8;

impl ThzWaveform {
    pub fn new(samples: Vec<f64>, dt: f64, t0: f64, units: FieldUnits) -> Result<Self, ThzError> {
        if samples.len() < MIN_SAMPLES {
            return Err(ThzError::TooFewSamples {
                min: MIN_SAMPLES,
                got: samples.len(),
            });
        }
        if !dt.is_finite() || dt <= 0.0 || !t0.is_finite() {
            return Err(ThzError::InvalidSampleSpacing(dt));
        }
        if let Some(bad) = samples.iter().position(|s| !s.is_finite()) {
            return Err(ThzError::NonFiniteSample(bad));
        }
        Ok(Self {
            samples,
            dt,
            t0,
            units,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn units(&self) -> FieldUnits {
        self.units
    }

    /// Sample times, s.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let (t0, dt) = (self.t0, self.dt);
        (0..self.samples.len()).map(move |i| t0 + i as f64 * dt)
    }

    /// Largest absolute sample value.
    pub fn peak_abs(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |acc, s| acc.max(s.abs()))
    }
}

/// Probe phase shift induced by a THz field `E` via the Pockels effect:
/// `phi = E r41 n^3 omega L / c`, signed like `E`.
pub fn phase_from_field(field_v_per_m: f64, crystal: &CrystalSpec) -> f64 {
    field_v_per_m * crystal.phase_per_field()
}

/// Inverse of [`phase_from_field`]: the field that produces phase `phi`.
pub fn field_from_phase(phi_rad: f64, crystal: &CrystalSpec) -> f64 {
    phi_rad / crystal.phase_per_field()
}

/// Single-cycle test pulse `E(t) = -A (t/tau) exp(1/2 - t^2/(2 tau^2))`
/// with `tau = 1/(2 pi f_peak)`, sampled on a grid of spacing `dt`
/// spanning `[-span/2, span/2]`.
///
/// The model is odd about `t = 0`, reaches `|E| = A` exactly at
/// `t = -/+ tau`, and its power spectrum peaks exactly at `f_peak`. The
/// grid is forced to an odd number of points so `t = 0` is sampled.
/// Fails when the grid cannot resolve the pulse (`span < 10 tau` or
/// `dt > tau/10`).
pub fn synth_single_cycle(
    f_peak_hz: f64,
    dt: f64,
    span: f64,
    amplitude: f64,
) -> Result<ThzWaveform, ThzError> {
    if !f_peak_hz.is_finite() || f_peak_hz <= 0.0 {
        return Err(ThzError::InvalidPeakFrequency(f_peak_hz));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(ThzError::InvalidSampleSpacing(dt));
    }
    if !amplitude.is_finite() {
        return Err(ThzError::NonFiniteAmplitude(amplitude));
    }
    let tau = 1.0 / (2.0 * std::f64::consts::PI * f_peak_hz);
    if span < 10.0 * tau || dt > tau / 10.0 {
        return Err(ThzError::UnderResolvedGrid {
            span,
            dt,
            min_span: 10.0 * tau,
            max_dt: tau / 10.0,
        });
    }
    let half = (span / (2.0 * dt)).floor() as i64;
    let samples: Vec<f64> = (-half..=half)
        .map(|i| single_cycle_field(i as f64 * dt, tau, amplitude))
        .collect();
    ThzWaveform::new(samples, dt, -(half as f64) * dt, FieldUnits::VoltsPerMeter)
}

/// The single-cycle model field at time `t`.
pub fn single_cycle_field(t: f64, tau: f64, amplitude: f64) -> f64 {
    let x = t / tau;
    -amplitude * x * (0.5 - 0.5 * x * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_crystal_phase_at_reference_field() {
        // 130 V/cm in the default GaAs crystal.
        let phi = phase_from_field(13_000.0, &CrystalSpec::default());
        assert!((phi - 7.581933847340548e-4).abs() < 1e-16);
        let in_pi = phi / std::f64::consts::PI;
        assert!(in_pi > 2.35e-4 && in_pi < 2.45e-4, "phi = {in_pi} pi");
    }

    #[test]
    fn phase_is_linear_and_signed() {
        let crystal = CrystalSpec::default();
        assert_eq!(phase_from_field(0.0, &crystal), 0.0);
        let one = phase_from_field(1000.0, &crystal);
        assert!((phase_from_field(2000.0, &crystal) - 2.0 * one).abs() < 1e-18);
        assert!((phase_from_field(-1000.0, &crystal) + one).abs() < 1e-18);
    }

    #[test]
    fn phase_scales_with_each_crystal_parameter() {
        let base = CrystalSpec::default();
        let phi = phase_from_field(1.0, &base);
        let double_r = CrystalSpec {
            r41: base.r41 * 2.0,
            ..base
        };
        assert!((phase_from_field(1.0, &double_r) - 2.0 * phi).abs() < 1e-18);
        let double_l = CrystalSpec {
            length: base.length * 2.0,
            ..base
        };
        assert!((phase_from_field(1.0, &double_l) - 2.0 * phi).abs() < 1e-18);
        let double_lambda = CrystalSpec {
            probe_wavelength: base.probe_wavelength * 2.0,
            ..base
        };
        assert!((phase_from_field(1.0, &double_lambda) - 0.5 * phi).abs() < 1e-18);
    }

    #[test]
    fn field_phase_round_trip() {
        let crystal = CrystalSpec::default();
        let field = field_from_phase(7.581933847340548e-4, &crystal);
        assert!((field - 13_000.0).abs() / 13_000.0 < 1e-12);
        for x in [1e-6, 3.7e-4, 0.12, -5.5e-3] {
            let back = phase_from_field(field_from_phase(x, &crystal), &crystal);
            assert!((back - x).abs() / x.abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_crystal_is_rejected() {
        let bad = CrystalSpec {
            r41: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let nan = CrystalSpec {
            n_index: f64::NAN,
            ..Default::default()
        };
        assert!(nan.validate().is_err());
        CrystalSpec::default().validate().unwrap();
    }

    #[test]
    fn beam_area_is_pi_sigma_squared() {
        let beam = BeamProfile::default();
        beam.validate().unwrap();
        let expected = std::f64::consts::PI * 4e-8;
        assert!((beam.area_integral() - expected).abs() < 1e-20);
        assert!(BeamProfile {
            sigma_x: -1.0,
            sigma_y: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn waveform_invariants_are_enforced() {
        assert!(matches!(
            ThzWaveform::new(vec![0.0; 7], 1e-15, 0.0, FieldUnits::Arbitrary),
            Err(ThzError::TooFewSamples { min: 8, got: 7 })
        ));
        assert!(ThzWaveform::new(vec![0.0; 8], 0.0, 0.0, FieldUnits::Arbitrary).is_err());
        let mut samples = vec![0.0; 8];
        samples[3] = f64::INFINITY;
        assert!(matches!(
            ThzWaveform::new(samples, 1e-15, 0.0, FieldUnits::Arbitrary),
            Err(ThzError::NonFiniteSample(3))
        ));
    }

    #[test]
    fn single_cycle_is_odd_with_unit_extrema_at_tau() {
        let f_peak = 1.5e12;
        let tau = 1.0 / (2.0 * std::f64::consts::PI * f_peak);
        // tau/20 spacing puts t = -/+ tau exactly on the grid.
        let wave = synth_single_cycle(f_peak, tau / 20.0, 12.0 * tau, 250.0).unwrap();
        assert!((tau - 1.061e-13).abs() < 1e-16, "tau = {tau}");
        let n = wave.len();
        assert_eq!(n % 2, 1);
        let mid = n / 2;
        assert_eq!(wave.samples()[mid], 0.0);
        for i in 0..n {
            assert!((wave.samples()[i] + wave.samples()[n - 1 - i]).abs() < 1e-12);
        }
        assert!((wave.samples()[mid + 20] + 250.0).abs() < 1e-12);
        assert!((wave.samples()[mid - 20] - 250.0).abs() < 1e-12);
        assert!(wave.peak_abs() <= 250.0 * (1.0 + 1e-12));
    }

    #[test]
    fn under_resolved_grids_are_rejected() {
        let f_peak = 1.5e12;
        let tau = 1.0 / (2.0 * std::f64::consts::PI * f_peak);
        assert!(matches!(
            synth_single_cycle(f_peak, tau / 5.0, 20.0 * tau, 1.0),
            Err(ThzError::UnderResolvedGrid { .. })
        ));
        assert!(matches!(
            synth_single_cycle(f_peak, tau / 20.0, 5.0 * tau, 1.0),
            Err(ThzError::UnderResolvedGrid { .. })
        ));
        assert!(synth_single_cycle(-1.0, 1e-15, 1e-12, 1.0).is_err());
    }
}
