//! Digital lock-in phase estimation from window counts.
//!
//! Each modulation period yields one phase sample: the normalized count
//! difference of the ON half minus that of the OFF half, where each half is
//! read as a ratio of summed counts `(N1 - N2)/(N1 + N2)` over its pulses.
//! (Per-pulse ratios would be undefined for the overwhelming majority of
//! pulses at a few-percent click rate.) Samples aggregate into a mean with
//! a standard error, and the threshold-detector responsivity `α` converts
//! the recorded phase into the optical phase.
//!
//! On the correction direction: the estimator treats the recorded phase as
//! `α` times the optical phase, so recovery divides by `α`. The literal
//! multiplicative form of the responsivity appears in [`predicted_se`],
//! and [`AlphaConvention`] lets callers flip the direction when comparing
//! against conventions that multiply instead.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tags::WindowCounts;

/// Errors from phase aggregation.
#[derive(Debug, Error)]
pub enum LockinError {
    #[error("need at least 2 valid windows to estimate a phase, got {valid}")]
    TooFewValidWindows { valid: usize },
    #[error("responsivity must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("predicted standard error needs positive inputs, got {name} = {value}")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error(
        "scan delays must be strictly increasing: delay {current} s at point {index} \
         does not follow {previous} s"
    )]
    NonIncreasingDelays {
        index: usize,
        previous: f64,
        current: f64,
    },
    #[error("scan delays must be finite, got {0} at point {1}")]
    NonFiniteDelay(f64, usize),
}

/// How the responsivity correction maps recorded phase to optical phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaConvention {
    /// Recorded phase = α · optical phase, so correct by dividing.
    #[default]
    Divide,
    /// Optical phase = α · recorded phase, so correct by multiplying.
    Multiply,
}

/// Recorded phase of one modulation period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    /// Window index the sample came from.
    pub index: u64,
    /// Recorded phase (difference of the two half ratios); `|value| <= 2`.
    pub value: f64,
    /// False when either half registered no counts at all.
    pub valid: bool,
}

/// Aggregated phase estimate over many windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    /// Mean recorded phase over the valid windows, in radians.
    pub phi_raw: f64,
    /// Responsivity-corrected phase, in radians.
    pub phi_corrected: f64,
    /// Standard error of `phi_corrected`, in radians.
    pub se: f64,
    /// Number of valid windows that entered the estimate.
    pub k_used: u64,
    /// Responsivity factor that was applied.
    pub alpha: f64,
}

/// Recorded phase of one window: the ON-half count asymmetry minus the
/// OFF-half count asymmetry, each read as `(N1 - N2)/(N1 + N2)`.
///
/// A half with zero total counts leaves the ratio undefined; the sample is
/// then flagged invalid instead of injecting a bias-prone placeholder.
pub fn window_phase(counts: &WindowCounts) -> PhaseSample {
    let on_total = counts.total_on();
    let off_total = counts.total_off();
    if on_total == 0 || off_total == 0 {
        return PhaseSample {
            index: counts.index,
            value: 0.0,
            valid: false,
        };
    }
    let on = (counts.n1_on as f64 - counts.n2_on as f64) / on_total as f64;
    let off = (counts.n1_off as f64 - counts.n2_off as f64) / off_total as f64;
    PhaseSample {
        index: counts.index,
        value: on - off,
        valid: true,
    }
}

/// Aggregates phase samples into a corrected estimate, dividing by `alpha`.
pub fn estimate_phase(samples: &[PhaseSample], alpha: f64) -> Result<PhaseEstimate, LockinError> {
    estimate_phase_with_convention(samples, alpha, AlphaConvention::Divide)
}

/// [`estimate_phase`] with an explicit correction direction.
///
/// Invalid samples are excluded; `k_used` reports how many remained. The
/// standard error is the sample standard deviation over `sqrt(k_used)`,
/// scaled the same way as the phase.
pub fn estimate_phase_with_convention(
    samples: &[PhaseSample],
    alpha: f64,
    convention: AlphaConvention,
) -> Result<PhaseEstimate, LockinError> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(LockinError::InvalidAlpha(alpha));
    }
    let values: Vec<f64> = samples
        .iter()
        .filter(|s| s.valid)
        .map(|s| s.value)
        .collect();
    if values.len() < 2 {
        return Err(LockinError::TooFewValidWindows {
            valid: values.len(),
        });
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let se_raw = (variance / k).sqrt();
    let scale = match convention {
        AlphaConvention::Divide => 1.0 / alpha,
        AlphaConvention::Multiply => alpha,
    };
    Ok(PhaseEstimate {
        phi_raw: mean,
        phi_corrected: mean * scale,
        se: se_raw * scale,
        k_used: values.len() as u64,
        alpha,
    })
}

/// Predicted standard error of the corrected phase after `k` windows of
/// `m` pulses per half: `sqrt(2/(k m)) · alpha · sigma_minus / n_plus`.
///
/// `sigma_minus` is the per-pulse standard deviation of the count
/// difference and `n_plus` the mean counts per pulse summed over both
/// detectors.
pub fn predicted_se(
    k: f64,
    m: f64,
    alpha: f64,
    sigma_minus: f64,
    n_plus: f64,
) -> Result<f64, LockinError> {
    for (name, value) in [
        ("k", k),
        ("m", m),
        ("alpha", alpha),
        ("sigma_minus", sigma_minus),
        ("n_plus", n_plus),
    ] {
        if !value.is_finite() || value <= 0.0 {
            return Err(LockinError::NonPositiveInput { name, value });
        }
    }
    Ok((2.0 / (k * m)).sqrt() * alpha * sigma_minus / n_plus)
}

/// One row of a delay-scan phase trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub delay_s: f64,
    pub phi_rad: f64,
    pub se_rad: f64,
    pub k_used: u64,
}

/// Assembles per-delay estimates into a phase trace, preserving input
/// order. Delays must be finite and strictly increasing.
pub fn trace_from_scan(estimates: &[(f64, PhaseEstimate)]) -> Result<Vec<TraceRow>, LockinError> {
    let mut rows = Vec::with_capacity(estimates.len());
    let mut previous: Option<f64> = None;
    for (index, (delay_s, estimate)) in estimates.iter().enumerate() {
        if !delay_s.is_finite() {
            return Err(LockinError::NonFiniteDelay(*delay_s, index));
        }
        if let Some(prev) = previous {
            if *delay_s <= prev {
                return Err(LockinError::NonIncreasingDelays {
                    index,
                    previous: prev,
                    current: *delay_s,
                });
            }
        }
        previous = Some(*delay_s);
        rows.push(TraceRow {
            delay_s: *delay_s,
            phi_rad: estimate.phi_corrected,
            se_rad: estimate.se,
            k_used: estimate.k_used,
        });
    }
    Ok(rows)
}
