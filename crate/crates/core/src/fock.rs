//! Photon-number statistics of the probe and the click statistics of the
//! polarimetric detector pair, by direct enumeration over a truncated Fock
//! space.
//!
//! The probe is either squeezed vacuum (thermal statistics on the even
//! photon numbers only) or a coherent state (Poissonian). Optical loss is a
//! binomial channel, the Wollaston split behind the quarter-wave plate is a
//! binomial routing with per-photon probability `p = (1 + sin ΔΦ)/2`, and
//! the two detectors are threshold ("click / no click") devices. Everything
//! downstream — click probabilities, the variance of the click difference,
//! the responsivity correction `α`, and per-pulse sensitivities — comes from
//! exact sums over the enumerated joint distribution, not from sampling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default Fock-space truncation used by [`probe_distribution`].
pub const DEFAULT_N_MAX: usize = 16;

/// Hard ceiling for the automatic truncation search.
const N_MAX_CEILING: usize = 512;

/// Maximum probability mass the truncation may discard.
const TRUNCATION_TOLERANCE: f64 = 1e-9;

/// Errors from probe enumeration and click-statistics operations.
#[derive(Debug, Error)]
pub enum FockError {
    #[error("mean photon number must be finite and non-negative, got {0}")]
    InvalidMeanPhotons(f64),
    #[error("detection efficiency must lie in [0, 1], got {0}")]
    InvalidEfficiency(f64),
    #[error("channel transmission must lie in [0, 1], got {0}")]
    InvalidTransmission(f64),
    #[error(
        "truncation at n_max = {n_max} discards {discarded:.3e} of the probability mass \
         (tolerance {tolerance:.0e}); raise n_max"
    )]
    TruncationTooAggressive {
        n_max: usize,
        discarded: f64,
        tolerance: f64,
    },
    #[error("probabilities must be finite, non-negative and sum to 1, got total {total}")]
    NotADistribution { total: f64 },
    #[error("phase shift must be finite, got {0}")]
    NonFinitePhase(f64),
    #[error("responsivity is undefined for a probe that never produces a click")]
    UndefinedResponsivity,
    #[error("per-pulse sensitivity is undefined for a vacuum probe")]
    VacuumProbe,
}

/// Which quantum state drives the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    /// Squeezed vacuum: thermal weights on even photon numbers only.
    SqueezedVacuum,
    /// Coherent state: Poissonian photon numbers.
    Coherent,
}

/// Detector model assumed when quoting a per-pulse sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorMode {
    /// Threshold detectors; the observable is the click difference.
    OnOff,
    /// Ideal photon-number-resolving detectors; the observable is the
    /// photon-number difference.
    NumberResolved,
}

/// Source state plus the total optical/detection efficiency seen by it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub kind: ProbeKind,
    /// Mean photon number of the source, before any loss.
    pub mean_photons: f64,
    /// Combined transmission and detection efficiency, in [0, 1].
    pub efficiency: f64,
}

impl ProbeSpec {
    pub fn new(kind: ProbeKind, mean_photons: f64, efficiency: f64) -> Result<Self, FockError> {
        let spec = Self {
            kind,
            mean_photons,
            efficiency,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Squeezed-vacuum probe with the given source flux and efficiency.
    pub fn squeezed(mean_photons: f64, efficiency: f64) -> Result<Self, FockError> {
        Self::new(ProbeKind::SqueezedVacuum, mean_photons, efficiency)
    }

    /// Coherent probe with the given source flux and efficiency.
    pub fn coherent(mean_photons: f64, efficiency: f64) -> Result<Self, FockError> {
        Self::new(ProbeKind::Coherent, mean_photons, efficiency)
    }

    pub fn validate(&self) -> Result<(), FockError> {
        if !self.mean_photons.is_finite() || self.mean_photons < 0.0 {
            return Err(FockError::InvalidMeanPhotons(self.mean_photons));
        }
        if !self.efficiency.is_finite() || !(0.0..=1.0).contains(&self.efficiency) {
            return Err(FockError::InvalidEfficiency(self.efficiency));
        }
        Ok(())
    }
}

impl Default for ProbeSpec {
    /// The squeezed probe of the reference sampler: 0.05 photons per pulse
    /// at 65 % total efficiency.
    fn default() -> Self {
        Self {
            kind: ProbeKind::SqueezedVacuum,
            mean_photons: 0.05,
            efficiency: 0.65,
        }
    }
}

/// A photon-number distribution on `0..=n_max`.
///
/// Invariants: every entry is finite and non-negative and the entries sum
/// to 1 within [`TRUNCATION_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberDistribution {
    probs: Vec<f64>,
}

impl PhotonNumberDistribution {
    /// Wraps raw probabilities after checking the distribution invariants.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self, FockError> {
        if probs.is_empty() {
            return Err(FockError::NotADistribution { total: 0.0 });
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(FockError::NotADistribution { total: f64::NAN });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TRUNCATION_TOLERANCE {
            return Err(FockError::NotADistribution { total });
        }
        Ok(Self { probs })
    }

    /// The vacuum state.
    pub fn vacuum() -> Self {
        Self { probs: vec![1.0] }
    }

    /// Largest photon number carried by the truncation.
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// `P(n)`, zero beyond the truncation.
    pub fn prob(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mean photon number of the truncated distribution.
    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Variance of the truncated distribution.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64 - mean).powi(2) * p)
            .sum()
    }

    /// Sum of the stored probabilities: 1 up to the truncation error.
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Enumerates the source photon-number distribution on `0..=n_max`.
///
/// `spec.efficiency` is deliberately ignored here: the result describes the
/// state *before* loss, so that [`apply_loss`] can be tested and composed
/// independently. Fails with [`FockError::TruncationTooAggressive`] when the
/// tail beyond `n_max` exceeds the internal tolerance of 1e-9.
pub fn probe_distribution(
    spec: &ProbeSpec,
    n_max: usize,
) -> Result<PhotonNumberDistribution, FockError> {
    spec.validate()?;
    let n = spec.mean_photons;
    let mut probs = vec![0.0; n_max + 1];
    match spec.kind {
        ProbeKind::SqueezedVacuum => {
            // Thermal weights on even n: P(0) = 1/sqrt(1+n) and
            // P(2m+2)/P(2m) = (2m+1)/(2m+2) * (n/(1+n)).
            let ratio = n / (1.0 + n);
            let mut p = 1.0 / (1.0 + n).sqrt();
            probs[0] = p;
            let mut m = 0usize;
            while 2 * (m + 1) <= n_max {
                p *= ratio * (2 * m + 1) as f64 / (2 * m + 2) as f64;
                probs[2 * (m + 1)] = p;
                m += 1;
            }
        }
        ProbeKind::Coherent => {
            // Poisson: P(k+1)/P(k) = n/(k+1).
            let mut p = (-n).exp();
            probs[0] = p;
            for k in 0..n_max {
                p *= n / (k + 1) as f64;
                probs[k + 1] = p;
            }
        }
    }
    let discarded = 1.0 - probs.iter().sum::<f64>();
    if discarded > TRUNCATION_TOLERANCE {
        return Err(FockError::TruncationTooAggressive {
            n_max,
            discarded,
            tolerance: TRUNCATION_TOLERANCE,
        });
    }
    Ok(PhotonNumberDistribution { probs })
}

/// Like [`probe_distribution`], with the truncation grown automatically
/// until the discarded tail is below tolerance.
pub fn probe_distribution_auto(spec: &ProbeSpec) -> Result<PhotonNumberDistribution, FockError> {
    let mut n_max = DEFAULT_N_MAX;
    loop {
        match probe_distribution(spec, n_max) {
            Err(FockError::TruncationTooAggressive { .. }) if n_max < N_MAX_CEILING => {
                n_max *= 2;
            }
            other => return other,
        }
    }
}

/// Sends the distribution through a binomial loss channel of transmission
/// `eta`: each photon independently survives with probability `eta`.
pub fn apply_loss(
    dist: &PhotonNumberDistribution,
    eta: f64,
) -> Result<PhotonNumberDistribution, FockError> {
    if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
        return Err(FockError::InvalidTransmission(eta));
    }
    let n_max = dist.n_max();
    if eta == 1.0 {
        return Ok(dist.clone());
    }
    if eta == 0.0 {
        let mut probs = vec![0.0; n_max + 1];
        probs[0] = dist.total();
        return Ok(PhotonNumberDistribution { probs });
    }
    let mut eta_pow = vec![1.0; n_max + 1];
    let mut loss_pow = vec![1.0; n_max + 1];
    for k in 1..=n_max {
        eta_pow[k] = eta_pow[k - 1] * eta;
        loss_pow[k] = loss_pow[k - 1] * (1.0 - eta);
    }
    let mut out = vec![0.0; n_max + 1];
    for n in 0..=n_max {
        let p_n = dist.prob(n);
        if p_n == 0.0 {
            continue;
        }
        // Binomial coefficients along the row via C(n, k+1) = C(n, k) * (n - k)/(k + 1).
        let mut binom = 1.0;
        for k in 0..=n {
            out[k] += p_n * binom * eta_pow[k] * loss_pow[n - k];
            binom *= (n - k) as f64 / (k + 1) as f64;
        }
    }
    Ok(PhotonNumberDistribution { probs: out })
}

/// Joint distribution of photon numbers `(n1, n2)` behind the polarimetric
/// split, stored densely for `n1 + n2 <= n_max`.
#[derive(Debug, Clone)]
pub struct SplitJointDistribution {
    /// Row-major `(n_max + 1) x (n_max + 1)` table; entries with
    /// `n1 + n2 > n_max` are zero.
    probs: Vec<f64>,
    n_max: usize,
    /// Per-photon probability of routing to port 1.
    split_prob: f64,
}

impl SplitJointDistribution {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Per-photon routing probability `(1 + sin ΔΦ)/2` the table was built with.
    pub fn split_prob(&self) -> f64 {
        self.split_prob
    }

    /// `P(n1, n2)`, zero outside the table.
    pub fn prob(&self, n1: usize, n2: usize) -> f64 {
        if n1 > self.n_max || n2 > self.n_max {
            return 0.0;
        }
        self.probs[n1 * (self.n_max + 1) + n2]
    }

    /// Iterates over the entries with `n1 + n2 <= n_max`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let side = self.n_max + 1;
        (0..side)
            .flat_map(move |n1| (0..side - n1).map(move |n2| (n1, n2, self.probs[n1 * side + n2])))
    }

    /// Sum of the stored probabilities: 1 up to the truncation error.
    pub fn total(&self) -> f64 {
        self.iter().map(|(_, _, p)| p).sum()
    }
}

/// Splits each photon to port 1 with probability `p = (1 + sin ΔΦ)/2` and
/// to port 2 otherwise, independently, conditional on the total `n`.
pub fn polarimetric_split(
    dist: &PhotonNumberDistribution,
    delta_phi: f64,
) -> Result<SplitJointDistribution, FockError> {
    if !delta_phi.is_finite() {
        return Err(FockError::NonFinitePhase(delta_phi));
    }
    let p = (0.5 * (1.0 + delta_phi.sin())).clamp(0.0, 1.0);
    let n_max = dist.n_max();
    let side = n_max + 1;
    let mut probs = vec![0.0; side * side];
    let mut p_pow = vec![1.0; side];
    let mut q_pow = vec![1.0; side];
    for k in 1..=n_max {
        p_pow[k] = p_pow[k - 1] * p;
        q_pow[k] = q_pow[k - 1] * (1.0 - p);
    }
    for n in 0..=n_max {
        let p_n = dist.prob(n);
        if p_n == 0.0 {
            continue;
        }
        let mut binom = 1.0;
        for n1 in 0..=n {
            probs[n1 * side + (n - n1)] += p_n * binom * p_pow[n1] * q_pow[n - n1];
            binom *= (n - n1) as f64 / (n1 + 1) as f64;
        }
    }
    Ok(SplitJointDistribution {
        probs,
        n_max,
        split_prob: p,
    })
}

/// Joint click pattern of the two threshold detectors for one pulse.
///
/// `p10` is "detector 1 clicked, detector 2 did not", and so on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickPmf {
    pub p00: f64,
    pub p10: f64,
    pub p01: f64,
    pub p11: f64,
}

impl ClickPmf {
    /// Click probability of detector 1.
    pub fn c1(&self) -> f64 {
        self.p10 + self.p11
    }

    /// Click probability of detector 2.
    pub fn c2(&self) -> f64 {
        self.p01 + self.p11
    }

    /// Mean click difference per pulse.
    pub fn mean_diff(&self) -> f64 {
        self.p10 - self.p01
    }

    /// Standard deviation of the click difference per pulse.
    pub fn sigma_diff(&self) -> f64 {
        let mean = self.mean_diff();
        (self.p10 + self.p01 - mean * mean).max(0.0).sqrt()
    }
}

/// Marginalizes the joint split distribution onto the four click patterns
/// of a pair of threshold detectors.
pub fn click_pmf(joint: &SplitJointDistribution) -> ClickPmf {
    let mut pmf = ClickPmf {
        p00: 0.0,
        p10: 0.0,
        p01: 0.0,
        p11: 0.0,
    };
    for (n1, n2, p) in joint.iter() {
        match (n1 > 0, n2 > 0) {
            (false, false) => pmf.p00 += p,
            (true, false) => pmf.p10 += p,
            (false, true) => pmf.p01 += p,
            (true, true) => pmf.p11 += p,
        }
    }
    pmf
}

/// First and second moments of the threshold-detector observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickStats {
    /// Click probability of detector 1.
    pub c1: f64,
    /// Click probability of detector 2.
    pub c2: f64,
    /// Total click rate `c1 + c2` (mean clicks per pulse).
    pub c_plus: f64,
    /// Mean of the click difference `d = click1 - click2`.
    pub mean_diff: f64,
    /// Standard deviation of the click difference.
    pub sigma_diff: f64,
}

/// Click statistics of the detector pair for the given joint distribution.
pub fn click_stats(joint: &SplitJointDistribution) -> ClickStats {
    let pmf = click_pmf(joint);
    ClickStats {
        c1: pmf.c1(),
        c2: pmf.c2(),
        c_plus: pmf.c1() + pmf.c2(),
        mean_diff: pmf.mean_diff(),
        sigma_diff: pmf.sigma_diff(),
    }
}

/// Moments of the photon-number difference for ideal number-resolving
/// detectors behind the same split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberResolvedStats {
    /// Mean of `n1 - n2`.
    pub mean_diff: f64,
    /// Variance of `n1 - n2`.
    pub var_diff: f64,
    /// Mean total photon number `n1 + n2`.
    pub mean_total: f64,
}

/// Exact moments of `n1 - n2` and `n1 + n2` over the joint distribution.
pub fn number_resolved_stats(joint: &SplitJointDistribution) -> NumberResolvedStats {
    let mut mean_diff = 0.0;
    let mut mean_sq = 0.0;
    let mut mean_total = 0.0;
    for (n1, n2, p) in joint.iter() {
        let d = n1 as f64 - n2 as f64;
        mean_diff += d * p;
        mean_sq += d * d * p;
        mean_total += (n1 + n2) as f64 * p;
    }
    NumberResolvedStats {
        mean_diff,
        var_diff: (mean_sq - mean_diff * mean_diff).max(0.0),
        mean_total,
    }
}

/// Post-loss photon-number distribution for `spec`, with automatic truncation.
pub fn detected_distribution(spec: &ProbeSpec) -> Result<PhotonNumberDistribution, FockError> {
    let source = probe_distribution_auto(spec)?;
    apply_loss(&source, spec.efficiency)
}

/// Joint click pattern per pulse at phase shift `delta_phi`, for the full
/// chain source → loss → split → threshold detectors.
pub fn click_pmf_at(spec: &ProbeSpec, delta_phi: f64) -> Result<ClickPmf, FockError> {
    let detected = detected_distribution(spec)?;
    let joint = polarimetric_split(&detected, delta_phi)?;
    Ok(click_pmf(&joint))
}

/// Responsivity `α` of the click difference: the small-phase slope of the
/// normalized lock-in output `⟨d⟩ / c⁺` relative to an ideal linear sampler.
///
/// At balance the slope of `⟨d⟩` with phase is `Σ_k P(k) k 2^{1-k}` over the
/// post-loss number distribution, while the total click rate is
/// `c⁺ = 2 Σ_k P(k) (1 - 2^{-k})`; their ratio is `α`. It equals 1 for
/// vanishing flux and decreases as multi-photon pulses saturate the
/// threshold detectors.
pub fn responsivity(spec: &ProbeSpec) -> Result<f64, FockError> {
    let detected = detected_distribution(spec)?;
    let mut slope = 0.0;
    let mut c_plus = 0.0;
    for (k, p) in detected.probs().iter().enumerate().skip(1) {
        let half_pow = 0.5f64.powi(k as i32);
        slope += p * k as f64 * 2.0 * half_pow;
        c_plus += p * 2.0 * (1.0 - half_pow);
    }
    if c_plus <= 0.0 {
        return Err(FockError::UndefinedResponsivity);
    }
    Ok(slope / c_plus)
}

/// Per-pulse phase sensitivity `u`, in radians per root pulse: the standard
/// deviation of the balanced observable divided by its phase slope.
///
/// For `K` averaged pulses the achievable standard error is `u / sqrt(K)`.
/// Enumerates at twice the automatic photon-number cutoff: the sensitivity
/// weights the tail by `n^2`, so the default cutoff's residual would leak
/// into the tenth digit.
pub fn per_pulse_sensitivity(spec: &ProbeSpec, mode: DetectorMode) -> Result<f64, FockError> {
    spec.validate()?;
    if spec.mean_photons == 0.0 {
        return Err(FockError::VacuumProbe);
    }
    let auto = probe_distribution_auto(spec)?;
    let deep = probe_distribution(spec, (2 * auto.n_max()).min(N_MAX_CEILING))?;
    let detected = apply_loss(&deep, spec.efficiency)?;
    let joint = polarimetric_split(&detected, 0.0)?;
    match mode {
        DetectorMode::OnOff => {
            let stats = click_stats(&joint);
            let mut slope = 0.0;
            for (k, p) in detected.probs().iter().enumerate().skip(1) {
                slope += p * k as f64 * 2.0 * 0.5f64.powi(k as i32);
            }
            if slope <= 0.0 {
                return Err(FockError::VacuumProbe);
            }
            Ok(stats.sigma_diff / slope)
        }
        DetectorMode::NumberResolved => {
            // ⟨n1 - n2⟩ = n̄ sin ΔΦ, so the slope at balance is the
            // post-loss mean photon number.
            let stats = number_resolved_stats(&joint);
            let slope = detected.mean();
            if slope <= 0.0 {
                return Err(FockError::VacuumProbe);
            }
            Ok(stats.var_diff.sqrt() / slope)
        }
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected}, got {actual} (tol {tol})"
        );
    }

    fn reference_probe() -> ProbeSpec {
        ProbeSpec::default()
    }

    #[test]
    fn squeezed_distribution_matches_enumeration_oracle() {
        let spec = ProbeSpec::squeezed(0.05, 1.0).unwrap();
        let dist = probe_distribution(&spec, 16).unwrap();
        // Frozen from a 40-digit mpmath enumeration of the thermal
        // even-number weights at mean 0.05.
        assert_close(dist.prob(0), 0.97590007294853318, 1e-15);
        assert_close(dist.prob(2), 0.023235716022584123, 1e-15);
        assert_close(dist.prob(4), 8.2984700080657583e-4, 1e-16);
        assert_eq!(dist.prob(1), 0.0);
        assert_eq!(dist.prob(3), 0.0);
        assert_close(dist.mean(), 0.05, 1e-9);
    }

    #[test]
    fn squeezed_variance_is_super_poissonian() {
        let spec = ProbeSpec::squeezed(0.05, 1.0).unwrap();
        let dist = probe_distribution(&spec, 16).unwrap();
        // Var(n) = 2 n̄ (n̄ + 1) for a squeezed vacuum.
        assert_close(dist.variance(), 2.0 * 0.05 * 1.05, 1e-9);
    }

    #[test]
    fn coherent_distribution_is_poisson() {
        let spec = ProbeSpec::coherent(0.05, 1.0).unwrap();
        let dist = probe_distribution(&spec, 16).unwrap();
        assert_close(dist.prob(0), (-0.05f64).exp(), 1e-15);
        assert_close(dist.prob(1), 0.05 * (-0.05f64).exp(), 1e-15);
        assert_close(dist.prob(2), 0.00125 * (-0.05f64).exp(), 1e-16);
        assert_close(dist.mean(), 0.05, 1e-12);
        assert_close(dist.variance(), 0.05, 1e-10);
    }

    #[test]
    fn zero_flux_is_vacuum() {
        for kind in [ProbeKind::SqueezedVacuum, ProbeKind::Coherent] {
            let dist = probe_distribution(&ProbeSpec::new(kind, 0.0, 1.0).unwrap(), 4).unwrap();
            assert_eq!(dist.prob(0), 1.0);
            assert_eq!(dist.mean(), 0.0);
        }
    }

    #[test]
    fn truncation_failure_is_reported_and_auto_recovers() {
        let spec = ProbeSpec::squeezed(5.0, 1.0).unwrap();
        match probe_distribution(&spec, 8) {
            Err(FockError::TruncationTooAggressive { n_max: 8, .. }) => {}
            other => panic!("expected truncation error, got {other:?}"),
        }
        let dist = probe_distribution_auto(&spec).unwrap();
        assert!(dist.n_max() > 8);
        assert_close(dist.mean(), 5.0, 1e-7);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(ProbeSpec::squeezed(-0.1, 0.5).is_err());
        assert!(ProbeSpec::squeezed(f64::NAN, 0.5).is_err());
        assert!(ProbeSpec::squeezed(0.05, 1.5).is_err());
        assert!(ProbeSpec::squeezed(0.05, -0.01).is_err());
    }

    #[test]
    fn loss_on_two_photon_state_is_binomial() {
        let dist = PhotonNumberDistribution::from_probs(vec![0.0, 0.0, 1.0]).unwrap();
        let lossy = apply_loss(&dist, 0.65).unwrap();
        assert_close(lossy.prob(0), 0.1225, 1e-15);
        assert_close(lossy.prob(1), 0.455, 1e-15);
        assert_close(lossy.prob(2), 0.4225, 1e-15);
    }

    #[test]
    fn loss_extremes() {
        let spec = ProbeSpec::squeezed(0.2, 1.0).unwrap();
        let dist = probe_distribution(&spec, 32).unwrap();
        let identity = apply_loss(&dist, 1.0).unwrap();
        assert_eq!(identity.probs(), dist.probs());
        let dark = apply_loss(&dist, 0.0).unwrap();
        assert_close(dark.prob(0), 1.0, 1e-12);
        assert!(apply_loss(&dist, 1.2).is_err());
    }

    #[test]
    fn split_at_quarter_pi_sends_everything_to_port_one() {
        let spec = reference_probe();
        let dist = probe_distribution_auto(&spec).unwrap();
        let joint = polarimetric_split(&dist, std::f64::consts::FRAC_PI_2).unwrap();
        let leak: f64 = joint.iter().filter(|&(_, n2, _)| n2 > 0).map(|t| t.2).sum();
        assert_close(leak, 0.0, 1e-15);
        assert_close(joint.split_prob(), 1.0, 1e-15);
    }

    #[test]
    fn split_rejects_non_finite_phase() {
        let dist = PhotonNumberDistribution::vacuum();
        assert!(polarimetric_split(&dist, f64::NAN).is_err());
        assert!(polarimetric_split(&dist, f64::INFINITY).is_err());
    }

    #[test]
    fn click_pmf_matches_enumeration_oracle_at_balance() {
        let pmf = click_pmf_at(&reference_probe(), 0.0).unwrap();
        // Frozen from the mpmath oracle: squeezed 0.05 through 65 % loss,
        // balanced split, threshold detectors.
        assert_close(pmf.p00, 0.97875896189835613, 1e-11);
        assert_close(pmf.p10, 0.0079033305751766793, 1e-12);
        assert_close(pmf.p01, 0.0079033305751766793, 1e-12);
        assert_close(pmf.p11, 0.0054343769512905135, 1e-12);
        assert_close(pmf.c1(), 0.013337707526467193, 1e-12);
    }

    #[test]
    fn click_difference_spread_matches_oracle() {
        let spec = reference_probe();
        let detected = detected_distribution(&spec).unwrap();
        let joint = polarimetric_split(&detected, 0.0).unwrap();
        let stats = click_stats(&joint);
        assert_close(stats.sigma_diff, 0.12572454474108609, 1e-11);
        assert_close(stats.mean_diff, 0.0, 1e-15);
        assert_close(stats.c_plus, 0.026675415052934385, 1e-11);
    }

    #[test]
    fn responsivity_matches_oracle_and_reference_value() {
        let alpha = responsivity(&reference_probe()).unwrap();
        assert_close(alpha, 0.78991714687002716, 1e-10);
        // The reported responsivity for this operating point is 0.790.
        assert!((alpha - 0.790).abs() < 0.001);
    }

    #[test]
    fn responsivity_of_faint_coherent_probe_approaches_one() {
        let alpha = responsivity(&ProbeSpec::coherent(1e-4, 1.0).unwrap()).unwrap();
        assert!(alpha > 0.9999);
        let alpha_half = responsivity(&ProbeSpec::coherent(0.05, 0.65).unwrap()).unwrap();
        assert_close(alpha_half, 0.9918970051114881, 1e-10);
    }

    #[test]
    fn responsivity_undefined_for_vacuum() {
        let spec = ProbeSpec::squeezed(0.0, 0.65).unwrap();
        assert!(matches!(
            responsivity(&spec),
            Err(FockError::UndefinedResponsivity)
        ));
    }

    #[test]
    fn on_off_sensitivity_matches_oracle() {
        let u_sq = per_pulse_sensitivity(&reference_probe(), DetectorMode::OnOff).unwrap();
        assert_close(u_sq, 5.9666057861842468, 1e-8);
        let u_coh = per_pulse_sensitivity(
            &ProbeSpec::coherent(0.05, 0.65).unwrap(),
            DetectorMode::OnOff,
        )
        .unwrap();
        assert_close(u_coh, 5.5696131333448364, 1e-8);
        // The squeezed probe pays ~7 % in sensitivity for its dark-port bias.
        assert_close(u_sq / u_coh, 1.0712783174225597, 1e-8);
    }

    #[test]
    fn number_resolved_sensitivity_hits_shot_limit() {
        let spec = ProbeSpec::squeezed(0.05, 1.0).unwrap();
        let u = per_pulse_sensitivity(&spec, DetectorMode::NumberResolved).unwrap();
        // Var(n1 - n2) = n̄ at balance, so u = 1/sqrt(n̄).
        assert_close(u, 1.0 / 0.05f64.sqrt(), 1e-8);
    }

    #[test]
    fn sensitivity_rejects_vacuum() {
        let spec = ProbeSpec::squeezed(0.0, 0.65).unwrap();
        assert!(matches!(
            per_pulse_sensitivity(&spec, DetectorMode::OnOff),
            Err(FockError::VacuumProbe)
        ));
    }

    #[test]
    fn number_resolved_variance_equals_mean_at_balance() {
        // The binomial split of any photon-number distribution gives
        // Var(n1 - n2) = n̄ exactly at balance.
        let spec = reference_probe();
        let detected = detected_distribution(&spec).unwrap();
        let joint = polarimetric_split(&detected, 0.0).unwrap();
        let stats = number_resolved_stats(&joint);
        assert_close(stats.var_diff, 0.05 * 0.65, 1e-10);
        assert_close(stats.mean_total, 0.05 * 0.65, 1e-10);
        assert_close(stats.mean_diff, 0.0, 1e-15);
    }

    #[test]
    fn enumerated_lockin_output_is_linear_in_phase_over_operating_range() {
        // Normalized output ⟨d⟩ / c⁺ divided by α stays within 2 % of the
        // injected phase across the sampler's working range.
        let spec = reference_probe();
        let alpha = responsivity(&spec).unwrap();
        let detected = detected_distribution(&spec).unwrap();
        for phase in [1e-4, 2e-4, 4e-4] {
            let joint = polarimetric_split(&detected, phase).unwrap();
            let stats = click_stats(&joint);
            let normalized = stats.mean_diff / stats.c_plus / alpha;
            assert!(
                (normalized / phase - 1.0).abs() < 0.02,
                "nonlinear at {phase}: {normalized}"
            );
        }
    }

    #[test]
    fn monte_carlo_agrees_with_enumerated_click_statistics() {
        let spec = reference_probe();
        let pmf = click_pmf_at(&spec, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f0c4);
        let n = 1_000_000usize;
        let mut clicks1 = 0u64;
        let mut sum_d = 0i64;
        let mut sum_d2 = 0u64;
        for _ in 0..n {
            let u: f64 = rng.gen();
            let (click1, click2) = if u < pmf.p00 {
                (false, false)
            } else if u < pmf.p00 + pmf.p10 {
                (true, false)
            } else if u < pmf.p00 + pmf.p10 + pmf.p01 {
                (false, true)
            } else {
                (true, true)
            };
            let d = i64::from(click1) - i64::from(click2);
            clicks1 += u64::from(click1);
            sum_d += d;
            sum_d2 += d.unsigned_abs();
        }
        let nf = n as f64;
        let c1_hat = clicks1 as f64 / nf;
        let mean_hat = sum_d as f64 / nf;
        let var_hat = (sum_d2 as f64 / nf - mean_hat * mean_hat) * nf / (nf - 1.0);
        let sigma_hat = var_hat.sqrt();

        let c1 = pmf.c1();
        let sigma = pmf.sigma_diff();
        let se_c1 = (c1 * (1.0 - c1) / nf).sqrt();
        // Delta-method standard error of the sample sigma of a ±1/0 variable.
        let se_sigma = ((1.0 - sigma * sigma) / nf).sqrt() / 2.0;
        assert!(
            (c1_hat - c1).abs() < 4.0 * se_c1,
            "c1 off: {c1_hat} vs {c1}"
        );
        assert!(
            (sigma_hat - sigma).abs() < 4.0 * se_sigma,
            "sigma off: {sigma_hat} vs {sigma}"
        );
    }

    proptest! {
        #[test]
        fn pipeline_preserves_normalization(
            mean in 0.0f64..0.3,
            eta in 0.0f64..=1.0,
            phase in -0.3f64..0.3,
            squeezed in any::<bool>(),
        ) {
            let kind = if squeezed { ProbeKind::SqueezedVacuum } else { ProbeKind::Coherent };
            let spec = ProbeSpec::new(kind, mean, eta).unwrap();
            let source = probe_distribution_auto(&spec).unwrap();
            prop_assert!((source.total() - 1.0).abs() < 1e-9);
            let detected = apply_loss(&source, eta).unwrap();
            prop_assert!((detected.total() - 1.0).abs() < 1e-9);
            let joint = polarimetric_split(&detected, phase).unwrap();
            prop_assert!((joint.total() - 1.0).abs() < 1e-9);
            let pmf = click_pmf(&joint);
            prop_assert!((pmf.p00 + pmf.p10 + pmf.p01 + pmf.p11 - 1.0).abs() < 1e-9);
        }

        #[test]
        fn loss_scales_mean_by_transmission(
            mean in 0.0f64..0.3,
            eta in 0.0f64..=1.0,
        ) {
            let spec = ProbeSpec::squeezed(mean, 1.0).unwrap();
            let source = probe_distribution_auto(&spec).unwrap();
            let detected = apply_loss(&source, eta).unwrap();
            prop_assert!((detected.mean() - eta * source.mean()).abs() < 1e-9);
        }

        #[test]
        fn loss_composes(
            mean in 0.0f64..0.3,
            eta1 in 0.0f64..=1.0,
            eta2 in 0.0f64..=1.0,
        ) {
            let spec = ProbeSpec::squeezed(mean, 1.0).unwrap();
            let source = probe_distribution_auto(&spec).unwrap();
            let two_step = apply_loss(&apply_loss(&source, eta1).unwrap(), eta2).unwrap();
            let one_step = apply_loss(&source, eta1 * eta2).unwrap();
            for n in 0..=source.n_max() {
                prop_assert!((two_step.prob(n) - one_step.prob(n)).abs() < 1e-12);
            }
        }

        #[test]
        fn squeezed_probe_has_even_parity(
            mean in 0.0f64..0.5,
        ) {
            let spec = ProbeSpec::squeezed(mean, 1.0).unwrap();
            let dist = probe_distribution_auto(&spec).unwrap();
            for n in (1..=dist.n_max()).step_by(2) {
                prop_assert_eq!(dist.prob(n), 0.0);
            }
        }

        #[test]
        fn split_ports_are_exchanged_under_phase_sign_flip(
            mean in 0.0f64..0.3,
            phase in 0.0f64..0.5,
        ) {
            let spec = ProbeSpec::squeezed(mean, 0.65).unwrap();
            let detected = detected_distribution(&spec).unwrap();
            let plus = polarimetric_split(&detected, phase).unwrap();
            let minus = polarimetric_split(&detected, -phase).unwrap();
            for (n1, n2, p) in plus.iter() {
                prop_assert!((p - minus.prob(n2, n1)).abs() < 1e-12);
            }
        }

        #[test]
        fn split_conserves_total_photon_number(
            mean in 0.01f64..0.3,
            phase in -0.5f64..0.5,
        ) {
            let spec = ProbeSpec::squeezed(mean, 1.0).unwrap();
            let dist = probe_distribution_auto(&spec).unwrap();
            let joint = polarimetric_split(&dist, phase).unwrap();
            for n in 0..=dist.n_max() {
                let marginal: f64 = joint
                    .iter()
                    .filter(|&(n1, n2, _)| n1 + n2 == n)
                    .map(|t| t.2)
                    .sum();
                prop_assert!((marginal - dist.prob(n)).abs() < 1e-12);
            }
        }
    }
}
