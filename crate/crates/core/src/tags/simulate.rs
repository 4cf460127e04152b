//! Deterministic pulse-train simulation.
//!
//! Every modulation period draws from its own counter-derived random
//! streams (see [`crate::rng`]), so the output is a pure function of
//! `(config, probe, phase_on)` and periods can be generated in parallel.
//! Two equivalent paths exist:
//!
//! * With ideal detectors (no dead time, no dark counts) the per-half click
//!   counts are drawn directly as conditional binomials from the counts
//!   substream, and the placement substream only decides which pulse slot
//!   each click lands on. [`simulate_window_counts`] takes the counts and
//!   skips placement entirely, which is why it returns exactly the same
//!   window counts as windowing a simulated stream.
//! * With dead time or dark counts enabled, every pulse slot draws its own
//!   click pattern: one uniform draw from the counts substream against the
//!   cumulative click pattern `(p00, p10, p01, p11)`, then — when dark
//!   counts are on — two uniform draws from the darks substream, one per
//!   detector, each compared against the per-pulse dark probability.
//!   Dead-time suppression runs as a final sequential pass over the merged
//!   record list: a click within the dead time of the previous *kept* click
//!   on the same detector is dropped (suppressed events do not extend the
//!   blind interval), and the blindness carries across period boundaries.
//!
//! Per half-period the counts substream is consumed in a fixed order — ON
//! half first, then OFF half. On the ideal path each half draws
//! `n11 ~ B(M, p11)`, then `n10 ~ B(M - n11, p10/(1 - p11))`, then
//! `n01 ~ B(M - n11 - n10, p01/(1 - p11 - p10))`; on the per-pulse path each
//! half draws `M` uniforms in slot order. Tests replay these contracts
//! verbatim.

use rand::distributions::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use thiserror::Error;

use crate::fock::{click_pmf_at, ClickPmf, FockError, ProbeSpec};
use crate::rng::{period_rng, SUBSTREAM_COUNTS, SUBSTREAM_DARKS, SUBSTREAM_PLACEMENT};

use super::window::WindowCounts;
use super::{AcquisitionConfig, Channel, ConfigError, TimeTagRecord};

/// Errors from stream simulation.
#[derive(Debug, Error)]
pub enum SimulateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Probe(#[from] FockError),
    #[error("modulation phase amplitude must be finite, got {0}")]
    NonFinitePhase(f64),
}

/// Click counts of one modulation half.
#[derive(Debug, Clone, Copy)]
struct HalfCounts {
    /// Pulses where both detectors clicked.
    n11: u64,
    /// Pulses where only detector 1 clicked.
    n10: u64,
    /// Pulses where only detector 2 clicked.
    n01: u64,
}

impl HalfCounts {
    fn detector1(&self) -> u64 {
        self.n11 + self.n10
    }

    fn detector2(&self) -> u64 {
        self.n11 + self.n01
    }

    fn clicked_pulses(&self) -> u64 {
        self.n11 + self.n10 + self.n01
    }
}

/// Draws a binomial count, short-circuiting the degenerate parameters.
fn draw_binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("probability validated")
        .sample(rng)
}

/// Draws the three click categories of one half as conditional binomials.
fn draw_half_counts(rng: &mut ChaCha8Rng, pulses: u64, pmf: &ClickPmf) -> HalfCounts {
    let n11 = draw_binomial(rng, pulses, pmf.p11);
    let rest = pulses - n11;
    let p10 = if pmf.p11 < 1.0 {
        pmf.p10 / (1.0 - pmf.p11)
    } else {
        0.0
    };
    let n10 = draw_binomial(rng, rest, p10);
    let rest = rest - n10;
    let tail = 1.0 - pmf.p11 - pmf.p10;
    let p01 = if tail > 0.0 { pmf.p01 / tail } else { 0.0 };
    let n01 = draw_binomial(rng, rest, p01);
    HalfCounts { n11, n10, n01 }
}

/// Pulse-grid layout of one acquisition, in picoseconds.
#[derive(Debug, Clone, Copy)]
struct Grid {
    pulses_per_half: u64,
    pulse_period_ps: u64,
    marker_spacing_ps: u64,
}

impl Grid {
    fn new(config: &AcquisitionConfig) -> Self {
        Self {
            pulses_per_half: config.pulses_per_half(),
            pulse_period_ps: config.pulse_period_ps(),
            marker_spacing_ps: config.marker_spacing_ps(),
        }
    }

    /// Timestamp of pulse `slot` within half `half_index`.
    fn slot_time(&self, half_index: u64, slot: u64) -> u64 {
        half_index * self.marker_spacing_ps + slot * self.pulse_period_ps
    }
}

/// Emits the click records of one half, given its counts, by scattering the
/// clicked pulses uniformly over the pulse slots.
fn place_half(
    rng: &mut ChaCha8Rng,
    grid: &Grid,
    half_index: u64,
    counts: &HalfCounts,
    out: &mut Vec<TimeTagRecord>,
) {
    let total = counts.clicked_pulses();
    if total == 0 {
        return;
    }
    // Floyd's algorithm: a uniform `total`-subset of the M pulse slots.
    let m = grid.pulses_per_half;
    let mut slots = Vec::with_capacity(total as usize);
    for j in (m - total)..m {
        let candidate = rng.gen_range(0..=j);
        if slots.contains(&candidate) {
            slots.push(j);
        } else {
            slots.push(candidate);
        }
    }
    slots.sort_unstable();
    // Assign categories to the chosen slots by sequential sampling without
    // replacement, so every assignment is equally likely.
    let mut remaining = *counts;
    for slot in slots {
        let left = remaining.clicked_pulses();
        let pick = rng.gen_range(0..left);
        let time = grid.slot_time(half_index, slot);
        if pick < remaining.n11 {
            remaining.n11 -= 1;
            out.push(TimeTagRecord::new(time, Channel::Detector1));
            out.push(TimeTagRecord::new(time, Channel::Detector2));
        } else if pick < remaining.n11 + remaining.n10 {
            remaining.n10 -= 1;
            out.push(TimeTagRecord::new(time, Channel::Detector1));
        } else {
            remaining.n01 -= 1;
            out.push(TimeTagRecord::new(time, Channel::Detector2));
        }
    }
}

/// Emits the click records of one half on the per-pulse path.
fn roll_half(
    counts_rng: &mut ChaCha8Rng,
    darks_rng: &mut Option<ChaCha8Rng>,
    dark_prob: f64,
    grid: &Grid,
    half_index: u64,
    pmf: &ClickPmf,
    out: &mut Vec<TimeTagRecord>,
) {
    for slot in 0..grid.pulses_per_half {
        let u: f64 = counts_rng.gen();
        let (mut click1, mut click2) = if u < pmf.p00 {
            (false, false)
        } else if u < pmf.p00 + pmf.p10 {
            (true, false)
        } else if u < pmf.p00 + pmf.p10 + pmf.p01 {
            (false, true)
        } else {
            (true, true)
        };
        if let Some(rng) = darks_rng {
            let d1 = rng.gen::<f64>() < dark_prob;
            let d2 = rng.gen::<f64>() < dark_prob;
            click1 |= d1;
            click2 |= d2;
        }
        if click1 || click2 {
            let time = grid.slot_time(half_index, slot);
            if click1 {
                out.push(TimeTagRecord::new(time, Channel::Detector1));
            }
            if click2 {
                out.push(TimeTagRecord::new(time, Channel::Detector2));
            }
        }
    }
}

/// Records of one full modulation period (its two markers plus clicks).
fn period_records(
    config: &AcquisitionConfig,
    grid: &Grid,
    pmf_on: &ClickPmf,
    pmf_off: &ClickPmf,
    period: u64,
) -> Vec<TimeTagRecord> {
    let expected = (grid.pulses_per_half as f64
        * (pmf_on.c1() + pmf_on.c2() + pmf_off.c1() + pmf_off.c2()))
    .ceil() as usize;
    let mut out = Vec::with_capacity(expected + expected / 4 + 18);
    let on_half = 2 * period;
    let off_half = 2 * period + 1;
    out.push(TimeTagRecord::new(
        grid.slot_time(on_half, 0),
        Channel::Marker,
    ));
    if config.is_ideal() {
        let mut counts_rng = period_rng(config.rng_seed, period, SUBSTREAM_COUNTS);
        let on = draw_half_counts(&mut counts_rng, grid.pulses_per_half, pmf_on);
        let off = draw_half_counts(&mut counts_rng, grid.pulses_per_half, pmf_off);
        let mut placement_rng = period_rng(config.rng_seed, period, SUBSTREAM_PLACEMENT);
        place_half(&mut placement_rng, grid, on_half, &on, &mut out);
        out.push(TimeTagRecord::new(
            grid.slot_time(off_half, 0),
            Channel::Marker,
        ));
        place_half(&mut placement_rng, grid, off_half, &off, &mut out);
    } else {
        let mut counts_rng = period_rng(config.rng_seed, period, SUBSTREAM_COUNTS);
        let mut darks_rng = (config.dark_rate_hz > 0.0)
            .then(|| period_rng(config.rng_seed, period, SUBSTREAM_DARKS));
        let dark_prob = config.dark_prob_per_pulse();
        roll_half(
            &mut counts_rng,
            &mut darks_rng,
            dark_prob,
            grid,
            on_half,
            pmf_on,
            &mut out,
        );
        // Insert the OFF marker between the halves, keeping stream order.
        let mark = TimeTagRecord::new(grid.slot_time(off_half, 0), Channel::Marker);
        let split = out.partition_point(|r| r.timestamp_ps < mark.timestamp_ps);
        out.insert(split, mark);
        roll_half(
            &mut counts_rng,
            &mut darks_rng,
            dark_prob,
            grid,
            off_half,
            pmf_off,
            &mut out,
        );
    }
    out
}

/// Drops clicks that fall within the detector dead time of the previous
/// kept click on the same channel. Markers are untouched.
fn suppress_dead_time(records: &mut Vec<TimeTagRecord>, dead_time_ps: u64) {
    if dead_time_ps == 0 {
        return;
    }
    let mut blind_until = [0u64; 2];
    records.retain(|record| {
        let detector = match record.channel {
            Channel::Detector1 => 0usize,
            Channel::Detector2 => 1usize,
            Channel::Marker => return true,
        };
        if record.timestamp_ps < blind_until[detector] {
            return false;
        }
        blind_until[detector] = record.timestamp_ps + dead_time_ps;
        true
    });
}

/// Validates inputs and derives the two per-pulse click patterns.
fn prepare(
    config: &AcquisitionConfig,
    probe: &ProbeSpec,
    phase_on: f64,
) -> Result<(Grid, ClickPmf, ClickPmf), SimulateError> {
    config.validate()?;
    if !phase_on.is_finite() {
        return Err(SimulateError::NonFinitePhase(phase_on));
    }
    let pmf_on = click_pmf_at(probe, phase_on)?;
    let pmf_off = click_pmf_at(probe, 0.0)?;
    Ok((Grid::new(config), pmf_on, pmf_off))
}

/// Simulates a complete time-tag stream: `2K + 1` markers delimiting the
/// `2K` modulation halves of `K` periods, plus the click records.
///
/// The phase shift is `phase_on` during ON halves and zero during OFF
/// halves. The trailing marker closes the final half, so the records window
/// back into exactly `K` windows.
pub fn simulate_stream(
    config: &AcquisitionConfig,
    probe: &ProbeSpec,
    phase_on: f64,
) -> Result<Vec<TimeTagRecord>, SimulateError> {
    let (grid, pmf_on, pmf_off) = prepare(config, probe, phase_on)?;
    let mut records: Vec<TimeTagRecord> = (0..config.num_periods)
        .into_par_iter()
        .map(|period| period_records(config, &grid, &pmf_on, &pmf_off, period))
        .flatten()
        .collect();
    records.push(TimeTagRecord::new(
        2 * config.num_periods * grid.marker_spacing_ps,
        Channel::Marker,
    ));
    suppress_dead_time(&mut records, config.dead_time_ps());
    Ok(records)
}

/// Simulates the per-window click counts directly, without materializing
/// records.
///
/// For ideal detectors this draws the same counts from the same random
/// streams as [`simulate_stream`], so the result is identical to windowing
/// the full stream — just without the placement work. With dead time or
/// dark counts enabled it falls back to the full stream internally.
pub fn simulate_window_counts(
    config: &AcquisitionConfig,
    probe: &ProbeSpec,
    phase_on: f64,
) -> Result<Vec<WindowCounts>, SimulateError> {
    if !config.is_ideal() {
        let records = simulate_stream(config, probe, phase_on)?;
        let (windows, _) = super::window_counts(records, config);
        return Ok(windows);
    }
    let (grid, pmf_on, pmf_off) = prepare(config, probe, phase_on)?;
    Ok((0..config.num_periods)
        .into_par_iter()
        .map(|period| {
            let mut counts_rng = period_rng(config.rng_seed, period, SUBSTREAM_COUNTS);
            let on = draw_half_counts(&mut counts_rng, grid.pulses_per_half, &pmf_on);
            let off = draw_half_counts(&mut counts_rng, grid.pulses_per_half, &pmf_off);
            WindowCounts {
                index: period,
                n1_on: on.detector1() as u32,
                n2_on: on.detector2() as u32,
                n1_off: off.detector1() as u32,
                n2_off: off.detector2() as u32,
            }
        })
        .collect())
}
