//! Folds a time-tag stream into per-modulation-period window counts.
//!
//! Markers tick at twice the modulation frequency; marker `2p` opens the ON
//! half of period `p` and marker `2p + 1` its OFF half, and each half is
//! closed by the next marker. A click belongs to the most recently opened
//! half — stream order decides, so a click sharing its timestamp with a
//! marker lands in the half that marker opened.
//!
//! The windower is deliberately forgiving about damaged streams: it emits
//! counts only for periods whose two halves were both cleanly delimited by
//! adjacent markers and tallies everything else in [`WindowDiagnostics`].
//! A missing marker merges two halves, so the period that lost its inner
//! boundary is skipped (one skipped window); a missing period boundary
//! corrupts the periods on both sides (two skipped windows). Markers that
//! fall off the half-period grid are counted separately and poison the half
//! they interrupt. Clicks outside any open half are orphans.

use serde::{Deserialize, Serialize};

use super::{AcquisitionConfig, Channel, TimeTagRecord};

/// Click counts of one modulation period, split by half and detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCounts {
    /// Zero-based period index within the acquisition.
    pub index: u64,
    /// Detector-1 clicks during the ON half.
    pub n1_on: u32,
    /// Detector-2 clicks during the ON half.
    pub n2_on: u32,
    /// Detector-1 clicks during the OFF half.
    pub n1_off: u32,
    /// Detector-2 clicks during the OFF half.
    pub n2_off: u32,
}

impl WindowCounts {
    /// Total clicks during the ON half.
    pub fn total_on(&self) -> u32 {
        self.n1_on + self.n2_on
    }

    /// Total clicks during the OFF half.
    pub fn total_off(&self) -> u32 {
        self.n1_off + self.n2_off
    }
}

/// Bookkeeping of everything the windower could not assign to a window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowDiagnostics {
    /// Periods inside the marker-covered range that produced no window.
    pub skipped_windows: u64,
    /// Click records outside any open half.
    pub orphan_records: u64,
    /// Markers whose timestamp is off the half-period grid.
    pub misaligned_markers: u64,
}

/// Counts accumulated for one open half.
#[derive(Debug, Clone, Copy)]
struct OpenHalf {
    marker_index: u64,
    n1: u32,
    n2: u32,
}

/// Streaming window builder; feed records in stream order via
/// [`Windower::push`], then call [`Windower::finish`].
pub struct Windower {
    marker_spacing_ps: u64,
    current: Option<OpenHalf>,
    /// Completed ON half waiting for its OFF twin: `(period, n1, n2)`.
    pending_on: Option<(u64, u32, u32)>,
    /// Range of aligned marker indices seen, as `(min, max)`.
    marker_range: Option<(u64, u64)>,
    windows: Vec<WindowCounts>,
    diagnostics: WindowDiagnostics,
}

impl Windower {
    pub fn new(config: &AcquisitionConfig) -> Self {
        Self {
            marker_spacing_ps: config.marker_spacing_ps(),
            current: None,
            pending_on: None,
            marker_range: None,
            windows: Vec::new(),
            diagnostics: WindowDiagnostics::default(),
        }
    }

    pub fn push(&mut self, record: TimeTagRecord) {
        match record.channel {
            Channel::Marker => self.push_marker(record.timestamp_ps),
            Channel::Detector1 => match &mut self.current {
                Some(half) => half.n1 += 1,
                None => self.diagnostics.orphan_records += 1,
            },
            Channel::Detector2 => match &mut self.current {
                Some(half) => half.n2 += 1,
                None => self.diagnostics.orphan_records += 1,
            },
        }
    }

    fn push_marker(&mut self, timestamp_ps: u64) {
        if !timestamp_ps.is_multiple_of(self.marker_spacing_ps) {
            // An off-grid marker leaves the extent of the open half
            // unknowable, so the half is poisoned and nothing reopens
            // until the next aligned marker.
            self.diagnostics.misaligned_markers += 1;
            self.current = None;
            return;
        }
        let index = timestamp_ps / self.marker_spacing_ps;
        if let Some(half) = self.current.take() {
            if half.marker_index + 1 == index {
                self.close_half(half);
            }
            // A non-adjacent marker means at least one boundary went
            // missing; the open half's clicks span an unknown stretch, so
            // it is dropped and shows up in `skipped_windows` at the end.
        }
        self.current = Some(OpenHalf {
            marker_index: index,
            n1: 0,
            n2: 0,
        });
        self.marker_range = Some(match self.marker_range {
            None => (index, index),
            Some((lo, hi)) => (lo.min(index), hi.max(index)),
        });
    }

    fn close_half(&mut self, half: OpenHalf) {
        if half.marker_index.is_multiple_of(2) {
            self.pending_on = Some((half.marker_index / 2, half.n1, half.n2));
        } else {
            let period = (half.marker_index - 1) / 2;
            if let Some((pending_period, n1_on, n2_on)) = self.pending_on.take() {
                if pending_period == period {
                    self.windows.push(WindowCounts {
                        index: period,
                        n1_on,
                        n2_on,
                        n1_off: half.n1,
                        n2_off: half.n2,
                    });
                }
            }
        }
    }

    /// Closes the stream and returns the windows with diagnostics. The
    /// trailing half (opened by the final marker) is discarded by design.
    pub fn finish(mut self) -> (Vec<WindowCounts>, WindowDiagnostics) {
        if let Some((lo, hi)) = self.marker_range {
            // Periods fully covered by the marker range: 2p >= lo and
            // 2p + 2 <= hi.
            let first = lo.div_ceil(2);
            if hi >= 2 {
                let last = (hi - 2) / 2;
                if last >= first {
                    let expected = last - first + 1;
                    self.diagnostics.skipped_windows =
                        expected.saturating_sub(self.windows.len() as u64);
                }
            }
        }
        (self.windows, self.diagnostics)
    }
}

/// Folds an ordered record sequence into window counts.
pub fn window_counts(
    records: impl IntoIterator<Item = TimeTagRecord>,
    config: &AcquisitionConfig,
) -> (Vec<WindowCounts>, WindowDiagnostics) {
    let mut windower = Windower::new(config);
    for record in records {
        windower.push(record);
    }
    windower.finish()
}
