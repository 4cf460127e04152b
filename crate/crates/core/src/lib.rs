//! Simulation and analysis of terahertz electro-optic sampling with
//! single-photon (click) detectors.
//!
//! The crate models the full measurement chain of a photon-counting
//! electro-optic sampler:
//!
//! * [`fock`] — photon-number statistics of the probe (squeezed vacuum or
//!   coherent), loss, the polarimetric split, and the click statistics of a
//!   pair of on/off detectors, all by direct enumeration over a truncated
//!   Fock space.
//! * [`tags`] — a time-tagged detection stream: deterministic simulation of
//!   click records, a compact binary codec, and windowing of records into
//!   per-modulation-period counts.
//! * [`lockin`] — the digital lock-in that turns window counts into phase
//!   estimates, including the responsivity correction and the predicted
//!   standard error.
//! * [`thz`] — the optics layer: Pockels phase shifts, single-cycle waveform
//!   synthesis, power spectra, absolute field calibration, and knife-edge
//!   beam-size fits.
//! * [`scan`] — the delay-scan driver that ties the above together into a
//!   sampled waveform measurement.

pub mod fock;
pub mod lockin;
pub mod rng;
pub mod scan;
pub mod tags;
pub mod thz;
