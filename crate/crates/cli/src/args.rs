//! Flag groups shared across subcommands, applied on top of the loaded
//! configuration so flags always win over the JSON document.

use clap::{Args, ValueEnum};

use qeos_core::fock::{ProbeKind, ProbeSpec};
use qeos_core::lockin::AlphaConvention;
use qeos_core::tags::AcquisitionConfig;

/// Probe-state overrides.
#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Probe state kind.
    #[arg(long, value_enum)]
    pub probe: Option<ProbeKindArg>,

    /// Mean photons per pulse at the source, before loss.
    #[arg(long, allow_hyphen_values = true)]
    pub mean_photons: Option<f64>,

    /// Combined transmission and detection efficiency, 0 to 1.
    #[arg(long, allow_hyphen_values = true)]
    pub efficiency: Option<f64>,
}

impl ProbeArgs {
    pub fn apply(&self, probe: &mut ProbeSpec) {
        if let Some(kind) = self.probe {
            probe.kind = kind.into();
        }
        if let Some(mean_photons) = self.mean_photons {
            probe.mean_photons = mean_photons;
        }
        if let Some(efficiency) = self.efficiency {
            probe.efficiency = efficiency;
        }
    }
}

/// Probe state selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeKindArg {
    /// Squeezed vacuum: thermal weights on even photon numbers.
    Squeezed,
    /// Coherent state: Poissonian photon numbers.
    Coherent,
}

impl From<ProbeKindArg> for ProbeKind {
    fn from(kind: ProbeKindArg) -> Self {
        match kind {
            ProbeKindArg::Squeezed => ProbeKind::SqueezedVacuum,
            ProbeKindArg::Coherent => ProbeKind::Coherent,
        }
    }
}

/// Acquisition-timing overrides.
#[derive(Debug, Args)]
pub struct AcquisitionArgs {
    /// Number of modulation periods (lock-in windows) to acquire.
    #[arg(long)]
    pub windows: Option<u64>,

    /// Seed of the deterministic random streams.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Laser repetition rate, Hz.
    #[arg(long)]
    pub rep_rate_hz: Option<u64>,

    /// Field-modulation frequency, Hz.
    #[arg(long)]
    pub f_mod_hz: Option<u64>,

    /// Detector dead time, s (0 disables).
    #[arg(long, allow_hyphen_values = true)]
    pub dead_time_s: Option<f64>,

    /// Dark-count rate per detector, Hz (0 disables).
    #[arg(long, allow_hyphen_values = true)]
    pub dark_rate_hz: Option<f64>,
}

impl AcquisitionArgs {
    pub fn apply(&self, acquisition: &mut AcquisitionConfig) {
        if let Some(windows) = self.windows {
            acquisition.num_periods = windows;
        }
        if let Some(seed) = self.seed {
            acquisition.rng_seed = seed;
        }
        if let Some(rep_rate_hz) = self.rep_rate_hz {
            acquisition.rep_rate_hz = rep_rate_hz;
        }
        if let Some(f_mod_hz) = self.f_mod_hz {
            acquisition.f_mod_hz = f_mod_hz;
        }
        if let Some(dead_time_s) = self.dead_time_s {
            acquisition.dead_time_s = dead_time_s;
        }
        if let Some(dark_rate_hz) = self.dark_rate_hz {
            acquisition.dark_rate_hz = dark_rate_hz;
        }
    }
}

/// Direction of the responsivity correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    /// Recorded phase = alpha x optical phase; correct by dividing.
    Divide,
    /// Optical phase = alpha x recorded phase; correct by multiplying.
    Multiply,
}

impl From<ConventionArg> for AlphaConvention {
    fn from(convention: ConventionArg) -> Self {
        match convention {
            ConventionArg::Divide => AlphaConvention::Divide,
            ConventionArg::Multiply => AlphaConvention::Multiply,
        }
    }
}
