//! One module per subcommand; each exposes its clap `Args` struct and a
//! `run` function returning the shared error type.

pub mod analyze;
pub mod calibrate;
pub mod scan;
pub mod simulate;
pub mod spectrum;
pub mod stats;
