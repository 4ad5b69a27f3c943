//! Host-side companion to `trpc-core`: waveform files, scenario files,
//! JSON/CSV reports, parallel Monte Carlo and the `trpc` command bodies.

pub mod commands;
pub mod error;
pub mod montecarlo;
pub mod report;
pub mod scenario;
pub mod wavefile;

pub use error::{exit, SimError, SimResult};
