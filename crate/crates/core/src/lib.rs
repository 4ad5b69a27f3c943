//! Transmitted reference pulse cluster (TRPC) ultra-wideband signal models.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the whole physical
//! layer of a TRPC transmitter and its autocorrelation receiver:
//!
//! * [`waveform`]: sampled signals, power/dBm conversions.
//! * [`spectrum`]: spectrum-analyzer emulation with an explicit resolution
//!   bandwidth (Welch periodogram calibrated to the RBW).
//! * [`trpc`]: root raised cosine component pulses, cluster and frame
//!   synthesis, the built-in transmission modes, ideal I-Q up-conversion.
//! * [`compliance`]: closed-form measured-power laws, FCC UWB limits, the
//!   peak-power and amplitude solvers.
//! * [`impairments`]: behavioural model of the I-Q front end (DC offset,
//!   gain/phase imbalance, output gain) and the RF metrics it produces.
//! * [`link`]: multipath/AWGN channel, I-Q demodulator, lag-`T_d`
//!   autocorrelation detector, Monte Carlo SER and energy per pulse.
//!
//! Everything is a pure function of its inputs; no global state.

#![no_std]

extern crate alloc;

pub mod compliance;
mod error;
mod fft;
pub mod filter;
pub mod impairments;
pub mod link;
pub mod spectrum;
pub mod trpc;
pub mod waveform;

pub use error::{Error, Result};
pub use spectrum::{psd_estimate, SpectrumEstimate};
pub use waveform::{SampledWaveform, Samples};
