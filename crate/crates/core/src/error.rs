use thiserror::Error;

/// Errors raised by the signal models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter {
        name: &'static str,
        reason: &'static str,
    },
    /// The waveform is too short for the requested resolution bandwidth.
    #[error("insufficient record: {duration_s:e} s available, {required_s:e} s required")]
    InsufficientRecord { duration_s: f64, required_s: f64 },
    /// A closed-form law was asked to evaluate outside its validity regime.
    #[error("out of model: {0}")]
    OutOfModel(&'static str),
    /// Two waveforms that must share a time base do not.
    #[error("waveform mismatch: {0}")]
    Mismatch(&'static str),
    /// The symbol duration cannot hold the cluster plus the channel spread.
    #[error("guard violation: T_s >= N_p*T_d + tau_max fails ({symbol_duration_s:e} s < {required_s:e} s)")]
    Guard {
        symbol_duration_s: f64,
        required_s: f64,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, name: &'static str, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Parameter { name, reason })
    }
}
