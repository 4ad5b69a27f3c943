//! Closed-form power laws, FCC UWB limits, and the peak-power / amplitude
//! solvers that produce the per-mode design table.
//!
//! Notation: `P_peak` is the full-bandwidth (FBW) peak power of one
//! component pulse, `T_p` its width, `R_p` the pulse repetition frequency,
//! `R` the cluster (symbol) rate and `B_R` the analyzer resolution bandwidth.
//! When `R_p ≫ B_R` the analyzer's RBW filter integrates `R_p/B_R` pulses
//! coherently, so the measured power is `P_peak·T_p²·R_p²`, independent of
//! `B_R`. A cluster of `N_p` coherent pulses at rate `R` reads
//! `N_p²·P_peak·T_p²·R²`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{ensure, Error, Result};
use crate::spectrum::SpectrumEstimate;
use crate::trpc::{rrc_pulse, LoConfig, TxMode};
use crate::waveform::{dbm_to_watts, watts_to_dbm, SampledWaveform};

/// The closed forms hold only when the repetition rate exceeds the RBW by
/// this factor.
pub const REGIME_FACTOR: f64 = 10.0;

/// Reference resolution bandwidth of the average-power limit.
pub const AVERAGE_LIMIT_RBW_HZ: f64 = 1e6;

/// Reference bandwidth of the peak-power limit.
pub const PEAK_LIMIT_BW_HZ: f64 = 50e6;

/// A single-pulse train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseTrainPowerModel {
    p_peak: f64,
    pulse_width: f64,
    prf: f64,
}

impl PulseTrainPowerModel {
    pub fn new(p_peak: f64, pulse_width: f64, prf: f64) -> Result<Self> {
        ensure(
            p_peak > 0.0 && p_peak.is_finite(),
            "p_peak",
            "must be positive",
        )?;
        ensure(pulse_width > 0.0, "pulse_width", "must be positive")?;
        ensure(prf > 0.0, "prf", "must be positive")?;
        ensure(
            pulse_width * prf <= 1.0,
            "duty_cycle",
            "pulse width times PRF exceeds 1",
        )?;
        Ok(Self {
            p_peak,
            pulse_width,
            prf,
        })
    }

    pub fn p_peak(&self) -> f64 {
        self.p_peak
    }

    pub fn pulse_width(&self) -> f64 {
        self.pulse_width
    }

    pub fn prf(&self) -> f64 {
        self.prf
    }

    /// `δ = T_p·R_p`.
    pub fn duty_cycle(&self) -> f64 {
        self.pulse_width * self.prf
    }
}

/// `P_ave = P_peak·δ`.
pub fn duty_cycle_average(model: &PulseTrainPowerModel) -> f64 {
    model.p_peak * model.duty_cycle()
}

fn check_regime(rate: f64, rbw: f64) -> Result<()> {
    ensure(rbw > 0.0 && rbw.is_finite(), "rbw", "must be positive")?;
    if rate < REGIME_FACTOR * rbw {
        return Err(Error::OutOfModel(
            "repetition rate below 10x the resolution bandwidth",
        ));
    }
    Ok(())
}

/// Analyzer reading of a single-pulse train, `P_peak·T_p²·R_p²` watts.
pub fn measured_power_pulse_train(model: &PulseTrainPowerModel, rbw: f64) -> Result<f64> {
    check_regime(model.prf, rbw)?;
    let x = model.pulse_width * model.prf;
    Ok(model.p_peak * x * x)
}

/// Analyzer reading of a TRPC stream, `N_p²·P_peak·T_p²·R²` watts.
pub fn measured_power_trpc(
    p_peak: f64,
    pulse_width: f64,
    n_pulses: usize,
    symbol_rate: f64,
    rbw: f64,
) -> Result<f64> {
    ensure(
        p_peak >= 0.0 && p_peak.is_finite(),
        "p_peak",
        "must be non-negative",
    )?;
    ensure(pulse_width > 0.0, "pulse_width", "must be positive")?;
    ensure(n_pulses >= 1, "n_pulses", "at least one pulse")?;
    check_regime(symbol_rate, rbw)?;
    let x = n_pulses as f64 * pulse_width * symbol_rate;
    Ok(p_peak * x * x)
}

/// Which FCC rule limits a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Average,
    Peak,
}

impl Constraint {
    pub fn as_str(&self) -> &'static str {
        match self {
            Constraint::Average => "average",
            Constraint::Peak => "peak",
        }
    }
}

/// FCC UWB emission limits (in-band segment only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FccMask {
    /// Average EIRP density, dBm per MHz.
    pub average_limit_dbm_per_mhz: f64,
    /// Peak EIRP in a 50 MHz bandwidth, dBm.
    pub peak_limit_dbm: f64,
    /// Admissible resolution bandwidths, Hz.
    pub rbw_range: (f64, f64),
}

impl Default for FccMask {
    fn default() -> Self {
        Self::fcc_uwb()
    }
}

impl FccMask {
    pub const fn fcc_uwb() -> Self {
        Self {
            average_limit_dbm_per_mhz: -41.25,
            peak_limit_dbm: 0.0,
            rbw_range: (1e6, 50e6),
        }
    }

    /// Average limit for a reading taken in `rbw`, dBm.
    pub fn average_limit_dbm(&self, rbw: f64) -> f64 {
        self.average_limit_dbm_per_mhz + 10.0 * libm::log10(rbw / AVERAGE_LIMIT_RBW_HZ)
    }

    /// Peak limit scaled to `rbw`: `0 dBm + 20·log10(rbw / 50 MHz)`.
    pub fn peak_limit_dbm(&self, rbw: f64) -> f64 {
        self.peak_limit_dbm + 20.0 * libm::log10(rbw / PEAK_LIMIT_BW_HZ)
    }

    fn check_rbw(&self, rbw: f64) -> Result<()> {
        let (lo, hi) = self.rbw_range;
        // a hair of slack so 1e6 read back from text still qualifies
        ensure(
            rbw >= lo * (1.0 - 1e-9) && rbw <= hi * (1.0 + 1e-9),
            "rbw",
            "outside the FCC measurement range [1 MHz, 50 MHz]",
        )
    }
}

/// Largest permitted FBW peak power and the rule that sets it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPowerLimit {
    pub p_peak_dbm: f64,
    pub binding: Constraint,
    /// `P_peak` allowed by the average rule alone, dBm.
    pub average_branch_dbm: f64,
    /// `P_peak` allowed by the peak rule alone, dBm.
    pub peak_branch_dbm: f64,
}

/// Inverts the TRPC measured-power law against both FCC rules.
pub fn max_fbw_peak_power(mode: &TxMode, mask: &FccMask, rbw: f64) -> Result<PeakPowerLimit> {
    mask.check_rbw(rbw)?;
    let c = &mode.cluster;
    let unit = measured_power_trpc(1.0, c.pulse_width(), c.n_pulses(), c.symbol_rate(), rbw)?;
    let average = dbm_to_watts(mask.average_limit_dbm(rbw)) / unit;
    let peak = dbm_to_watts(mask.peak_limit_dbm(rbw)) / unit;
    let (p, binding) = if average <= peak {
        (average, Constraint::Average)
    } else {
        (peak, Constraint::Peak)
    };
    Ok(PeakPowerLimit {
        p_peak_dbm: watts_to_dbm(p)?,
        binding,
        average_branch_dbm: watts_to_dbm(average)?,
        peak_branch_dbm: watts_to_dbm(peak)?,
    })
}

/// FBW peak power of one carrier-modulated component pulse:
/// `∫ s²(t) / (Z·T_p) dt` over `[-T_p/2, T_p/2]` by the trapezoidal rule.
///
/// `rf_pulse` must start at `-T_p/2` and its last sample must sit at
/// `+T_p/2`, with at least 16 intervals across the window.
pub fn fbw_peak_power_of_pulse(
    rf_pulse: &SampledWaveform,
    pulse_width: f64,
    load_impedance: f64,
) -> Result<f64> {
    ensure(load_impedance > 0.0, "load_impedance", "must be positive")?;
    ensure(pulse_width > 0.0, "pulse_width", "must be positive")?;
    let v = rf_pulse.real_samples()?;
    let fs = rf_pulse.sample_rate();
    let tol = 1e-3 / fs;
    let span = (v.len() as f64 - 1.0) / fs;
    ensure(
        v.len() >= 17
            && (rf_pulse.start_time() + pulse_width / 2.0).abs() <= tol
            && (span - pulse_width).abs() <= tol,
        "rf_pulse",
        "record does not span exactly [-T_p/2, T_p/2] with 16+ intervals",
    )?;
    let mut e = 0.0;
    for k in 1..v.len() {
        e += 0.5 * (v[k - 1] * v[k - 1] + v[k] * v[k]);
    }
    Ok(e / fs / (load_impedance * pulse_width))
}

/// Samples `A_LO·g(t)·cos(ω_LO t + φ)` on `[-T_p/2, T_p/2]` at no less than
/// `sample_rate` and with at least 16 intervals.
pub fn rf_pulse_window(mode: &TxMode, lo: &LoConfig, sample_rate: f64) -> Result<SampledWaveform> {
    lo.validate()?;
    let c = &mode.cluster;
    let tp = c.pulse_width();
    let intervals = (libm::ceil(tp * sample_rate) as usize).max(16);
    let fs = intervals as f64 / tp;
    let w = 2.0 * PI * lo.frequency;
    let v = (0..=intervals)
        .map(|k| {
            let t = -tp / 2.0 + k as f64 / fs;
            lo.amplitude * rrc_pulse(c.rrc(), t) * libm::cos(w * t + lo.phase)
        })
        .collect();
    SampledWaveform::real(fs, -tp / 2.0, v)
}

/// Output amplitude `A_TX` at which the FBW peak power of one pulse equals
/// the largest value the mask permits. Power scales as `A²`, so one
/// reference evaluation at the mode's current amplitude fixes the answer.
pub fn solve_amplitude(
    mode: &TxMode,
    mask: &FccMask,
    rbw: f64,
    load_impedance: f64,
    lo: &LoConfig,
    sample_rate: f64,
) -> Result<f64> {
    let limit = dbm_to_watts(max_fbw_peak_power(mode, mask, rbw)?.p_peak_dbm);
    let reference = mode.with_cluster(mode.cluster.with_amplitude(1.0)?);
    let window = rf_pulse_window(&reference, lo, sample_rate)?;
    let unit_power = fbw_peak_power_of_pulse(&window, mode.cluster.pulse_width(), load_impedance)?;
    Ok(libm::sqrt(limit / unit_power))
}

/// One bin that breaks a rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinViolation {
    pub frequency: f64,
    pub power_dbm: f64,
    pub limit_dbm: f64,
    pub constraint: Constraint,
}

/// Outcome of a mask check. `passes` holds exactly when `worst_margin ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FccVerdict {
    pub passes: bool,
    /// Smallest `limit − reading` over all bins and both rules, dB.
    pub worst_margin: f64,
    pub worst_frequency: f64,
    pub binding_constraint: Constraint,
    pub violations: Vec<BinViolation>,
}

/// Checks every bin against the average rule (reading normalised to
/// 1 MHz) and the peak rule (limit scaled to the RBW).
pub fn check_fcc(spectrum: &SpectrumEstimate, mask: &FccMask) -> Result<FccVerdict> {
    let rbw = spectrum.rbw();
    mask.check_rbw(rbw)?;
    let avg_limit = mask.average_limit_dbm(rbw);
    let peak_limit = mask.peak_limit_dbm(rbw);
    let mut verdict = FccVerdict {
        passes: true,
        worst_margin: f64::INFINITY,
        worst_frequency: spectrum.bin_frequencies()[0],
        binding_constraint: Constraint::Average,
        violations: Vec::new(),
    };
    for (&f, &p) in spectrum.bin_frequencies().iter().zip(spectrum.bin_powers()) {
        for (limit, constraint) in [
            (avg_limit, Constraint::Average),
            (peak_limit, Constraint::Peak),
        ] {
            let margin = limit - p;
            if margin < verdict.worst_margin {
                verdict.worst_margin = margin;
                verdict.worst_frequency = f;
                verdict.binding_constraint = constraint;
            }
            if margin < 0.0 {
                verdict.violations.push(BinViolation {
                    frequency: f,
                    power_dbm: p,
                    limit_dbm: limit,
                    constraint,
                });
            }
        }
    }
    verdict.passes = verdict.worst_margin >= 0.0;
    Ok(verdict)
}
