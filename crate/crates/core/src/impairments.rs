//! Behavioural model of the I-Q transmitter front end: baseband DC offsets
//! (carrier leakage), I/Q gain and phase imbalance (finite image rejection)
//! and the variable output gain of the differential-to-single-ended stage.
//! Also the two RF metrics that quantify them, read from an emulated
//! spectrum.

use core::f64::consts::PI;

use crate::error::{ensure, Error, Result};
use crate::spectrum::SpectrumEstimate;
use crate::trpc::{check_nyquist, LoConfig};
use crate::waveform::{db, SampledWaveform};

/// Output gain range of the variable-gain stage, dB.
pub const OUTPUT_GAIN_RANGE_DB: (f64, f64) = (-12.0, 0.0);

/// Front-end impairments. Offsets in volts, gains in dB, phase in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImpairmentConfig {
    pub dc_offset_i: f64,
    pub dc_offset_q: f64,
    /// I-path gain relative to the Q path.
    pub gain_imbalance_db: f64,
    /// Deviation of the LO pair from 90° quadrature.
    pub phase_imbalance_deg: f64,
    pub output_gain_db: f64,
}

impl ImpairmentConfig {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            [
                self.dc_offset_i,
                self.dc_offset_q,
                self.gain_imbalance_db,
                self.phase_imbalance_deg,
                self.output_gain_db,
            ]
            .iter()
            .all(|x| x.is_finite()),
            "impairments",
            "all fields must be finite",
        )?;
        let (lo, hi) = OUTPUT_GAIN_RANGE_DB;
        ensure(
            (lo..=hi).contains(&self.output_gain_db),
            "output_gain_db",
            "outside [-12, 0] dB",
        )
    }

    /// `(g_i, g_q)` with `g_i/g_q = 10^(gain_imbalance/20)`, split evenly.
    pub fn rail_gains(&self) -> (f64, f64) {
        let half = libm::pow(10.0, self.gain_imbalance_db / 40.0);
        (half, 1.0 / half)
    }

    /// Root-sum-square of the two offsets.
    pub fn dc_offset_total(&self) -> f64 {
        libm::hypot(self.dc_offset_i, self.dc_offset_q)
    }

    fn output_gain(&self) -> f64 {
        libm::pow(10.0, self.output_gain_db / 20.0)
    }
}

/// Carrier leakage and SSB suppression, both in dBc (positive is better).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfMetrics {
    pub carrier_leakage: f64,
    pub ssb_suppression: f64,
}

/// `i' = g_i·i + d_i`, `q' = g_q·q + d_q`.
pub fn apply_tx_impairments(
    i: &SampledWaveform,
    q: &SampledWaveform,
    cfg: &ImpairmentConfig,
) -> Result<(SampledWaveform, SampledWaveform)> {
    cfg.validate()?;
    i.check_aligned(q).map_err(|_| Error::Parameter {
        name: "i/q",
        reason: "rails are not aligned",
    })?;
    let (gi, gq) = cfg.rail_gains();
    let map = |w: &SampledWaveform, g: f64, d: f64| -> Result<SampledWaveform> {
        let v = w.real_samples()?.iter().map(|x| g * x + d).collect();
        SampledWaveform::real(w.sample_rate(), w.start_time(), v)
    };
    Ok((map(i, gi, cfg.dc_offset_i)?, map(q, gq, cfg.dc_offset_q)?))
}

/// `G·A_LO·[i'·cos(ωt + φ) − q'·sin(ωt + φ + φ_err)]`.
pub fn upconvert_impaired(
    i: &SampledWaveform,
    q: &SampledWaveform,
    lo: &LoConfig,
    cfg: &ImpairmentConfig,
) -> Result<SampledWaveform> {
    let (ip, qp) = apply_tx_impairments(i, q, cfg)?;
    check_nyquist(&ip, lo)?;
    let (iv, qv) = (ip.real_samples()?, qp.real_samples()?);
    let w = 2.0 * PI * lo.frequency;
    let err = cfg.phase_imbalance_deg.to_radians();
    let g = lo.amplitude * cfg.output_gain();
    let out = iv
        .iter()
        .zip(qv)
        .enumerate()
        .map(|(k, (&a, &b))| {
            let ph = w * ip.time_at(k) + lo.phase;
            g * (a * libm::cos(ph) - b * libm::sin(ph + err))
        })
        .collect();
    SampledWaveform::real(i.sample_rate(), i.start_time(), out)
}

fn tone_near(spectrum: &SpectrumEstimate, f: f64, what: &'static str) -> Result<f64> {
    let (lo, hi) = spectrum.frequency_range();
    if f < lo || f > hi {
        return Err(Error::Parameter {
            name: what,
            reason: "frequency outside the spectrum",
        });
    }
    let rbw = spectrum.rbw();
    spectrum
        .peak_in(f - rbw, f + rbw)
        .map(|(_, p)| p)
        .ok_or(Error::Parameter {
            name: what,
            reason: "no bin near the requested frequency",
        })
}

/// Integrated desired-signal power over `signal_band` (bins within
/// `2·RBW` of the carrier excluded) minus the carrier tone power, dB.
pub fn measure_carrier_leakage(
    spectrum: &SpectrumEstimate,
    f_lo: f64,
    signal_band: (f64, f64),
) -> Result<f64> {
    ensure(
        signal_band.1 > signal_band.0,
        "signal_band",
        "must be nonempty",
    )?;
    let carrier = tone_near(spectrum, f_lo, "f_lo")?;
    let guard = 2.0 * spectrum.rbw();
    let desired_w =
        spectrum.integrate_band_w(signal_band.0, signal_band.1, |f| (f - f_lo).abs() < guard);
    ensure(
        desired_w > 0.0,
        "signal_band",
        "no signal power in the band",
    )?;
    Ok(db(desired_w * 1e3) - carrier)
}

/// Desired sideband (`f_lo − f_m`) minus image sideband (`f_lo + f_m`), dB.
pub fn measure_ssb_suppression(spectrum: &SpectrumEstimate, f_lo: f64, f_m: f64) -> Result<f64> {
    ensure(f_m > 0.0, "f_m", "must be positive")?;
    let desired = tone_near(spectrum, f_lo - f_m, "desired sideband")?;
    let image = tone_near(spectrum, f_lo + f_m, "image sideband")?;
    Ok(desired - image)
}

/// Image rejection ratio `(1 + 2k·cosφ + k²)/(1 − 2k·cosφ + k²)` in dB, with
/// `k` the I/Q amplitude ratio.
pub fn image_rejection_db(gain_imbalance_db: f64, phase_imbalance_deg: f64) -> f64 {
    let k = libm::pow(10.0, -gain_imbalance_db / 20.0);
    let c = libm::cos(phase_imbalance_deg.to_radians());
    db((1.0 + 2.0 * k * c + k * k) / (1.0 - 2.0 * k * c + k * k))
}

/// Gain imbalance (phase 0) whose image rejection equals `target_dbc`.
pub fn gain_imbalance_for_ssb(target_dbc: f64) -> Result<f64> {
    ensure(target_dbc > 0.0, "target_dbc", "must be positive")?;
    let r = libm::pow(10.0, target_dbc / 20.0);
    Ok(-20.0 * libm::log10((r - 1.0) / (r + 1.0)))
}

/// Phase imbalance (gain 0) whose image rejection equals `target_dbc`.
pub fn phase_imbalance_for_ssb(target_dbc: f64) -> Result<f64> {
    ensure(target_dbc > 0.0, "target_dbc", "must be positive")?;
    Ok((2.0 * libm::atan(libm::pow(10.0, -target_dbc / 20.0))).to_degrees())
}

/// Root-sum-square DC offset whose carrier sits `target_dbc` below a desired
/// signal of power `desired_power_w` at the RF port. The leaked carrier has
/// amplitude `A_LO·G·d_total`.
pub fn dc_offset_for_leakage(
    target_dbc: f64,
    desired_power_w: f64,
    lo: &LoConfig,
    load_impedance: f64,
    output_gain_db: f64,
) -> Result<f64> {
    ensure(desired_power_w > 0.0, "desired_power_w", "must be positive")?;
    ensure(load_impedance > 0.0, "load_impedance", "must be positive")?;
    let carrier_w = desired_power_w * libm::pow(10.0, -target_dbc / 10.0);
    let amplitude = libm::sqrt(2.0 * load_impedance * carrier_w);
    Ok(amplitude / (lo.amplitude.abs() * libm::pow(10.0, output_gain_db / 20.0)))
}
