//! TRPC signal synthesis: root raised cosine component pulses, pulse
//! clusters, frames, the built-in transmission modes and ideal I-Q
//! up-conversion.
//!
//! A symbol is a cluster of `N_p` reference/data doublets. Doublet `i` puts a
//! reference pulse at `c0 + 2i·T_d` and a data pulse at `c0 + (2i+1)·T_d`.
//! Reference pulses are always positive; data pulses carry `+1` for bit 1 and
//! `-1` for bit 0, so a "1" cluster is all positive and a "0" cluster
//! alternates `+,-,+,-,…`. The first centre `c0` equals the pulse truncation
//! half-width, so an isolated cluster starts at `t = 0`.
//!
//! The component pulse is an RRC pulse with period `T = T_p/2`: its main lobe
//! spans `T_p` (the window over which FBW peak power is integrated) and its
//! one-sided 3 dB bandwidth is `1/T_p`. It is truncated to `±2·T_p` and
//! scaled so its peak equals the cluster amplitude `A_TX`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{ensure, Error, Result};
use crate::waveform::SampledWaveform;

/// Roll-off used by every built-in mode.
pub const ROLL_OFF: f64 = 0.25;

/// Minimum samples across one pulse width `T_p`.
pub const MIN_SAMPLES_PER_PULSE: f64 = 16.0;

/// Root raised cosine pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrcParams {
    period: f64,
    beta: f64,
    truncation: f64,
    normalization: f64,
}

impl RrcParams {
    pub fn new(period: f64, beta: f64, truncation: f64, normalization: f64) -> Result<Self> {
        ensure(
            period > 0.0 && period.is_finite(),
            "period",
            "must be positive",
        )?;
        ensure(beta > 0.0 && beta < 1.0, "beta", "must lie in (0, 1)")?;
        ensure(
            truncation > 0.0 && truncation.is_finite(),
            "truncation",
            "must be positive",
        )?;
        ensure(normalization.is_finite(), "normalization", "must be finite")?;
        Ok(Self {
            period,
            beta,
            truncation,
            normalization,
        })
    }

    /// Pulse whose main lobe spans `pulse_width`: `T = T_p/2`, support `±2·T_p`.
    pub fn for_pulse_width(pulse_width: f64, amplitude: f64) -> Result<Self> {
        Self::new(pulse_width / 2.0, ROLL_OFF, 2.0 * pulse_width, amplitude)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn with_normalization(self, normalization: f64) -> Self {
        Self {
            normalization,
            ..self
        }
    }
}

/// Unscaled RRC kernel, `t` in units of the period.
fn rrc_kernel(x: f64, beta: f64) -> f64 {
    let x0 = 1.0 / (4.0 * beta);
    if x == 0.0 {
        return 1.0 + (1.0 - beta) * PI / (4.0 * beta);
    }
    if (libm::fabs(x) - x0).abs() <= 1e-9 * x0 {
        // removable singularity at |t| = T/(4β)
        let a = PI / (4.0 * beta);
        return PI / (4.0 * libm::sqrt(2.0))
            * ((1.0 + 2.0 / PI) * libm::sin(a) + (1.0 - 2.0 / PI) * libm::cos(a));
    }
    let num =
        libm::cos((1.0 + beta) * PI * x) + libm::sin((1.0 - beta) * PI * x) / (4.0 * beta * x);
    num / (1.0 - (4.0 * beta * x) * (4.0 * beta * x))
}

/// Evaluates the peak-normalised RRC pulse at time `t` (seconds); zero
/// outside the truncation window.
pub fn rrc_pulse(params: &RrcParams, t: f64) -> f64 {
    if libm::fabs(t) > params.truncation * (1.0 + 1e-9) {
        return 0.0;
    }
    let peak = rrc_kernel(0.0, params.beta);
    params.normalization * rrc_kernel(t / params.period, params.beta) / peak
}

/// Signalling parameters of one TRPC mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSpec {
    n_pulses: usize,
    pulse_width: f64,
    pulse_delay: f64,
    symbol_duration: f64,
    rrc: RrcParams,
}

impl ClusterSpec {
    /// `n_pulses` doublets of width `pulse_width` spaced `pulse_delay`,
    /// repeated every `1/symbol_rate`, with peak amplitude `amplitude` volts.
    pub fn new(
        n_pulses: usize,
        pulse_width: f64,
        pulse_delay: f64,
        symbol_rate: f64,
        amplitude: f64,
    ) -> Result<Self> {
        ensure(n_pulses >= 1, "n_pulses", "at least one doublet")?;
        ensure(
            pulse_width > 0.0 && pulse_width.is_finite(),
            "pulse_width",
            "must be positive",
        )?;
        ensure(
            pulse_delay >= pulse_width && pulse_delay.is_finite(),
            "pulse_delay",
            "must be at least the pulse width",
        )?;
        ensure(
            symbol_rate > 0.0 && symbol_rate.is_finite(),
            "symbol_rate",
            "must be positive",
        )?;
        ensure(
            amplitude >= 0.0 && amplitude.is_finite(),
            "amplitude",
            "must be non-negative",
        )?;
        Ok(Self {
            n_pulses,
            pulse_width,
            pulse_delay,
            symbol_duration: 1.0 / symbol_rate,
            rrc: RrcParams::for_pulse_width(pulse_width, amplitude)?,
        })
    }

    pub fn n_pulses(&self) -> usize {
        self.n_pulses
    }

    pub fn pulse_width(&self) -> f64 {
        self.pulse_width
    }

    pub fn pulse_delay(&self) -> f64 {
        self.pulse_delay
    }

    pub fn symbol_duration(&self) -> f64 {
        self.symbol_duration
    }

    pub fn symbol_rate(&self) -> f64 {
        1.0 / self.symbol_duration
    }

    pub fn amplitude(&self) -> f64 {
        self.rrc.normalization()
    }

    pub fn rrc(&self) -> &RrcParams {
        &self.rrc
    }

    pub fn with_amplitude(self, amplitude: f64) -> Result<Self> {
        ensure(
            amplitude >= 0.0 && amplitude.is_finite(),
            "amplitude",
            "must be non-negative",
        )?;
        Ok(Self {
            rrc: self.rrc.with_normalization(amplitude),
            ..self
        })
    }

    pub fn with_n_pulses(self, n_pulses: usize) -> Result<Self> {
        Self::new(
            n_pulses,
            self.pulse_width,
            self.pulse_delay,
            self.symbol_rate(),
            self.amplitude(),
        )
    }

    /// Replaces the pulse shape (e.g. another period or truncation).
    pub fn with_rrc(self, rrc: RrcParams) -> Self {
        Self { rrc, ..self }
    }

    /// Total pulses emitted per symbol (`2·N_p`).
    pub fn pulses_per_symbol(&self) -> usize {
        2 * self.n_pulses
    }

    /// Centre of the first (reference) pulse relative to the symbol start.
    pub fn first_pulse_center(&self) -> f64 {
        self.rrc.truncation()
    }

    /// Centre of pulse `j` (even = reference, odd = data) in its symbol.
    pub fn pulse_center(&self, j: usize) -> f64 {
        self.first_pulse_center() + j as f64 * self.pulse_delay
    }

    /// Time from the start of the first pulse support to the end of the last.
    pub fn cluster_extent(&self) -> f64 {
        2.0 * self.rrc.truncation() + (self.pulses_per_symbol() - 1) as f64 * self.pulse_delay
    }

    /// Energy of one isolated symbol into `load_impedance`, in joules,
    /// averaged over the two bit values. Tail overlap between neighbouring
    /// pulses is included.
    pub fn energy_per_bit(&self, load_impedance: f64) -> Result<f64> {
        ensure(load_impedance > 0.0, "load_impedance", "must be positive")?;
        let e = 0.5 * (cluster_energy_integral(self, true) + cluster_energy_integral(self, false));
        Ok(e / load_impedance)
    }

    pub(crate) fn check_rate(&self, sample_rate: f64) -> Result<()> {
        ensure(
            sample_rate.is_finite() && sample_rate * self.pulse_width >= MIN_SAMPLES_PER_PULSE,
            "sample_rate",
            "fewer than 16 samples per pulse width",
        )
    }
}

/// `∫ s(t)² dt` of an isolated cluster by composite Simpson, 256 nodes per
/// pulse width.
fn cluster_energy_integral(spec: &ClusterSpec, bit: bool) -> f64 {
    let extent = spec.cluster_extent();
    let n = 2 * libm::ceil(128.0 * extent / spec.pulse_width()) as usize;
    let h = extent / n as f64;
    let rrc = spec.rrc();
    let value = |t: f64| -> f64 {
        (0..spec.pulses_per_symbol())
            .map(|j| polarity(j, bit) * rrc_pulse(rrc, t - spec.pulse_center(j)))
            .sum()
    };
    let mut s = 0.0;
    for k in 0..=n {
        let v = value(k as f64 * h);
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += w * v * v;
    }
    s * h / 3.0
}

/// One row of the built-in mode registry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxMode {
    pub name: &'static str,
    /// Bits per second (one bit per cluster).
    pub data_rate: f64,
    pub cluster: ClusterSpec,
    /// Nominal baseband 3 dB bandwidth, Hz.
    pub bw_3db: f64,
    /// Published FBW peak power of the component pulse, dBm.
    pub p_peak_rrc_dbm: f64,
    /// Published maximum output amplitude, V.
    pub max_amplitude: f64,
}

/// (name, Mbps, N_p, T_p ns, BW MHz, P_peak dBm, amplitude mV)
const MODE_TABLE: [(&str, f64, usize, f64, f64, f64, f64); 7] = [
    ("r10", 10.0, 8, 1.65, 650.0, -23.47, 32.8),
    ("r20", 20.0, 8, 1.65, 650.0, -29.47, 16.4),
    ("r40", 40.0, 8, 0.85, 1180.0, -29.47, 16.4),
    ("r100", 100.0, 4, 0.85, 1180.0, -31.93, 12.36),
    ("r200", 200.0, 4, 0.85, 1180.0, -37.9, 6.21),
    ("r250", 250.0, 3, 0.85, 1180.0, -37.3, 6.63),
    ("r300", 300.0, 2, 0.85, 1180.0, -35.4, 8.28),
];

impl TxMode {
    /// Names of the built-in presets, slowest first.
    pub const NAMES: [&'static str; 7] = ["r10", "r20", "r40", "r100", "r200", "r250", "r300"];

    /// All seven built-in modes. Cluster amplitude defaults to the published
    /// maximum amplitude; `T_d = T_p`.
    pub fn all() -> Vec<TxMode> {
        MODE_TABLE.iter().map(Self::from_row).collect()
    }

    pub fn preset(name: &str) -> Option<TxMode> {
        MODE_TABLE
            .iter()
            .find(|row| row.0.eq_ignore_ascii_case(name))
            .map(Self::from_row)
    }

    fn from_row(row: &(&'static str, f64, usize, f64, f64, f64, f64)) -> TxMode {
        let &(name, mbps, n_p, tp_ns, bw_mhz, p_dbm, amp_mv) = row;
        let tp = tp_ns * 1e-9;
        TxMode {
            name,
            data_rate: mbps * 1e6,
            cluster: ClusterSpec::new(n_p, tp, tp, mbps * 1e6, amp_mv * 1e-3)
                .expect("registry rows are valid"),
            bw_3db: bw_mhz * 1e6,
            p_peak_rrc_dbm: p_dbm,
            max_amplitude: amp_mv * 1e-3,
        }
    }

    /// A custom mode; the published-value fields are copied from the cluster.
    pub fn custom(name: &'static str, cluster: ClusterSpec) -> TxMode {
        TxMode {
            name,
            data_rate: cluster.symbol_rate(),
            cluster,
            bw_3db: 1.0 / cluster.pulse_width(),
            p_peak_rrc_dbm: f64::NAN,
            max_amplitude: cluster.amplitude(),
        }
    }

    pub fn with_cluster(self, cluster: ClusterSpec) -> TxMode {
        TxMode { cluster, ..self }
    }
}

/// Local oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoConfig {
    pub frequency: f64,
    pub phase: f64,
    pub amplitude: f64,
}

impl LoConfig {
    /// Unit-amplitude, zero-phase LO.
    pub fn new(frequency: f64) -> Result<Self> {
        let lo = Self {
            frequency,
            phase: 0.0,
            amplitude: 1.0,
        };
        lo.validate()?;
        Ok(lo)
    }

    pub fn with_phase(self, phase: f64) -> Self {
        Self { phase, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.frequency > 0.0 && self.frequency.is_finite(),
            "lo.frequency",
            "must be positive",
        )?;
        ensure(
            self.phase.is_finite() && self.amplitude.is_finite(),
            "lo",
            "phase and amplitude must be finite",
        )
    }
}

fn polarity(j: usize, bit: bool) -> f64 {
    if j % 2 == 0 || bit {
        1.0
    } else {
        -1.0
    }
}

/// Adds every pulse of a cluster starting at `t0`, wrapping indices modulo
/// the buffer length when `wrap` is set.
fn add_cluster(out: &mut [f64], spec: &ClusterSpec, bit: bool, t0: f64, fs: f64, wrap: bool) {
    let rrc = spec.rrc();
    let half = rrc.truncation();
    let n = out.len() as i64;
    for j in 0..spec.pulses_per_symbol() {
        let c = t0 + spec.pulse_center(j);
        let sign = polarity(j, bit);
        let k0 = libm::ceil((c - half) * fs - 1e-6) as i64;
        let k1 = libm::floor((c + half) * fs + 1e-6) as i64;
        for k in k0..=k1 {
            let idx = if wrap {
                k.rem_euclid(n)
            } else if (0..n).contains(&k) {
                k
            } else {
                continue;
            };
            out[idx as usize] += sign * rrc_pulse(rrc, k as f64 / fs - c);
        }
    }
}

/// One isolated cluster for `bit`, sampled at `sample_rate` from the symbol
/// start. The record covers `max(T_s, cluster extent)` so no pulse is cut.
pub fn synth_cluster(spec: &ClusterSpec, bit: bool, sample_rate: f64) -> Result<SampledWaveform> {
    spec.check_rate(sample_rate)?;
    let n_symbol = libm::round(spec.symbol_duration() * sample_rate) as usize;
    let n_extent = libm::floor(spec.cluster_extent() * sample_rate) as usize + 1;
    let mut out = vec![0.0; n_symbol.max(n_extent)];
    add_cluster(&mut out, spec, bit, 0.0, sample_rate, false);
    SampledWaveform::real(sample_rate, 0.0, out)
}

/// Clusters for `bits` at spacing `T_s`. The frame lasts `len(bits)·T_s`
/// and is one period of the repeating bit pattern: a cluster tail that runs
/// past the end wraps to the start.
pub fn synth_frame(bits: &[bool], spec: &ClusterSpec, sample_rate: f64) -> Result<SampledWaveform> {
    ensure(!bits.is_empty(), "bits", "at least one bit required")?;
    spec.check_rate(sample_rate)?;
    let n = libm::round(bits.len() as f64 * spec.symbol_duration() * sample_rate) as usize;
    let mut out = vec![0.0; n];
    for (m, &bit) in bits.iter().enumerate() {
        add_cluster(
            &mut out,
            spec,
            bit,
            m as f64 * spec.symbol_duration(),
            sample_rate,
            true,
        );
    }
    SampledWaveform::real(sample_rate, 0.0, out)
}

/// A single component pulse over its full support, centred on `t = 0`.
pub fn component_pulse(spec: &ClusterSpec, sample_rate: f64) -> Result<SampledWaveform> {
    spec.check_rate(sample_rate)?;
    let half = spec.rrc().truncation();
    let k0 = libm::ceil(-half * sample_rate) as i64;
    let k1 = libm::floor(half * sample_rate) as i64;
    let v = (k0..=k1)
        .map(|k| rrc_pulse(spec.rrc(), k as f64 / sample_rate))
        .collect();
    SampledWaveform::real(sample_rate, k0 as f64 / sample_rate, v)
}

/// How the baseband pulse train is applied to the modulator rails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IqDrive {
    /// `i = s(t)`, `q = 0`: the RF output is `A·g(t)·cos(ω t)`.
    InPhase,
    /// The same train on both rails, each scaled by `1/√2`, so the RF
    /// envelope amplitude still equals the cluster amplitude.
    #[default]
    Identical,
}

/// Splits a baseband frame into modulator rails.
pub fn drive_rails(
    baseband: &SampledWaveform,
    drive: IqDrive,
) -> Result<(SampledWaveform, SampledWaveform)> {
    match drive {
        IqDrive::InPhase => Ok((baseband.clone(), baseband.scaled(0.0)?)),
        IqDrive::Identical => {
            let s = baseband.scaled(core::f64::consts::FRAC_1_SQRT_2)?;
            Ok((s.clone(), s))
        }
    }
}

pub(crate) fn check_nyquist(wave: &SampledWaveform, lo: &LoConfig) -> Result<()> {
    lo.validate()?;
    if lo.frequency >= wave.sample_rate() / 2.0 {
        return Err(Error::Parameter {
            name: "lo.frequency",
            reason: "carrier at or above the Nyquist frequency",
        });
    }
    Ok(())
}

/// Ideal quadrature modulator: `A_LO·[i(t)·cos(ω t + φ) − q(t)·sin(ω t + φ)]`.
pub fn upconvert_iq(
    i: &SampledWaveform,
    q: &SampledWaveform,
    lo: &LoConfig,
) -> Result<SampledWaveform> {
    i.check_aligned(q)?;
    check_nyquist(i, lo)?;
    let (iv, qv) = (i.real_samples()?, q.real_samples()?);
    let w = 2.0 * PI * lo.frequency;
    let out = iv
        .iter()
        .zip(qv)
        .enumerate()
        .map(|(k, (&a, &b))| {
            let ph = w * i.time_at(k) + lo.phase;
            lo.amplitude * (a * libm::cos(ph) - b * libm::sin(ph))
        })
        .collect();
    SampledWaveform::real(i.sample_rate(), i.start_time(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{bandwidth_3db, psd_estimate};
    use crate::waveform::waveform_power;
    use proptest::prelude::*;

    fn spec_r10() -> ClusterSpec {
        TxMode::preset("r10").unwrap().cluster
    }

    #[test]
    fn peak_is_normalization() {
        let p = RrcParams::new(1e-9, 0.25, 4e-9, 1.0).unwrap();
        assert_eq!(rrc_pulse(&p, 0.0), 1.0);
        let p = p.with_normalization(0.0328);
        assert_eq!(rrc_pulse(&p, 0.0), 0.0328);
        assert_eq!(rrc_pulse(&p, 4.1e-9), 0.0);
    }

    #[test]
    fn singular_point_matches_two_sided_limit() {
        // Richardson extrapolation of the symmetric average g(x0 ± ε).
        let p = RrcParams::new(1.0, 0.25, 10.0, 1.0).unwrap();
        let x0 = 1.0;
        let avg = |e: f64| 0.5 * (rrc_pulse(&p, x0 + e) + rrc_pulse(&p, x0 - e));
        let (e, ratio) = (1e-3, 2.0);
        let a1 = avg(e);
        let a2 = avg(e / ratio);
        let limit = (ratio * ratio * a2 - a1) / (ratio * ratio - 1.0);
        let at = rrc_pulse(&p, x0);
        assert!(((at - limit) / limit).abs() < 1e-9, "{at} vs {limit}");
        // same for another roll-off
        let p = RrcParams::new(1.0, 0.35, 10.0, 1.0).unwrap();
        let x0 = 1.0 / (4.0 * 0.35);
        let avg = |e: f64| 0.5 * (rrc_pulse(&p, x0 + e) + rrc_pulse(&p, x0 - e));
        let limit = (4.0 * avg(5e-4) - avg(1e-3)) / 3.0;
        assert!(((rrc_pulse(&p, x0) - limit) / limit).abs() < 1e-9);
    }

    #[test]
    fn pulse_width_is_main_lobe() {
        // Main lobe of the T = T_p/2 pulse: near-zero at ±T_p/2.
        let spec = spec_r10().with_amplitude(1.0).unwrap();
        let tp = spec.pulse_width();
        let edge = rrc_pulse(spec.rrc(), tp / 2.0);
        assert!(edge.abs() < 0.07, "{edge}");
    }

    proptest! {
        #[test]
        fn pulse_is_even(t in -4e-9f64..4e-9) {
            let p = RrcParams::new(0.825e-9, 0.25, 3.3e-9, 1.0).unwrap();
            prop_assert_eq!(rrc_pulse(&p, t), rrc_pulse(&p, -t));
        }
    }

    fn pulse_signs(w: &SampledWaveform, spec: &ClusterSpec) -> Vec<f64> {
        let v = w.real_samples().unwrap();
        (0..spec.pulses_per_symbol())
            .map(|j| {
                let k = libm::round(spec.pulse_center(j) * w.sample_rate()) as usize;
                v[k]
            })
            .collect()
    }

    #[test]
    fn bit_one_is_all_positive() {
        let spec = spec_r10();
        let w = synth_cluster(&spec, true, 40e9).unwrap();
        let s = pulse_signs(&w, &spec);
        assert_eq!(s.len(), 16);
        assert!(s.iter().all(|&x| x > 0.9 * spec.amplitude()));
    }

    #[test]
    fn bit_zero_alternates() {
        let spec = spec_r10();
        let w = synth_cluster(&spec, false, 40e9).unwrap();
        let s = pulse_signs(&w, &spec);
        for (j, x) in s.iter().enumerate() {
            let want = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!(x * want > 0.9 * spec.amplitude());
        }
    }

    #[test]
    fn reference_agrees_and_data_flips() {
        // Pulses of this cluster sit in disjoint slots: T_d ≥ 2·truncation.
        let rrc = RrcParams::new(0.5e-9, 0.25, 0.45e-9, 0.01).unwrap();
        let spec = ClusterSpec::new(4, 1e-9, 1e-9, 50e6, 0.01)
            .unwrap()
            .with_rrc(rrc);
        let fs = 40e9;
        let one = synth_cluster(&spec, true, fs).unwrap();
        let zero = synth_cluster(&spec, false, fs).unwrap();
        let (a, b) = (one.real_samples().unwrap(), zero.real_samples().unwrap());
        for k in 0..a.len() {
            let t = k as f64 / fs;
            let slot = libm::floor((t - spec.first_pulse_center() + 0.5e-9) / 1e-9) as i64;
            if slot >= 0 && slot % 2 == 1 {
                assert_eq!(a[k], -b[k]);
            } else {
                assert_eq!(a[k], b[k]);
            }
        }
        let e1 = waveform_power(&one, 1.0).unwrap();
        let e0 = waveform_power(&zero, 1.0).unwrap();
        assert!(((e1 - e0) / e1).abs() < 1e-9);
    }

    #[test]
    fn symbol_energy_matches_eb() {
        // Trapezoidal oracle over the sampled cluster vs the Simpson E_b.
        let cases = [
            (8, 1.65e-9, 1.65e-9, 10e6, 0.0328),
            (4, 0.85e-9, 1.2e-9, 50e6, 0.012),
            (3, 1.0e-9, 2.0e-9, 30e6, 0.1),
            (2, 0.7e-9, 0.7e-9, 100e6, 0.05),
            (6, 1.3e-9, 1.9e-9, 20e6, 0.02),
        ];
        for (n, tp, td, r, a) in cases {
            let spec = ClusterSpec::new(n, tp, td, r, a).unwrap();
            let fs = 64.0 / tp;
            let trapezoid = |bit: bool| {
                let w = synth_cluster(&spec, bit, fs).unwrap();
                let v = w.real_samples().unwrap();
                let mut e = 0.0;
                for k in 1..v.len() {
                    e += 0.5 * (v[k] * v[k] + v[k - 1] * v[k - 1]) / fs;
                }
                e / 50.0
            };
            let e = 0.5 * (trapezoid(true) + trapezoid(false));
            let eb = spec.energy_per_bit(50.0).unwrap();
            assert!((e / eb - 1.0).abs() < 0.02, "{n} {tp} {td}: {e} vs {eb}");
        }
    }

    #[test]
    fn registry_energy_barely_depends_on_bit() {
        // T_d = T_p = 2T sits on a zero of the RRC autocorrelation.
        for mode in TxMode::all() {
            let spec = mode.cluster;
            let one = synth_cluster(&spec, true, 40e9).unwrap();
            let zero = synth_cluster(&spec, false, 40e9).unwrap();
            let (e1, e0) = (
                waveform_power(&one, 1.0).unwrap(),
                waveform_power(&zero, 1.0).unwrap(),
            );
            assert!(((e1 - e0) / e1).abs() < 0.01, "{}: {e1} {e0}", mode.name);
        }
    }

    #[test]
    fn single_bit_frame_is_the_cluster() {
        let spec = spec_r10();
        let f = synth_frame(&[true], &spec, 40e9).unwrap();
        let c = synth_cluster(&spec, true, 40e9).unwrap();
        assert_eq!(f, c);
    }

    #[test]
    fn second_symbol_window_is_a_zero_cluster() {
        let spec = spec_r10();
        let fs = 40e9;
        let f = synth_frame(&[true, false], &spec, fs).unwrap();
        let c = synth_cluster(&spec, false, fs).unwrap();
        let n = c.len();
        let tail = &f.real_samples().unwrap()[n..];
        for (a, b) in tail.iter().zip(c.real_samples().unwrap()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_relative_eq(f.duration(), 2.0 * spec.symbol_duration());
    }

    fn assert_relative_eq(a: f64, b: f64) {
        assert!((a / b - 1.0).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn undersampling_is_rejected() {
        let spec = TxMode::preset("r300").unwrap().cluster;
        assert!(synth_cluster(&spec, true, 10e9).is_err());
        assert!(synth_frame(&[], &spec, 40e9).is_err());
    }

    #[test]
    fn registry_has_seven_rows() {
        let all = TxMode::all();
        assert_eq!(all.len(), 7);
        assert_eq!(all[0].cluster.n_pulses(), 8);
        assert_eq!(TxMode::preset("R250").unwrap().cluster.n_pulses(), 3);
        assert!(TxMode::preset("r999").is_none());
    }

    #[test]
    fn carrier_only() {
        let fs = 40e9;
        let i = SampledWaveform::real(fs, 0.0, vec![1.0; 4000]).unwrap();
        let q = i.scaled(0.0).unwrap();
        let lo = LoConfig::new(3.827e9).unwrap();
        let rf = upconvert_iq(&i, &q, &lo).unwrap();
        for (k, v) in rf.real_samples().unwrap().iter().enumerate() {
            let want = libm::cos(2.0 * PI * 3.827e9 * k as f64 / fs);
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_tone_gives_single_sideband() {
        // i = cos(ω_m t), q = −sin(ω_m t) → cos((ω_LO − ω_m) t) only.
        let fs = 40e9;
        let fm = 100e6;
        let n = 400_000;
        let i = SampledWaveform::from_fn(fs, 0.0, n, |t| libm::cos(2.0 * PI * fm * t)).unwrap();
        let q = SampledWaveform::from_fn(fs, 0.0, n, |t| -libm::sin(2.0 * PI * fm * t)).unwrap();
        let lo = LoConfig::new(4e9).unwrap();
        let rf = upconvert_iq(&i, &q, &lo).unwrap();
        let s = psd_estimate(&rf, 1e6, 50.0).unwrap();
        let (_, want) = s.peak_in(3.9e9 - 2e6, 3.9e9 + 2e6).unwrap();
        let (_, image) = s.peak_in(4.1e9 - 2e6, 4.1e9 + 2e6).unwrap();
        assert!((want - 10.0).abs() < 0.1);
        assert!(want - image > 100.0, "{want} {image}");
    }

    #[test]
    fn envelope_follows_the_pulse() {
        let fs = 40e9;
        let spec = spec_r10().with_amplitude(1.0).unwrap();
        let p = component_pulse(&spec, fs).unwrap();
        let q = p.scaled(0.0).unwrap();
        let lo = LoConfig::new(3.827e9).unwrap();
        let rf = upconvert_iq(&p, &q, &lo).unwrap();
        // |rf| hits the envelope at carrier crests; compare around the main lobe
        let (g, r) = (p.real_samples().unwrap(), rf.real_samples().unwrap());
        let w = 2.0 * PI * 3.827e9;
        let mut err = 0.0f64;
        for k in 0..g.len() {
            let c = libm::cos(w * p.time_at(k));
            if c.abs() > 0.5 {
                err = err.max((r[k] / c - g[k]).abs());
            }
        }
        assert!(err < 0.01, "{err}");
    }

    #[test]
    fn upconversion_power_is_half_the_rail_power() {
        let fs = 40e9;
        let spec = TxMode::preset("r100").unwrap().cluster;
        let bits: Vec<bool> = (0..40).map(|k| k % 3 == 0).collect();
        let i = synth_frame(&bits, &spec, fs).unwrap();
        let q = i.scaled(-0.4).unwrap();
        let lo = LoConfig::new(7.884e9).unwrap();
        let rf = upconvert_iq(&i, &q, &lo).unwrap();
        let p_rf = waveform_power(&rf, 50.0).unwrap();
        let p_bb = 0.5 * (waveform_power(&i, 50.0).unwrap() + waveform_power(&q, 50.0).unwrap());
        assert!((p_rf / p_bb - 1.0).abs() < 0.01);
    }

    #[test]
    fn mismatched_rails_and_aliasing_rejected() {
        let a = SampledWaveform::real(40e9, 0.0, vec![0.0; 10]).unwrap();
        let b = SampledWaveform::real(40e9, 0.0, vec![0.0; 11]).unwrap();
        let lo = LoConfig::new(1e9).unwrap();
        assert!(upconvert_iq(&a, &b, &lo).is_err());
        let hi = LoConfig::new(25e9).unwrap();
        assert!(upconvert_iq(&a, &a, &hi).is_err());
    }

    #[test]
    fn component_bandwidth_near_inverse_width() {
        for (name, nominal) in [("r10", 650e6), ("r100", 1180e6)] {
            let spec = TxMode::preset(name).unwrap().cluster;
            let bw = bandwidth_3db(&component_pulse(&spec, 40e9).unwrap()).unwrap();
            assert!((bw / nominal - 1.0).abs() < 0.15, "{name}: {bw}");
        }
    }
}
