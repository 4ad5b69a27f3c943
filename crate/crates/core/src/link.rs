//! Multipath and AWGN channel, the I-Q autocorrelation receiver, a
//! Monte Carlo symbol-error harness and the energy-per-pulse metric.
//!
//! Noise convention: `noise_psd` is the one-sided PSD `N_0` (W/Hz) into the
//! load `Z`. A real record sampled at `f_s` spans `f_s/2` of one-sided
//! bandwidth, so each sample receives an independent Gaussian voltage of
//! variance `N_0·Z·f_s/2` and the mean noise power is `N_0·f_s/2`.
//!
//! Monte Carlo runs are split into blocks of symbols. Block `b` draws its
//! bits and its noise from a ChaCha8 generator seeded with `seed` on stream
//! `b`, so results do not depend on the order or parallelism in which blocks
//! are evaluated. Each block is simulated as one period of a repeating
//! signal (see [`synth_frame`]), which makes channel echoes and filter
//! tails wrap instead of being truncated.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure, Error, Result};
use crate::filter::Butterworth;
use crate::impairments::{upconvert_impaired, ImpairmentConfig};
use crate::spectrum::bandwidth_3db;
use crate::trpc::{
    check_nyquist, component_pulse, drive_rails, synth_frame, ClusterSpec, IqDrive, LoConfig,
    TxMode,
};
use crate::waveform::{SampledWaveform, DEFAULT_LOAD_OHMS, RF_SAMPLE_RATE_HZ};

/// Receiver low-pass order.
pub const LPF_ORDER: usize = 4;

/// Receiver low-pass cutoff relative to the component pulse 3 dB bandwidth.
pub const LPF_CUTOFF_FACTOR: f64 = 1.5;

/// Tap delays must sit this close to the sample grid, in samples.
const DELAY_GRID_TOLERANCE: f64 = 1e-3;

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay: f64,
    pub gain: f64,
    /// `+1` or `-1`.
    pub sign: i8,
}

impl Tap {
    pub fn new(delay: f64, gain: f64, sign: i8) -> Self {
        Self { delay, gain, sign }
    }

    fn weight(&self) -> f64 {
        self.gain * f64::from(self.sign)
    }
}

/// Tapped delay line plus white Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    taps: Vec<Tap>,
    noise_psd: f64,
}

impl ChannelModel {
    pub fn new(taps: Vec<Tap>, noise_psd: f64) -> Result<Self> {
        ensure(!taps.is_empty(), "taps", "at least one tap required")?;
        ensure(
            taps.iter().all(|t| {
                t.delay.is_finite() && t.delay >= 0.0 && t.gain.is_finite() && t.sign.abs() == 1
            }),
            "taps",
            "delays must be finite and non-negative, gains finite, signs +1 or -1",
        )?;
        ensure(
            taps.windows(2).all(|w| w[1].delay > w[0].delay),
            "taps",
            "delays must be strictly increasing",
        )?;
        ensure(
            noise_psd.is_finite() && noise_psd >= 0.0,
            "noise_psd",
            "must be non-negative",
        )?;
        Ok(Self { taps, noise_psd })
    }

    /// Single unit tap, no noise.
    pub fn ideal() -> Self {
        Self {
            taps: vec![Tap::new(0.0, 1.0, 1)],
            noise_psd: 0.0,
        }
    }

    /// Single unit tap with AWGN.
    pub fn awgn(noise_psd: f64) -> Result<Self> {
        Self::new(vec![Tap::new(0.0, 1.0, 1)], noise_psd)
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn noise_psd(&self) -> f64 {
        self.noise_psd
    }

    /// Delay of the last tap.
    pub fn tau_max(&self) -> f64 {
        self.taps[self.taps.len() - 1].delay
    }

    pub fn with_noise_psd(&self, noise_psd: f64) -> Result<Self> {
        Self::new(self.taps.clone(), noise_psd)
    }

    fn sample_delays(&self, fs: f64) -> Result<Vec<(usize, f64)>> {
        self.taps
            .iter()
            .map(|t| {
                let d = t.delay * fs;
                let k = libm::round(d);
                if (d - k).abs() > DELAY_GRID_TOLERANCE {
                    return Err(Error::Parameter {
                        name: "taps",
                        reason: "delay not resolvable on the sample grid",
                    });
                }
                Ok((k as usize, t.weight()))
            })
            .collect()
    }
}

fn add_noise(v: &mut [f64], noise_psd: f64, fs: f64, load: f64, rng: &mut ChaCha8Rng) {
    if noise_psd == 0.0 {
        return;
    }
    let sigma = libm::sqrt(noise_psd * load * fs / 2.0);
    for x in v.iter_mut() {
        let n: f64 = StandardNormal.sample(rng);
        *x += sigma * n;
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    let mut bits = Vec::with_capacity(n);
    while bits.len() < n {
        let word = rng.next_u64();
        bits.extend((0..64).map(|s| word >> s & 1 == 1).take(n - bits.len()));
    }
    bits
}

/// `n` equiprobable bits from stream `stream` of `seed`; the same bits
/// block `stream` of a Monte Carlo run transmits.
pub fn random_bits(n: usize, seed: u64, stream: u64) -> Vec<bool> {
    draw_bits(&mut rng_for(seed, stream), n)
}

/// Tapped-delay-line convolution (signal before `t0` taken as zero) plus
/// AWGN into the default 50 Ω load. Deterministic for a given seed.
pub fn apply_channel(
    rf: &SampledWaveform,
    ch: &ChannelModel,
    seed: u64,
) -> Result<SampledWaveform> {
    let x = rf.real_samples()?;
    let fs = rf.sample_rate();
    let mut y = vec![0.0; x.len()];
    for (d, w) in ch.sample_delays(fs)? {
        for k in d..x.len() {
            y[k] += w * x[k - d];
        }
    }
    add_noise(
        &mut y,
        ch.noise_psd,
        fs,
        DEFAULT_LOAD_OHMS,
        &mut rng_for(seed, 0),
    );
    SampledWaveform::real(fs, rf.start_time(), y)
}

/// Circular variant for records that hold one period of a repeating
/// signal: echoes running past the end wrap to the start.
fn apply_channel_periodic(x: &[f64], ch: &ChannelModel, fs: f64) -> Result<Vec<f64>> {
    let n = x.len();
    let mut y = vec![0.0; n];
    for (d, w) in ch.sample_delays(fs)? {
        let d = d % n;
        for k in 0..n {
            y[(k + d) % n] += w * x[k];
        }
    }
    Ok(y)
}

/// Default receiver cutoff for a cluster: 1.5 × the component pulse 3 dB
/// bandwidth.
pub fn default_lpf_cutoff(spec: &ClusterSpec) -> Result<f64> {
    let fs = 64.0 / spec.pulse_width();
    Ok(LPF_CUTOFF_FACTOR * bandwidth_3db(&component_pulse(spec, fs)?)?)
}

fn check_cutoff(rf: &SampledWaveform, lo: &LoConfig, cutoff: f64) -> Result<()> {
    check_nyquist(rf, lo)?;
    ensure(
        cutoff > 0.0 && cutoff < lo.frequency,
        "lpf_cutoff",
        "must lie between 0 and the LO frequency",
    )
}

fn mix_down(rf: &SampledWaveform, lo: &LoConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = rf.real_samples()?;
    let w = 2.0 * PI * lo.frequency;
    let g = 2.0 * lo.amplitude;
    let mut i = Vec::with_capacity(x.len());
    let mut q = Vec::with_capacity(x.len());
    for (k, &v) in x.iter().enumerate() {
        let (s, c) = libm::sincos(w * rf.time_at(k) + lo.phase);
        i.push(g * v * c);
        q.push(-g * v * s);
    }
    Ok((i, q))
}

/// Mixes with `2cos(ωt + θ)` and `−2sin(ωt + θ)` and low-pass filters both
/// rails with a zero-phase (forward-backward) 4th-order Butterworth.
pub fn demodulate_iq(
    rf: &SampledWaveform,
    lo: &LoConfig,
    lpf_cutoff: f64,
) -> Result<(SampledWaveform, SampledWaveform)> {
    check_cutoff(rf, lo, lpf_cutoff)?;
    let lpf = Butterworth::lowpass(LPF_ORDER, lpf_cutoff, rf.sample_rate())?;
    let (mut i, mut q) = mix_down(rf, lo)?;
    lpf.filtfilt(&mut i);
    lpf.filtfilt(&mut q);
    Ok((
        SampledWaveform::real(rf.sample_rate(), rf.start_time(), i)?,
        SampledWaveform::real(rf.sample_rate(), rf.start_time(), q)?,
    ))
}

/// Period of [`prbs9`].
pub const PRBS9_PERIOD: usize = 511;

/// Maximal-length sequence of the LFSR `x^9 + x^5 + 1`, started from a
/// non-zero state derived from `seed`. Each period holds 256 ones and 255
/// zeros.
pub fn prbs9(n: usize, seed: u64) -> Vec<bool> {
    let mut state = (seed % PRBS9_PERIOD as u64) as u16 + 1;
    (0..n)
        .map(|_| {
            let bit = ((state >> 8) ^ (state >> 4)) & 1;
            state = ((state << 1) | bit) & 0x1ff;
            bit == 1
        })
        .collect()
}

/// Samples the filter needs to settle.
fn settle_samples(cutoff: f64, fs: f64) -> usize {
    (libm::ceil(40.0 * fs / cutoff) as usize).max(64)
}

/// Zero-phase filtering of one period of a periodic signal.
fn filtfilt_periodic(lpf: &Butterworth, x: &[f64], guard: usize) -> Vec<f64> {
    let n = x.len();
    let mut ext: Vec<f64> = (0..n + 2 * guard)
        .map(|k| x[(k + n * (guard / n + 1) - guard) % n])
        .collect();
    lpf.filtfilt(&mut ext);
    ext.drain(..guard);
    ext.truncate(n);
    ext
}

fn symbol_count(wave: &SampledWaveform, spec: &ClusterSpec) -> Result<usize> {
    let per_symbol = spec.symbol_duration() * wave.sample_rate();
    let m = libm::round(wave.len() as f64 / per_symbol) as usize;
    if m == 0 || libm::round(m as f64 * per_symbol) as usize != wave.len() {
        return Err(Error::Parameter {
            name: "waveform",
            reason: "does not span an integer number of symbols",
        });
    }
    Ok(m)
}

/// Per-symbol decision statistics
/// `Z_m = Σ_data windows ∫ i(t)·i(t−T_d) + q(t)·q(t−T_d) dt`.
///
/// Windows are `T_p` wide and centred on the data pulses; the record is
/// treated as periodic, so the lag wraps at the start.
pub fn correlator_outputs(
    i: &SampledWaveform,
    q: &SampledWaveform,
    spec: &ClusterSpec,
) -> Result<Vec<f64>> {
    i.check_aligned(q)?;
    let (iv, qv) = (i.real_samples()?, q.real_samples()?);
    let m_total = symbol_count(i, spec)?;
    let fs = i.sample_rate();
    let n = iv.len() as i64;
    let lag = libm::round(spec.pulse_delay() * fs) as i64;
    let half = spec.pulse_width() / 2.0;
    let mut z = Vec::with_capacity(m_total);
    for m in 0..m_total {
        let t0 = m as f64 * spec.symbol_duration();
        let mut acc = 0.0;
        for d in 0..spec.n_pulses() {
            let c = t0 + spec.pulse_center(2 * d + 1);
            let k0 = libm::ceil((c - half) * fs - 1e-6) as i64;
            let k1 = libm::floor((c + half) * fs + 1e-6) as i64;
            for k in k0..=k1 {
                let a = k.rem_euclid(n) as usize;
                let b = (k - lag).rem_euclid(n) as usize;
                acc += iv[a] * iv[b] + qv[a] * qv[b];
            }
        }
        z.push(acc / fs);
    }
    Ok(z)
}

/// Bit decisions: `Z_m > 0` gives 1, otherwise 0 (an exact tie decides 0).
pub fn autocorr_detect(
    i: &SampledWaveform,
    q: &SampledWaveform,
    spec: &ClusterSpec,
) -> Result<Vec<bool>> {
    Ok(correlator_outputs(i, q, spec)?
        .into_iter()
        .map(|z| z > 0.0)
        .collect())
}

/// Rejects clusters whose symbol period cannot absorb the channel spread.
pub fn check_guard(spec: &ClusterSpec, ch: &ChannelModel) -> Result<()> {
    let required = spec.n_pulses() as f64 * spec.pulse_delay() + ch.tau_max();
    if spec.symbol_duration() < required * (1.0 - 1e-12) {
        return Err(Error::Guard {
            symbol_duration_s: spec.symbol_duration(),
            required_s: required,
        });
    }
    Ok(())
}

/// Link settings not carried by the mode or the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub sample_rate: f64,
    pub tx_lo: LoConfig,
    /// Receiver LO; a phase or frequency offset relative to `tx_lo` models
    /// LO mismatch.
    pub rx_lo: LoConfig,
    /// `None` uses [`default_lpf_cutoff`].
    pub lpf_cutoff: Option<f64>,
    pub drive: IqDrive,
    pub load_impedance: f64,
    pub block_symbols: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        let lo = LoConfig {
            frequency: 4e9,
            phase: 0.0,
            amplitude: 1.0,
        };
        Self {
            sample_rate: RF_SAMPLE_RATE_HZ,
            tx_lo: lo,
            rx_lo: lo,
            lpf_cutoff: None,
            drive: IqDrive::Identical,
            load_impedance: DEFAULT_LOAD_OHMS,
            block_symbols: 250,
        }
    }
}

impl LinkConfig {
    pub fn with_lo(self, frequency: f64) -> Self {
        Self {
            tx_lo: LoConfig {
                frequency,
                ..self.tx_lo
            },
            rx_lo: LoConfig {
                frequency,
                ..self.rx_lo
            },
            ..self
        }
    }

    pub fn with_rx_phase(self, phase: f64) -> Self {
        Self {
            rx_lo: self.rx_lo.with_phase(phase),
            ..self
        }
    }
}

/// Energy per bit at the RF port, joules: the baseband cluster energy scaled
/// by the LO amplitude and output gain, halved by up-conversion.
pub fn rf_energy_per_bit(mode: &TxMode, imp: &ImpairmentConfig, cfg: &LinkConfig) -> Result<f64> {
    let g = cfg.tx_lo.amplitude * libm::pow(10.0, imp.output_gain_db / 20.0);
    Ok(mode.cluster.energy_per_bit(cfg.load_impedance)? * g * g / 2.0)
}

/// `N_0` that puts the link at `eb_n0_db`.
pub fn noise_psd_for_eb_n0(
    mode: &TxMode,
    imp: &ImpairmentConfig,
    cfg: &LinkConfig,
    eb_n0_db: f64,
) -> Result<f64> {
    ensure(eb_n0_db.is_finite(), "eb_n0_db", "must be finite")?;
    Ok(rf_energy_per_bit(mode, imp, cfg)? / libm::pow(10.0, eb_n0_db / 10.0))
}

/// Outcome of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerResult {
    pub symbols: u64,
    pub errors: u64,
    pub ser: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub ci95: f64,
    /// `+∞` for a noiseless channel.
    pub eb_n0_db: f64,
}

impl SerResult {
    pub fn from_counts(symbols: u64, errors: u64, eb_n0_db: f64) -> Self {
        let p = if symbols == 0 {
            0.0
        } else {
            errors as f64 / symbols as f64
        };
        let ci95 = if symbols == 0 {
            0.0
        } else {
            1.96 * libm::sqrt(p * (1.0 - p) / symbols as f64)
        };
        Self {
            symbols,
            errors,
            ser: p,
            ci95,
            eb_n0_db,
        }
    }
}

/// Everything fixed for the duration of one Monte Carlo run.
#[derive(Debug, Clone)]
pub struct SerPlan {
    mode: TxMode,
    channel: ChannelModel,
    impairments: ImpairmentConfig,
    cfg: LinkConfig,
    lpf: Butterworth,
    guard: usize,
    n_symbols: usize,
    seed: u64,
}

/// Minimum run length accepted by [`run_ser`].
pub const MIN_SER_SYMBOLS: usize = 100;

impl SerPlan {
    pub fn new(
        mode: &TxMode,
        channel: &ChannelModel,
        impairments: &ImpairmentConfig,
        cfg: &LinkConfig,
        n_symbols: usize,
        seed: u64,
    ) -> Result<Self> {
        check_guard(&mode.cluster, channel)?;
        ensure(
            n_symbols >= MIN_SER_SYMBOLS,
            "n_symbols",
            "at least 100 symbols required",
        )?;
        ensure(cfg.block_symbols > 0, "block_symbols", "must be positive")?;
        impairments.validate()?;
        mode.cluster.check_rate(cfg.sample_rate)?;
        channel.sample_delays(cfg.sample_rate)?;
        cfg.tx_lo.validate()?;
        cfg.rx_lo.validate()?;
        let cutoff = match cfg.lpf_cutoff {
            Some(c) => c,
            None => default_lpf_cutoff(&mode.cluster)?,
        };
        ensure(
            cutoff > 0.0 && cutoff < cfg.rx_lo.frequency && cutoff < cfg.sample_rate / 2.0,
            "lpf_cutoff",
            "must lie between 0 and the LO frequency",
        )?;
        ensure(
            cfg.tx_lo.frequency < cfg.sample_rate / 2.0
                && cfg.rx_lo.frequency < cfg.sample_rate / 2.0,
            "lo.frequency",
            "carrier at or above the Nyquist frequency",
        )?;
        Ok(Self {
            mode: *mode,
            channel: channel.clone(),
            impairments: *impairments,
            cfg: *cfg,
            lpf: Butterworth::lowpass(LPF_ORDER, cutoff, cfg.sample_rate)?,
            guard: settle_samples(cutoff, cfg.sample_rate),
            n_symbols,
            seed,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.n_symbols.div_ceil(self.cfg.block_symbols)
    }

    pub fn eb_n0_db(&self) -> Result<f64> {
        if self.channel.noise_psd == 0.0 {
            return Ok(f64::INFINITY);
        }
        let eb = rf_energy_per_bit(&self.mode, &self.impairments, &self.cfg)?;
        Ok(10.0 * libm::log10(eb / self.channel.noise_psd))
    }

    /// Transmitted bits and receiver decisions for block `b`.
    pub fn run_block(&self, b: usize) -> Result<(Vec<bool>, Vec<bool>)> {
        let start = b * self.cfg.block_symbols;
        ensure(
            start < self.n_symbols,
            "block",
            "index past the end of the run",
        )?;
        let len = self.cfg.block_symbols.min(self.n_symbols - start);
        let mut rng = rng_for(self.seed, b as u64);
        let bits = draw_bits(&mut rng, len);
        let fs = self.cfg.sample_rate;
        let baseband = synth_frame(&bits, &self.mode.cluster, fs)?;
        let (i, q) = drive_rails(&baseband, self.cfg.drive)?;
        let rf = upconvert_impaired(&i, &q, &self.cfg.tx_lo, &self.impairments)?;
        let mut y = apply_channel_periodic(rf.real_samples()?, &self.channel, fs)?;
        add_noise(
            &mut y,
            self.channel.noise_psd,
            fs,
            self.cfg.load_impedance,
            &mut rng,
        );
        let rx = SampledWaveform::real(fs, 0.0, y)?;
        let (i, q) = mix_down(&rx, &self.cfg.rx_lo)?;
        let i = SampledWaveform::real(fs, 0.0, filtfilt_periodic(&self.lpf, &i, self.guard))?;
        let q = SampledWaveform::real(fs, 0.0, filtfilt_periodic(&self.lpf, &q, self.guard))?;
        let decided = autocorr_detect(&i, &q, &self.mode.cluster)?;
        Ok((bits, decided))
    }

    /// `(symbols, errors)` for block `b`.
    pub fn count_block(&self, b: usize) -> Result<(u64, u64)> {
        let (sent, got) = self.run_block(b)?;
        let errors = sent.iter().zip(&got).filter(|(a, b)| a != b).count();
        Ok((sent.len() as u64, errors as u64))
    }

    /// Folds per-block counts into a result.
    pub fn finish(&self, counts: impl IntoIterator<Item = (u64, u64)>) -> Result<SerResult> {
        let (s, e) = counts
            .into_iter()
            .fold((0, 0), |(s, e), (bs, be)| (s + bs, e + be));
        Ok(SerResult::from_counts(s, e, self.eb_n0_db()?))
    }
}

/// Full TX → channel → RX chain over `n_symbols` random symbols with the
/// default [`LinkConfig`].
pub fn run_ser(
    mode: &TxMode,
    ch: &ChannelModel,
    impairments: &ImpairmentConfig,
    n_symbols: usize,
    seed: u64,
) -> Result<SerResult> {
    run_ser_with(
        mode,
        ch,
        impairments,
        &LinkConfig::default(),
        n_symbols,
        seed,
    )
}

/// [`run_ser`] with explicit link settings. Blocks run sequentially.
pub fn run_ser_with(
    mode: &TxMode,
    ch: &ChannelModel,
    impairments: &ImpairmentConfig,
    cfg: &LinkConfig,
    n_symbols: usize,
    seed: u64,
) -> Result<SerResult> {
    let plan = SerPlan::new(mode, ch, impairments, cfg, n_symbols, seed)?;
    let counts = (0..plan.n_blocks())
        .map(|b| plan.count_block(b))
        .collect::<Result<Vec<_>>>()?;
    plan.finish(counts)
}

/// Supply operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    pub supply_voltage: f64,
    pub active_current: f64,
    /// Fraction of the symbol time the transmitter draws `active_current`.
    pub duty: f64,
}

/// Energy per emitted pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub energy_per_pulse_pj: f64,
    pub pulses_per_second: f64,
    pub average_power: f64,
}

/// `E_d = V·I·duty / (N_p·R)`.
///
/// A pulse event is one of the `N_p` doublet positions of a cluster, not one
/// of its `2N_p` members: 1.2 V × 24 mA = 28.8 mW at 250 Mbps with
/// `N_p = 3` gives 28.8 mW / 7.5e8 s⁻¹ = 38.4 pJ.
pub fn energy_per_pulse(profile: &PowerProfile, mode: &TxMode) -> Result<EnergyReport> {
    ensure(
        profile.supply_voltage > 0.0 && profile.active_current > 0.0,
        "profile",
        "voltage and current must be positive",
    )?;
    ensure(
        profile.duty > 0.0 && profile.duty <= 1.0,
        "profile.duty",
        "must lie in (0, 1]",
    )?;
    let average_power = profile.supply_voltage * profile.active_current * profile.duty;
    let pulses_per_second = mode.cluster.n_pulses() as f64 * mode.cluster.symbol_rate();
    Ok(EnergyReport {
        energy_per_pulse_pj: average_power / pulses_per_second * 1e12,
        pulses_per_second,
        average_power,
    })
}
