//! Subcommand bodies. Each returns data; writing files and choosing exit
//! statuses is left to the caller.

use trpc_core::compliance::{
    check_fcc, max_fbw_peak_power, solve_amplitude, FccMask, FccVerdict, AVERAGE_LIMIT_RBW_HZ,
};
use trpc_core::impairments::upconvert_impaired;
use trpc_core::link::{check_guard, prbs9, SerResult, PRBS9_PERIOD};
use trpc_core::trpc::{drive_rails, synth_frame, LoConfig, TxMode};
use trpc_core::waveform::{
    SampledWaveform, BASEBAND_SAMPLE_RATE_HZ, DEFAULT_LOAD_OHMS, RF_SAMPLE_RATE_HZ,
};
use trpc_core::{psd_estimate, SpectrumEstimate};

use crate::error::{SimError, SimResult};
use crate::montecarlo::{run_ser_parallel, sweep};
use crate::report::Table1Row;
use crate::scenario::{default_lo_frequency, NoiseSetting, Scenario};

/// Spectrum records last this many RBW periods.
pub const SPECTRUM_RECORD_RBW_PERIODS: f64 = 16.0;

/// Bit pattern of a `synth` run when none is given.
pub const DEFAULT_SYNTH_BITS: [bool; 2] = [true, false];

/// Baseband frame (at the baseband rate) and RF output (at the scenario
/// rate) for the scenario's bit pattern.
pub fn synthesize(scn: &Scenario) -> SimResult<(SampledWaveform, SampledWaveform)> {
    let bits = scn
        .bits
        .clone()
        .unwrap_or_else(|| DEFAULT_SYNTH_BITS.to_vec());
    let baseband = synth_frame(&bits, &scn.mode.cluster, BASEBAND_SAMPLE_RATE_HZ)?;
    let rf = rf_frame(scn, &bits)?;
    Ok((baseband, rf))
}

fn rf_frame(scn: &Scenario, bits: &[bool]) -> SimResult<SampledWaveform> {
    let frame = synth_frame(bits, &scn.mode.cluster, scn.sample_rate)?;
    let (i, q) = drive_rails(&frame, scn.link_config().drive)?;
    Ok(upconvert_impaired(&i, &q, &scn.lo, &scn.impairments)?)
}

/// Symbols needed for a spectrum record at `rbw`.
pub fn spectrum_symbols(mode: &TxMode, rbw: f64) -> usize {
    (SPECTRUM_RECORD_RBW_PERIODS / rbw * mode.cluster.symbol_rate()).ceil() as usize
}

/// Bits of a spectrum record: whole periods of `pattern`, or of a PRBS-9
/// test sequence whose starting phase follows `seed`, covering at least
/// [`spectrum_symbols`].
pub fn spectrum_bits(mode: &TxMode, rbw: f64, seed: u64, pattern: Option<&[bool]>) -> Vec<bool> {
    let n = spectrum_symbols(mode, rbw);
    match pattern {
        Some(p) => p
            .iter()
            .copied()
            .cycle()
            .take(n.div_ceil(p.len()) * p.len())
            .collect(),
        None => prbs9(n.div_ceil(PRBS9_PERIOD) * PRBS9_PERIOD, seed),
    }
}

/// RF record for spectrum measurements.
pub fn spectrum_frame(scn: &Scenario) -> SimResult<SampledWaveform> {
    let bits = spectrum_bits(&scn.mode, scn.rbw, scn.seed, scn.bits.as_deref());
    rf_frame(scn, &bits)
}

pub fn measure(wave: &SampledWaveform, rbw: f64) -> SimResult<(SpectrumEstimate, FccVerdict)> {
    let s = psd_estimate(wave, rbw, DEFAULT_LOAD_OHMS)?;
    let v = check_fcc(&s, &FccMask::fcc_uwb())?;
    Ok((s, v))
}

pub fn spectrum(scn: &Scenario) -> SimResult<(SpectrumEstimate, FccVerdict)> {
    measure(&spectrum_frame(scn)?, scn.rbw)
}

/// One result per SER point. The guard inequality is checked before any
/// simulation.
pub fn ser(scn: &Scenario) -> SimResult<Vec<SerResult>> {
    check_guard(&scn.mode.cluster, &scn.channel)?;
    let cfg = scn.link_config();
    if let NoiseSetting::Psd(p) = scn.noise {
        if scn.sweep.is_none() {
            let ch = scn.channel.with_noise_psd(p)?;
            return Ok(vec![run_ser_parallel(
                &scn.mode,
                &ch,
                &scn.impairments,
                &cfg,
                scn.n_symbols,
                scn.seed,
            )?]);
        }
    }
    let points: Vec<f64> = scn.ser_points().into_iter().flatten().collect();
    sweep(
        &scn.mode,
        &scn.channel,
        &scn.impairments,
        &cfg,
        &points,
        scn.n_symbols,
        scn.seed,
    )
}

/// The per-mode design table: largest FBW peak power and the amplitude
/// that produces it, next to the reference values.
pub fn table1() -> SimResult<Vec<Table1Row>> {
    let mask = FccMask::fcc_uwb();
    TxMode::all()
        .into_iter()
        .map(|mode| {
            let lo = LoConfig::new(default_lo_frequency(&mode))?;
            let limit = max_fbw_peak_power(&mode, &mask, AVERAGE_LIMIT_RBW_HZ)?;
            let amplitude = solve_amplitude(
                &mode,
                &mask,
                AVERAGE_LIMIT_RBW_HZ,
                DEFAULT_LOAD_OHMS,
                &lo,
                RF_SAMPLE_RATE_HZ,
            )?;
            let delta = limit.p_peak_dbm - mode.p_peak_rrc_dbm;
            let note = if delta.abs() > 0.1 {
                format!("reference value differs from the direct inversion by {delta:+.2} dB")
            } else {
                String::new()
            };
            Ok(Table1Row {
                mode: mode.name.to_string(),
                data_rate_bps: mode.data_rate,
                n_pulses: mode.cluster.n_pulses(),
                pulse_width_s: mode.cluster.pulse_width(),
                lo_frequency_hz: lo.frequency,
                p_peak_dbm: limit.p_peak_dbm,
                p_peak_reference_dbm: mode.p_peak_rrc_dbm,
                p_peak_delta_db: delta,
                binding_constraint: limit.binding.as_str(),
                amplitude_v: amplitude,
                amplitude_reference_v: mode.max_amplitude,
                amplitude_delta_pct: 100.0 * (amplitude / mode.max_amplitude - 1.0),
                note,
            })
        })
        .collect()
}

/// Fixed-width text rendering of the table.
pub fn format_table1(rows: &[Table1Row]) -> String {
    let mut out = String::from(
        "mode   rate[Mb/s] N_p  T_p[ns]  P_peak[dBm]  ref[dBm]  delta[dB]  A[mV]   ref[mV]  delta[%]\n",
    );
    for r in rows {
        out += &format!(
            "{:<6} {:>10.0} {:>3} {:>8.2} {:>12.2} {:>9.2} {:>10.2} {:>7.2} {:>8.2} {:>9.1}{}\n",
            r.mode,
            r.data_rate_bps / 1e6,
            r.n_pulses,
            r.pulse_width_s * 1e9,
            r.p_peak_dbm,
            r.p_peak_reference_dbm,
            r.p_peak_delta_db,
            r.amplitude_v * 1e3,
            r.amplitude_reference_v * 1e3,
            r.amplitude_delta_pct,
            if r.note.is_empty() {
                String::new()
            } else {
                format!("  ({})", r.note)
            }
        );
    }
    out
}

/// Rejects an `--rbw` outside the FCC measurement range up front.
pub fn check_rbw(rbw: f64) -> SimResult<()> {
    let (lo, hi) = FccMask::fcc_uwb().rbw_range;
    if rbw < lo || rbw > hi {
        return Err(SimError::Usage(format!(
            "rbw {rbw} Hz outside the FCC measurement range [{lo}, {hi}] Hz"
        )));
    }
    Ok(())
}
