//! Cross-module properties of the signal chain, checked over randomized
//! inputs.

use std::f64::consts::PI;

use proptest::prelude::*;
use trpc_core::compliance::{
    max_fbw_peak_power, measured_power_pulse_train, measured_power_trpc, FccMask,
    PulseTrainPowerModel,
};
use trpc_core::impairments::{upconvert_impaired, ImpairmentConfig};
use trpc_core::spectrum::psd_estimate;
use trpc_core::trpc::{synth_cluster, upconvert_iq, ClusterSpec, LoConfig, TxMode};
use trpc_core::waveform::{waveform_power, SampledWaveform};

const FS: f64 = 1e9;
const N: usize = 4096;
const RBW: f64 = 10e6;

/// Up to three tones with an integer number of cycles in the record, so a
/// circular rotation is an exact delay.
fn tones(parts: &[(usize, f64, f64)]) -> Vec<f64> {
    (0..N)
        .map(|k| {
            parts
                .iter()
                .map(|&(cycles, amp, ph)| {
                    amp * (2.0 * PI * cycles as f64 * k as f64 / N as f64 + ph).cos()
                })
                .sum()
        })
        .collect()
}

/// Tones resolved by the analyzer: at least four RBWs apart. Closer pairs
/// beat inside one window and the reading depends on their relative phase.
fn tone_set() -> impl Strategy<Value = Vec<(usize, f64, f64)>> {
    let min_gap = (4.0 * RBW / FS * N as f64) as usize;
    prop::collection::vec((100usize..1900, 0.05f64..1.0, 0.0f64..(2.0 * PI)), 1..=3).prop_filter(
        "tones closer than four RBWs",
        move |v| {
            v.iter()
                .enumerate()
                .all(|(a, x)| v[a + 1..].iter().all(|y| x.0.abs_diff(y.0) >= min_gap))
        },
    )
}

fn real(v: Vec<f64>) -> SampledWaveform {
    SampledWaveform::real(FS, 0.0, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_integrates_to_record_power(parts in tone_set()) {
        let w = real(tones(&parts));
        let s = psd_estimate(&w, RBW, 50.0).unwrap();
        let direct = waveform_power(&w, 50.0).unwrap();
        prop_assert!((s.integrated_power_w() / direct - 1.0).abs() < 0.02);
    }

    #[test]
    fn scaling_shifts_every_bin(parts in tone_set(), k in 0.01f64..100.0) {
        let w = real(tones(&parts));
        let a = psd_estimate(&w, RBW, 50.0).unwrap();
        let b = psd_estimate(&w.scaled(k).unwrap(), RBW, 50.0).unwrap();
        let shift = 20.0 * k.log10();
        for (pa, pb) in a.bin_powers().iter().zip(b.bin_powers()) {
            prop_assert!((pb - pa - shift).abs() < 0.01, "{pa} {pb} {shift}");
        }
    }

    #[test]
    fn delay_leaves_readings_unchanged(
        cycles in 100usize..1900,
        amp in 0.05f64..1.0,
        ph in 0.0f64..(2.0 * PI),
        d in 1usize..N,
    ) {
        let v = tones(&[(cycles, amp, ph)]);
        let mut shifted = v.clone();
        shifted.rotate_right(d);
        let a = psd_estimate(&real(v), RBW, 50.0).unwrap();
        let b = psd_estimate(&real(shifted), RBW, 50.0).unwrap();
        // Far sidelobes mix the tone with its mirror image at a phase set by
        // the segment grid; the property concerns the main-lobe bins.
        let floor = a.peak().1 - 10.0;
        for (pa, pb) in a.bin_powers().iter().zip(b.bin_powers()) {
            if *pa > floor {
                prop_assert!((pa - pb).abs() < 0.01, "{pa} {pb}");
            }
        }
    }

    #[test]
    fn data_pulses_flip_reference_pulses_stay(
        n_p in 1usize..6,
        tp_ps in 850u32..1700,
        gap in 4.0f64..6.0,
    ) {
        let tp = tp_ps as f64 * 1e-12;
        let spec = ClusterSpec::new(n_p, tp, gap * tp, 50e6, 0.01).unwrap();
        let fs = 20e9;
        let zero = synth_cluster(&spec, false, fs).unwrap();
        let one = synth_cluster(&spec, true, fs).unwrap();
        let (z, o) = (zero.real_samples().unwrap(), one.real_samples().unwrap());
        let sum: Vec<f64> = z.iter().zip(o).map(|(a, b)| (a + b) / 2.0).collect();
        let diff: Vec<f64> = z.iter().zip(o).map(|(a, b)| (b - a) / 2.0).collect();
        // Half-sum is the reference train, half-difference the data train.
        // With T_d at least twice the pulse support the slots are disjoint.
        for (r, d) in sum.iter().zip(&diff) {
            prop_assert!(r.abs() < 1e-15 || d.abs() < 1e-15, "{r} {d}");
        }
        let e0: f64 = z.iter().map(|x| x * x).sum();
        let e1: f64 = o.iter().map(|x| x * x).sum();
        prop_assert!((e0 / e1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn upconverted_power_is_half_rail_power(
        fi in 1u32..40,
        fq in 1u32..40,
        ai in 0.0f64..1.0,
        aq in 0.0f64..1.0,
    ) {
        let fs = 40e9;
        let n = 40_000;
        let rail = |cycles: u32, a: f64| {
            SampledWaveform::from_fn(fs, 0.0, n, |t| a * (2.0 * PI * cycles as f64 * 1e6 * t).sin())
                .unwrap()
        };
        let (i, q) = (rail(fi, ai), rail(fq, aq + 0.01));
        let rf = upconvert_iq(&i, &q, &LoConfig::new(4e9).unwrap()).unwrap();
        let expect = (waveform_power(&i, 50.0).unwrap() + waveform_power(&q, 50.0).unwrap()) / 2.0;
        prop_assert!((waveform_power(&rf, 50.0).unwrap() / expect - 1.0).abs() < 0.01);
    }

    #[test]
    fn ideal_front_end_is_the_ideal_modulator(
        a in 0.001f64..0.1,
        f_lo in 3.1e9f64..8.2e9,
        phase in 0.0f64..(2.0 * PI),
    ) {
        let fs = 40e9;
        let i = SampledWaveform::from_fn(fs, 0.0, 2000, |t| a * (2.0 * PI * 97e6 * t).cos()).unwrap();
        let q = SampledWaveform::from_fn(fs, 0.0, 2000, |t| a * (2.0 * PI * 31e6 * t).sin()).unwrap();
        let lo = LoConfig::new(f_lo).unwrap().with_phase(phase);
        let ideal = upconvert_iq(&i, &q, &lo).unwrap();
        let chain = upconvert_impaired(&i, &q, &lo, &ImpairmentConfig::ideal()).unwrap();
        for (x, y) in ideal.real_samples().unwrap().iter().zip(chain.real_samples().unwrap()) {
            prop_assert!((x - y).abs() <= 1e-12 * a.max(x.abs()));
        }
    }

    #[test]
    fn single_pulse_cluster_is_a_pulse_train(
        p in 1e-9f64..1e-3,
        tp in 0.5e-9f64..2e-9,
        rate in 10e6f64..300e6,
    ) {
        let rbw = 1e6;
        let train = PulseTrainPowerModel::new(p, tp, rate).unwrap();
        let a = measured_power_pulse_train(&train, rbw).unwrap();
        let b = measured_power_trpc(p, tp, 1, rate, rbw).unwrap();
        prop_assert!((a / b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn peak_power_limit_falls_with_every_parameter(
        n_p in 1usize..8,
        tp in 0.6e-9f64..2e-9,
        rate in 20e6f64..200e6,
        bump in 1.01f64..1.5,
    ) {
        let mask = FccMask::fcc_uwb();
        let limit = |n: usize, w: f64, r: f64| {
            let spec = ClusterSpec::new(n, w, w, r, 0.01).unwrap();
            let mode = TxMode::custom("probe", spec);
            max_fbw_peak_power(&mode, &mask, 1e6).unwrap().p_peak_dbm
        };
        let base = limit(n_p, tp, rate);
        prop_assert!(limit(n_p + 1, tp, rate) < base);
        prop_assert!(limit(n_p, tp * bump, rate) < base);
        prop_assert!(limit(n_p, tp, rate * bump) < base);
    }
}
