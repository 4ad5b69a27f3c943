use trpc_core::waveform::{Complex64, SampledWaveform};
use trpc_sim::wavefile::{read_waveform, write_waveform};

fn real_wave() -> SampledWaveform {
    SampledWaveform::from_fn(20e9, 1.5e-9, 257, |t| (t * 3.1e9).sin() * 1e-3).unwrap()
}

fn iq_wave() -> SampledWaveform {
    let z = (0..100)
        .map(|k| Complex64::new(k as f64 * 0.25, -(k as f64) / 3.0))
        .collect();
    SampledWaveform::quadrature(40e9, 0.0, z).unwrap()
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    for (name, w) in [("real.csv", real_wave()), ("iq.csv", iq_wave())] {
        let p = dir.path().join(name);
        write_waveform(&p, &w).unwrap();
        assert_eq!(read_waveform(&p).unwrap(), w);
    }
}

#[test]
fn binary_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    for (name, w) in [("real.bin", real_wave()), ("iq.wav64", iq_wave())] {
        let p = dir.path().join(name);
        write_waveform(&p, &w).unwrap();
        assert_eq!(read_waveform(&p).unwrap(), w);
        let len = std::fs::metadata(&p).unwrap().len() as usize;
        assert_eq!(len, 36 + w.len() * w.samples().channels() * 8);
    }
}

#[test]
fn corrupt_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("junk.bin");
    std::fs::write(&p, b"NOTAWAVEFILE_AT_ALL_0123456789abcdefghij").unwrap();
    assert!(read_waveform(&p).is_err());

    let p = dir.path().join("short.bin");
    write_waveform(&p, &real_wave()).unwrap();
    let mut bytes = std::fs::read(&p).unwrap();
    bytes.truncate(bytes.len() - 8);
    std::fs::write(&p, bytes).unwrap();
    assert!(read_waveform(&p).is_err());

    let p = dir.path().join("bad.csv");
    std::fs::write(
        &p,
        "sample_rate_hz,1e9\nstart_time_s,0\nchannels,1\nv\n0.5\nabc\n",
    )
    .unwrap();
    assert!(read_waveform(&p).is_err());
    std::fs::write(&p, "rate,1e9\n").unwrap();
    assert!(read_waveform(&p).is_err());

    let missing = dir.path().join("missing.csv");
    let err = read_waveform(&missing).unwrap_err().to_string();
    assert!(err.contains("missing.csv"), "{err}");
}
