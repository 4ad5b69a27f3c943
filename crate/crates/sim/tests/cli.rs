use std::path::Path;
use std::process::{Command, Output};

use trpc_sim::wavefile::read_waveform;

fn trpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trpc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit status")
}

/// Local maxima of |v| above half the largest excursion.
fn pulse_count(v: &[f64]) -> usize {
    let top = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (1..v.len() - 1)
        .filter(|&k| {
            let a = v[k].abs();
            a > 0.5 * top && a >= v[k - 1].abs() && a > v[k + 1].abs()
        })
        .count()
}

fn synth(dir: &Path, mode: &str, bits: &str) -> Vec<f64> {
    let o = trpc(&[
        "synth",
        "--mode",
        mode,
        "--bits",
        bits,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let w = read_waveform(&dir.join("baseband.csv")).unwrap();
    assert!(dir.join("rf.csv").exists());
    w.real_samples().unwrap().to_vec()
}

#[test]
fn synth_writes_every_pulse() {
    let dir = tempfile::tempdir().unwrap();
    let v = synth(dir.path(), "r10", "10");
    assert_eq!(v.len(), 2 * 2000);
    assert_eq!(pulse_count(&v[..2000]), 16);
    assert_eq!(pulse_count(&v[2000..]), 16);

    let v = synth(dir.path(), "r300", "1");
    assert_eq!(pulse_count(&v), 4);
}

#[test]
fn synth_rejects_empty_bits() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nothing");
    let o = trpc(&[
        "synth",
        "--mode",
        "r10",
        "--bits",
        "",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(!out.exists());
}

#[test]
fn spectrum_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r10.csv");
    let o = trpc(&[
        "spectrum",
        "--mode",
        "r10",
        "--lo",
        "3.827e9",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r10.json")).unwrap())
            .unwrap();
    assert_eq!(report["passes"], true);
    assert!(std::fs::read_to_string(&csv)
        .unwrap()
        .starts_with("frequency_hz,power_dbm\n"));

    let o = trpc(&["spectrum", "--mode", "r250", "--lo", "7.884e9"]);
    assert_eq!(code(&o), 0);

    let o = trpc(&["spectrum", "--mode", "r250", "--amplitude-scale", "4"]);
    assert_eq!(code(&o), 2);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passes"], false);
    assert!(report["violation_count"].as_u64().unwrap() > 0);

    assert_eq!(
        code(&trpc(&["spectrum", "--mode", "r250", "--rbw", "100e3"])),
        1
    );
}

#[test]
fn comply_reads_waveform_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = trpc(&[
        "synth",
        "--mode",
        "r100",
        "--bits",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "bin",
    ]);
    assert_eq!(code(&o), 0);
    // one 10 ns symbol is far shorter than 10 RBW periods
    let o = trpc(&[
        "comply",
        "--input",
        dir.path().join("rf.bin").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let o = trpc(&[
        "comply",
        "--input",
        dir.path().join("missing.bin").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.bin"));

    let bits = "10".repeat(800);
    let o = trpc(&[
        "synth",
        "--mode",
        "r100",
        "--bits",
        &bits,
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "bin",
    ]);
    assert_eq!(code(&o), 0);
    let report = dir.path().join("report.json");
    let o = trpc(&[
        "comply",
        "--input",
        dir.path().join("rf.bin").to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(report.exists());
}

#[test]
fn ser_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("s.toml");
    std::fs::write(
        &scn,
        "schema = 1\nseed = 5\nn_symbols = 400\n[mode]\npreset = \"r300\"\n[sweep]\neb_n0_db = [inf, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0]\n",
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = trpc(&[
            "ser",
            "--scenario",
            scn.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eb_n0_db,ser,ci95,symbols,errors"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0][0], f64::INFINITY);
    assert_eq!(rows[0][1], 0.0);
    for w in rows[1..].windows(2) {
        assert!(w[1][1] <= w[0][1] + w[0][2].max(w[1][2]), "{w:?}");
    }
    assert!(rows[1][1] > rows[11][1]);
}

#[test]
fn guard_violation_exits_before_simulating() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("g.toml");
    std::fs::write(
        &scn,
        "schema = 1\nn_symbols = 100000000\n[mode]\npreset = \"r300\"\n[channel]\ntaps = [{ delay_s = 0.0, gain = 1.0 }, { delay_s = 2e-9, gain = 0.5 }]\n",
    )
    .unwrap();
    let o = trpc(&["ser", "--scenario", scn.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tau_max"));
}

#[test]
fn table1_report() {
    let o = trpc(&["table1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 8);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    assert_eq!(code(&trpc(&["table1", "--out", p.to_str().unwrap()])), 0);
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 7);
    for r in rows {
        assert!(r["p_peak_delta_db"].as_f64().unwrap().abs() <= 0.5);
        assert!(r["amplitude_delta_pct"].as_f64().unwrap().abs() <= 10.0);
    }
    let r200 = rows.iter().find(|r| r["mode"] == "r200").unwrap();
    assert!(r200["p_peak_delta_db"].as_f64().unwrap().abs() <= 0.1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&trpc(&[])), 1);
    assert_eq!(code(&trpc(&["frobnicate"])), 1);
    assert_eq!(code(&trpc(&["spectrum", "--mode", "r999"])), 1);
    assert_eq!(code(&trpc(&["spectrum"])), 1);
    assert_eq!(code(&trpc(&["ser", "--scenario", "/nonexistent.toml"])), 1);
    assert_eq!(code(&trpc(&["--help"])), 0);
    assert_eq!(code(&trpc(&["--version"])), 0);
}
