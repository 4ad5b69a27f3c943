use trpc_core::impairments::ImpairmentConfig;
use trpc_core::link::{noise_psd_for_eb_n0, run_ser_with, ChannelModel, LinkConfig};
use trpc_core::trpc::TxMode;
use trpc_sim::montecarlo::{run_ser_parallel, sweep};

#[test]
fn parallel_matches_sequential_for_any_thread_count() {
    let mode = TxMode::preset("r250").unwrap();
    let cfg = LinkConfig {
        block_symbols: 64,
        ..LinkConfig::default()
    };
    let imp = ImpairmentConfig::ideal();
    let ch = ChannelModel::awgn(noise_psd_for_eb_n0(&mode, &imp, &cfg, 7.0).unwrap()).unwrap();
    let reference = run_ser_with(&mode, &ch, &imp, &cfg, 1000, 9).unwrap();
    assert!(reference.errors > 0);
    for threads in [1, 3, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let got = pool
            .install(|| run_ser_parallel(&mode, &ch, &imp, &cfg, 1000, 9))
            .unwrap();
        assert_eq!(got, reference, "{threads} threads");
    }
}

#[test]
fn sweep_reports_each_point() {
    let mode = TxMode::preset("r300").unwrap();
    let cfg = LinkConfig::default();
    let r = sweep(
        &mode,
        &ChannelModel::ideal(),
        &ImpairmentConfig::ideal(),
        &cfg,
        &[f64::INFINITY, 4.0],
        300,
        1,
    )
    .unwrap();
    assert_eq!(r.len(), 2);
    assert_eq!(r[0].errors, 0);
    assert_eq!(r[0].eb_n0_db, f64::INFINITY);
    assert!((r[1].eb_n0_db - 4.0).abs() < 1e-9);
    assert!(r[1].errors > 0);
}
