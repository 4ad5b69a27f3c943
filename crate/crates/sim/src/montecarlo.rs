//! Parallel Monte Carlo over the core SER harness. Blocks are seeded by
//! index, so the result is identical to the sequential run for any thread
//! count.

use rayon::prelude::*;
use trpc_core::impairments::ImpairmentConfig;
use trpc_core::link::{noise_psd_for_eb_n0, ChannelModel, LinkConfig, SerPlan, SerResult};
use trpc_core::trpc::TxMode;

use crate::error::SimResult;

pub fn run_ser_parallel(
    mode: &TxMode,
    channel: &ChannelModel,
    impairments: &ImpairmentConfig,
    cfg: &LinkConfig,
    n_symbols: usize,
    seed: u64,
) -> SimResult<SerResult> {
    let plan = SerPlan::new(mode, channel, impairments, cfg, n_symbols, seed)?;
    let counts = (0..plan.n_blocks())
        .into_par_iter()
        .map(|b| plan.count_block(b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(plan.finish(counts)?)
}

/// Channel with the noise PSD for `eb_n0_db` (`+∞` is noiseless).
pub fn channel_at(
    mode: &TxMode,
    channel: &ChannelModel,
    impairments: &ImpairmentConfig,
    cfg: &LinkConfig,
    eb_n0_db: f64,
) -> SimResult<ChannelModel> {
    let psd = if eb_n0_db == f64::INFINITY {
        0.0
    } else {
        noise_psd_for_eb_n0(mode, impairments, cfg, eb_n0_db)?
    };
    Ok(channel.with_noise_psd(psd)?)
}

/// One result per Eb/N0 point, in order. Each point reuses `seed`.
pub fn sweep(
    mode: &TxMode,
    channel: &ChannelModel,
    impairments: &ImpairmentConfig,
    cfg: &LinkConfig,
    points_db: &[f64],
    n_symbols: usize,
    seed: u64,
) -> SimResult<Vec<SerResult>> {
    points_db
        .iter()
        .map(|&e| {
            let ch = channel_at(mode, channel, impairments, cfg, e)?;
            run_ser_parallel(mode, &ch, impairments, cfg, n_symbols, seed)
        })
        .collect()
}
