//! Serializable report rows and their writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use trpc_core::compliance::{FccMask, FccVerdict};
use trpc_core::link::SerResult;
use trpc_core::SpectrumEstimate;

use crate::error::{SimError, SimResult};

/// Violations listed in a report, worst first; the full count is kept.
pub const MAX_LISTED_VIOLATIONS: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct ViolationRow {
    pub frequency_hz: f64,
    pub power_dbm: f64,
    pub limit_dbm: f64,
    pub constraint: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplianceReport {
    pub passes: bool,
    pub worst_margin_db: f64,
    pub worst_frequency_hz: f64,
    pub binding_constraint: &'static str,
    pub rbw_hz: f64,
    pub average_limit_dbm: f64,
    pub peak_limit_dbm: f64,
    pub peak_bin_frequency_hz: f64,
    pub peak_bin_power_dbm: f64,
    pub violation_count: usize,
    pub violations: Vec<ViolationRow>,
}

impl ComplianceReport {
    pub fn new(spectrum: &SpectrumEstimate, verdict: &FccVerdict, mask: &FccMask) -> Self {
        let mut v: Vec<_> = verdict.violations.clone();
        v.sort_by(|a, b| (a.limit_dbm - a.power_dbm).total_cmp(&(b.limit_dbm - b.power_dbm)));
        let (pf, pp) = spectrum.peak();
        Self {
            passes: verdict.passes,
            worst_margin_db: verdict.worst_margin,
            worst_frequency_hz: verdict.worst_frequency,
            binding_constraint: verdict.binding_constraint.as_str(),
            rbw_hz: spectrum.rbw(),
            average_limit_dbm: mask.average_limit_dbm(spectrum.rbw()),
            peak_limit_dbm: mask.peak_limit_dbm(spectrum.rbw()),
            peak_bin_frequency_hz: pf,
            peak_bin_power_dbm: pp,
            violation_count: v.len(),
            violations: v
                .iter()
                .take(MAX_LISTED_VIOLATIONS)
                .map(|b| ViolationRow {
                    frequency_hz: b.frequency,
                    power_dbm: b.power_dbm,
                    limit_dbm: b.limit_dbm,
                    constraint: b.constraint.as_str(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub mode: String,
    pub data_rate_bps: f64,
    pub n_pulses: usize,
    pub pulse_width_s: f64,
    pub lo_frequency_hz: f64,
    pub p_peak_dbm: f64,
    pub p_peak_reference_dbm: f64,
    pub p_peak_delta_db: f64,
    pub binding_constraint: &'static str,
    pub amplitude_v: f64,
    pub amplitude_reference_v: f64,
    pub amplitude_delta_pct: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SerRow {
    pub eb_n0_db: f64,
    pub ser: f64,
    pub ci95: f64,
    pub symbols: u64,
    pub errors: u64,
}

impl From<&SerResult> for SerRow {
    fn from(r: &SerResult) -> Self {
        Self {
            eb_n0_db: r.eb_n0_db,
            ser: r.ser,
            ci95: r.ci95,
            symbols: r.symbols,
            errors: r.errors,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub frequency_hz: f64,
    pub power_dbm: f64,
}

/// CSV rows to `path`, or to stdout when `path` is `None`.
pub fn write_csv_rows<T: Serialize>(path: Option<&Path>, rows: &[T]) -> SimResult<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| SimError::io(p, e))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    let origin = path.unwrap_or(Path::new("<stdout>"));
    let mut w = csv::Writer::from_writer(sink);
    for row in rows {
        w.serialize(row).map_err(|e| SimError::format(origin, e))?;
    }
    w.flush().map_err(|e| SimError::io(origin, e))
}

pub fn spectrum_rows(spectrum: &SpectrumEstimate) -> Vec<SpectrumRow> {
    spectrum
        .bin_frequencies()
        .iter()
        .zip(spectrum.bin_powers())
        .map(|(&f, &p)| SpectrumRow {
            frequency_hz: f,
            power_dbm: p,
        })
        .collect()
}

/// Pretty JSON to `path`, or to stdout when `path` is `None`.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> SimResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| SimError::format(path.unwrap_or(Path::new("<stdout>")), e))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| SimError::io(p, e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
