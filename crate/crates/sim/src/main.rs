use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trpc_core::compliance::FccMask;
use trpc_sim::commands;
use trpc_sim::exit;
use trpc_sim::report::{self, ComplianceReport, SerRow};
use trpc_sim::scenario::{parse_bits, Overrides, Scenario, ScenarioFile};
use trpc_sim::wavefile::{read_waveform, write_waveform};
use trpc_sim::{SimError, SimResult};

/// TRPC ultra-wideband waveform, compliance and link simulator.
#[derive(Parser)]
#[command(name = "trpc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Mode preset: r10, r20, r40, r100, r200, r250, r300.
    #[arg(long)]
    mode: Option<String>,
    /// Monte Carlo / random-bit seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Carrier frequency in Hz.
    #[arg(long)]
    lo: Option<f64>,
    /// Multiplies the cluster amplitude.
    #[arg(long)]
    amplitude_scale: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WaveFormat {
    Csv,
    Bin,
}

#[derive(Subcommand)]
enum Command {
    /// Write baseband and RF waveforms for a bit pattern.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Bit pattern, e.g. 1011.
        #[arg(long)]
        bits: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: WaveFormat,
    },
    /// Emulate a spectrum analyzer on the transmitted signal and check the
    /// FCC mask.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Resolution bandwidth in Hz.
        #[arg(long)]
        rbw: Option<f64>,
        /// Repeating bit pattern instead of the default PRBS-9 sequence.
        #[arg(long)]
        bits: Option<String>,
        /// Spectrum CSV; the verdict goes next to it with a .json extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo symbol error rate over an Eb/N0 sweep.
    Ser {
        #[command(flatten)]
        common: Common,
        /// Symbols per point.
        #[arg(long)]
        symbols: Option<usize>,
        /// Output CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-mode peak power and amplitude limits.
    Table1 {
        /// Output file, .json or .csv (text table on stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a waveform file against the FCC mask.
    Comply {
        /// Waveform file (.csv or binary).
        #[arg(long)]
        input: PathBuf,
        /// Resolution bandwidth in Hz.
        #[arg(long, default_value_t = 1e6)]
        rbw: f64,
        /// Report JSON (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn scenario(common: &Common, extra: Overrides) -> SimResult<Scenario> {
    let file = match &common.scenario {
        Some(p) => ScenarioFile::load(p)?,
        None => ScenarioFile::default(),
    };
    let ov = Overrides {
        mode: common.mode.clone(),
        lo_frequency: common.lo,
        seed: common.seed,
        amplitude_scale: common.amplitude_scale,
        ..extra
    };
    Scenario::resolve(&file, &ov)
}

fn ensure_dir(dir: &Path) -> SimResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))
}

fn verdict_status(report: &ComplianceReport) -> i32 {
    eprintln!(
        "{}: worst margin {:.2} dB at {:.4} GHz ({} limit), peak bin {:.2} dBm",
        if report.passes { "PASS" } else { "FAIL" },
        report.worst_margin_db,
        report.worst_frequency_hz / 1e9,
        report.binding_constraint,
        report.peak_bin_power_dbm,
    );
    if report.passes {
        exit::OK
    } else {
        exit::MASK_VIOLATION
    }
}

fn run(cli: Cli) -> SimResult<i32> {
    match cli.command {
        Command::Synth {
            common,
            bits,
            out,
            format,
        } => {
            if let Some(b) = &bits {
                parse_bits(b)?;
            }
            let scn = scenario(
                &common,
                Overrides {
                    bits,
                    ..Default::default()
                },
            )?;
            let (baseband, rf) = commands::synthesize(&scn)?;
            ensure_dir(&out)?;
            let ext = match format {
                WaveFormat::Csv => "csv",
                WaveFormat::Bin => "bin",
            };
            write_waveform(&out.join(format!("baseband.{ext}")), &baseband)?;
            write_waveform(&out.join(format!("rf.{ext}")), &rf)?;
            eprintln!(
                "{}: {} symbols, amplitude {:.3} mV, LO {:.4} GHz",
                scn.mode.name,
                (baseband.duration() * scn.mode.cluster.symbol_rate()).round(),
                scn.mode.cluster.amplitude() * 1e3,
                scn.lo.frequency / 1e9,
            );
            Ok(exit::OK)
        }
        Command::Spectrum {
            common,
            rbw,
            bits,
            out,
        } => {
            let scn = scenario(
                &common,
                Overrides {
                    rbw,
                    bits,
                    ..Default::default()
                },
            )?;
            commands::check_rbw(scn.rbw)?;
            let (spectrum, verdict) = commands::spectrum(&scn)?;
            let report = ComplianceReport::new(&spectrum, &verdict, &FccMask::fcc_uwb());
            match &out {
                Some(path) => {
                    report::write_csv_rows(Some(path), &report::spectrum_rows(&spectrum))?;
                    report::write_json(Some(&path.with_extension("json")), &report)?;
                }
                None => report::write_json(None, &report)?,
            }
            Ok(verdict_status(&report))
        }
        Command::Ser {
            common,
            symbols,
            out,
        } => {
            let scn = scenario(
                &common,
                Overrides {
                    n_symbols: symbols,
                    ..Default::default()
                },
            )?;
            let results = commands::ser(&scn)?;
            let rows: Vec<SerRow> = results.iter().map(SerRow::from).collect();
            report::write_csv_rows(out.as_deref(), &rows)?;
            Ok(exit::OK)
        }
        Command::Table1 { out } => {
            let rows = commands::table1()?;
            match &out {
                Some(p) if p.extension().is_some_and(|e| e == "json") => {
                    report::write_json(Some(p), &rows)?
                }
                Some(p) => report::write_csv_rows(Some(p), &rows)?,
                None => print!("{}", commands::format_table1(&rows)),
            }
            Ok(exit::OK)
        }
        Command::Comply { input, rbw, out } => {
            commands::check_rbw(rbw)?;
            let wave = read_waveform(&input)?;
            let (spectrum, verdict) = commands::measure(&wave, rbw)?;
            let report = ComplianceReport::new(&spectrum, &verdict, &FccMask::fcc_uwb());
            report::write_json(out.as_deref(), &report)?;
            Ok(verdict_status(&report))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE as u8
            } else {
                exit::OK as u8
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
