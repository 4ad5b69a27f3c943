//! Scenario files: TOML with a versioned `schema` field.
//!
//! ```toml
//! schema = 1
//! seed = 7
//! n_symbols = 10000
//! bits = "1011"              # synth only
//!
//! [mode]
//! preset = "r250"            # or n_pulses / pulse_width / pulse_delay / symbol_rate
//! amplitude = "solved"       # "solved" | "table" | volts
//! amplitude_scale = 1.0
//!
//! [lo]
//! frequency_hz = 7.884e9
//! phase_deg = 0.0
//!
//! [impairments]              # volts, dB, degrees
//! dc_offset_i = 0.0
//! dc_offset_q = 0.0
//! gain_imbalance_db = 0.0
//! phase_imbalance_deg = 0.0
//! output_gain_db = 0.0
//!
//! [channel]
//! taps = [{ delay_s = 0.0, gain = 1.0, sign = 1 }]
//!
//! [noise]                    # one of the two
//! eb_n0_db = 12.0
//! # psd_w_per_hz = 1e-18
//!
//! [sweep]
//! eb_n0_db = [inf, 6.0, 8.0, 10.0]   # inf is a noiseless point
//!
//! [rx]
//! phase_deg = 0.0
//! frequency_offset_hz = 0.0
//! # lpf_cutoff_hz = 1.8e9
//!
//! [spectrum]
//! rbw_hz = 1e6
//! ```
//!
//! Every section is optional. Command-line flags override file values.

use std::path::Path;

use serde::Deserialize;
use trpc_core::compliance::{solve_amplitude, FccMask, AVERAGE_LIMIT_RBW_HZ};
use trpc_core::impairments::ImpairmentConfig;
use trpc_core::link::{ChannelModel, LinkConfig, Tap};
use trpc_core::trpc::{ClusterSpec, IqDrive, LoConfig, TxMode};
use trpc_core::waveform::{DEFAULT_LOAD_OHMS, RF_SAMPLE_RATE_HZ};

use crate::error::{SimError, SimResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Carrier used when the scenario names none: 3.827 GHz for the 1.65 ns
/// pulse, 7.884 GHz for shorter pulses.
pub fn default_lo_frequency(mode: &TxMode) -> f64 {
    if mode.cluster.pulse_width() > 1.2e-9 {
        3.827e9
    } else {
        7.884e9
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AmplitudeSetting {
    Volts(f64),
    Named(String),
}

impl Default for AmplitudeSetting {
    fn default() -> Self {
        AmplitudeSetting::Named("solved".into())
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub preset: Option<String>,
    pub n_pulses: Option<usize>,
    pub pulse_width: Option<f64>,
    pub pulse_delay: Option<f64>,
    pub symbol_rate: Option<f64>,
    #[serde(default)]
    pub amplitude: AmplitudeSetting,
    pub amplitude_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoSection {
    pub frequency_hz: Option<f64>,
    #[serde(default)]
    pub phase_deg: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpairmentSection {
    #[serde(default)]
    pub dc_offset_i: f64,
    #[serde(default)]
    pub dc_offset_q: f64,
    #[serde(default)]
    pub gain_imbalance_db: f64,
    #[serde(default)]
    pub phase_imbalance_deg: f64,
    #[serde(default)]
    pub output_gain_db: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TapEntry {
    pub delay_s: f64,
    pub gain: f64,
    #[serde(default = "positive")]
    pub sign: i8,
}

fn positive() -> i8 {
    1
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub taps: Vec<TapEntry>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub eb_n0_db: Option<f64>,
    pub psd_w_per_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub eb_n0_db: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RxSection {
    #[serde(default)]
    pub phase_deg: f64,
    #[serde(default)]
    pub frequency_offset_hz: f64,
    pub lpf_cutoff_hz: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub rbw_hz: Option<f64>,
    pub sample_rate_hz: Option<f64>,
}

/// The file as written.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: u32,
    pub seed: Option<u64>,
    pub n_symbols: Option<usize>,
    pub bits: Option<String>,
    #[serde(default)]
    pub mode: ModeSection,
    #[serde(default)]
    pub lo: LoSection,
    #[serde(default)]
    pub impairments: ImpairmentSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub rx: RxSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self {
            schema: SCHEMA_VERSION,
            seed: None,
            n_symbols: None,
            bits: None,
            mode: ModeSection::default(),
            lo: LoSection::default(),
            impairments: ImpairmentSection::default(),
            channel: ChannelSection::default(),
            noise: NoiseSection::default(),
            sweep: None,
            rx: RxSection::default(),
            spectrum: SpectrumSection::default(),
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str, origin: &Path) -> SimResult<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| SimError::format(origin, e))?;
        if file.schema != SCHEMA_VERSION {
            return Err(SimError::format(
                origin,
                format!(
                    "unsupported schema {} (expected {SCHEMA_VERSION})",
                    file.schema
                ),
            ));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::parse(&text, path)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<String>,
    pub lo_frequency: Option<f64>,
    pub seed: Option<u64>,
    pub rbw: Option<f64>,
    pub bits: Option<String>,
    pub amplitude_scale: Option<f64>,
    pub n_symbols: Option<usize>,
}

/// Noise setting for a single-point run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSetting {
    None,
    EbN0Db(f64),
    Psd(f64),
}

/// A scenario with every reference resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub mode: TxMode,
    pub lo: LoConfig,
    pub impairments: ImpairmentConfig,
    /// Taps only; noise comes from `noise` or the sweep.
    pub channel: ChannelModel,
    pub noise: NoiseSetting,
    pub sweep: Option<Vec<f64>>,
    pub seed: u64,
    pub n_symbols: usize,
    pub bits: Option<Vec<bool>>,
    pub rx_phase: f64,
    pub rx_frequency_offset: f64,
    pub lpf_cutoff: Option<f64>,
    pub rbw: f64,
    pub sample_rate: f64,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SYMBOLS: usize = 10_000;
pub const DEFAULT_RBW_HZ: f64 = 1e6;
pub const DEFAULT_SWEEP_DB: [f64; 7] = [6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0];

pub fn parse_bits(text: &str) -> SimResult<Vec<bool>> {
    let bits: Vec<bool> = text
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(SimError::Usage(format!("bit string contains `{c}`"))),
        })
        .collect::<SimResult<_>>()?;
    if bits.is_empty() {
        return Err(SimError::Usage("bit string is empty".into()));
    }
    Ok(bits)
}

fn resolve_cluster(section: &ModeSection, preset: Option<&str>) -> SimResult<TxMode> {
    let custom = section.n_pulses.is_some()
        || section.pulse_width.is_some()
        || section.symbol_rate.is_some();
    match (preset, custom) {
        (Some(name), _) => TxMode::preset(name).ok_or_else(|| {
            SimError::Usage(format!(
                "unknown mode `{name}`; expected one of {}",
                TxMode::NAMES.join(", ")
            ))
        }),
        (None, true) => {
            let (Some(n), Some(tp), Some(r)) =
                (section.n_pulses, section.pulse_width, section.symbol_rate)
            else {
                return Err(SimError::Usage(
                    "custom mode needs n_pulses, pulse_width and symbol_rate".into(),
                ));
            };
            let td = section.pulse_delay.unwrap_or(tp);
            let cluster = ClusterSpec::new(n, tp, td, r, 1e-3)?;
            Ok(TxMode::custom("custom", cluster))
        }
        (None, false) => Err(SimError::Usage(
            "no mode given; use --mode or a [mode] section".into(),
        )),
    }
}

impl Scenario {
    pub fn resolve(file: &ScenarioFile, ov: &Overrides) -> SimResult<Self> {
        let preset = ov.mode.as_deref().or(file.mode.preset.as_deref());
        let mut mode = resolve_cluster(&file.mode, preset)?;
        let lo_frequency = ov
            .lo_frequency
            .or(file.lo.frequency_hz)
            .unwrap_or_else(|| default_lo_frequency(&mode));
        let lo = LoConfig::new(lo_frequency)?.with_phase(file.lo.phase_deg.to_radians());
        let sample_rate = file.spectrum.sample_rate_hz.unwrap_or(RF_SAMPLE_RATE_HZ);

        let amplitude = match &file.mode.amplitude {
            AmplitudeSetting::Volts(v) => *v,
            AmplitudeSetting::Named(s) if s == "table" => mode.max_amplitude,
            AmplitudeSetting::Named(s) if s == "solved" => solve_amplitude(
                &mode,
                &FccMask::fcc_uwb(),
                AVERAGE_LIMIT_RBW_HZ,
                DEFAULT_LOAD_OHMS,
                &lo,
                sample_rate,
            )?,
            AmplitudeSetting::Named(s) => {
                return Err(SimError::Usage(format!(
                    "amplitude `{s}`: expected \"solved\", \"table\" or a number"
                )))
            }
        };
        let scale = ov
            .amplitude_scale
            .or(file.mode.amplitude_scale)
            .unwrap_or(1.0);
        mode = mode.with_cluster(mode.cluster.with_amplitude(amplitude * scale)?);

        let i = &file.impairments;
        let impairments = ImpairmentConfig {
            dc_offset_i: i.dc_offset_i,
            dc_offset_q: i.dc_offset_q,
            gain_imbalance_db: i.gain_imbalance_db,
            phase_imbalance_deg: i.phase_imbalance_deg,
            output_gain_db: i.output_gain_db,
        };
        impairments.validate()?;

        let channel = if file.channel.taps.is_empty() {
            ChannelModel::ideal()
        } else {
            ChannelModel::new(
                file.channel
                    .taps
                    .iter()
                    .map(|t| Tap::new(t.delay_s, t.gain, t.sign))
                    .collect(),
                0.0,
            )?
        };

        let noise = match (file.noise.eb_n0_db, file.noise.psd_w_per_hz) {
            (Some(_), Some(_)) => {
                return Err(SimError::Usage(
                    "[noise] takes eb_n0_db or psd_w_per_hz, not both".into(),
                ))
            }
            (Some(e), None) => NoiseSetting::EbN0Db(e),
            (None, Some(p)) => NoiseSetting::Psd(p),
            (None, None) => NoiseSetting::None,
        };

        let bits = ov
            .bits
            .as_deref()
            .or(file.bits.as_deref())
            .map(parse_bits)
            .transpose()?;
        let rbw = ov.rbw.or(file.spectrum.rbw_hz).unwrap_or(DEFAULT_RBW_HZ);
        if !(rbw.is_finite() && rbw > 0.0) {
            return Err(SimError::Usage("rbw must be positive".into()));
        }
        if let Some(s) = &file.sweep {
            if s.eb_n0_db
                .iter()
                .any(|e| e.is_nan() || *e == f64::NEG_INFINITY)
            {
                return Err(SimError::Usage(
                    "sweep points must be numbers or inf".into(),
                ));
            }
        }

        Ok(Self {
            mode,
            lo,
            impairments,
            channel,
            noise,
            sweep: file.sweep.as_ref().map(|s| s.eb_n0_db.clone()),
            seed: ov.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            n_symbols: ov.n_symbols.or(file.n_symbols).unwrap_or(DEFAULT_SYMBOLS),
            bits,
            rx_phase: file.rx.phase_deg.to_radians(),
            rx_frequency_offset: file.rx.frequency_offset_hz,
            lpf_cutoff: file.rx.lpf_cutoff_hz,
            rbw,
            sample_rate,
        })
    }

    pub fn link_config(&self) -> LinkConfig {
        let rx_lo = LoConfig {
            frequency: self.lo.frequency + self.rx_frequency_offset,
            phase: self.lo.phase + self.rx_phase,
            amplitude: 1.0,
        };
        LinkConfig {
            sample_rate: self.sample_rate,
            tx_lo: self.lo,
            rx_lo,
            lpf_cutoff: self.lpf_cutoff,
            drive: IqDrive::Identical,
            ..LinkConfig::default()
        }
    }

    /// Eb/N0 points of an SER run: the sweep, else the single noise setting,
    /// else 6 to 18 dB in 2 dB steps. `+∞` means noiseless; a raw PSD
    /// setting is reported as `None`.
    pub fn ser_points(&self) -> Vec<Option<f64>> {
        if let Some(s) = &self.sweep {
            return s.iter().map(|e| Some(*e)).collect();
        }
        match self.noise {
            NoiseSetting::None => DEFAULT_SWEEP_DB.iter().map(|e| Some(*e)).collect(),
            NoiseSetting::EbN0Db(e) => vec![Some(e)],
            NoiseSetting::Psd(_) => vec![None],
        }
    }
}
