//! Uniformly sampled signals and the power/dBm plumbing shared by every
//! other module.

use alloc::vec::Vec;

pub use num_complex::Complex64;

use crate::error::{ensure, Error, Result};

/// Instrument and antenna reference impedance.
pub const DEFAULT_LOAD_OHMS: f64 = 50.0;

/// Default rate for passband waveforms; covers an 8.2 GHz carrier plus the
/// widest cluster sideband with margin.
pub const RF_SAMPLE_RATE_HZ: f64 = 40e9;

/// Default rate for baseband waveforms. Gives at least 16 samples across the
/// narrowest (0.85 ns) component pulse.
pub const BASEBAND_SAMPLE_RATE_HZ: f64 = 20e9;

/// Sample storage: one real rail, or an I/Q pair per instant.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Quadrature(Vec<Complex64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Quadrature(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of rails (1 = real, 2 = I/Q).
    pub fn channels(&self) -> usize {
        match self {
            Samples::Real(_) => 1,
            Samples::Quadrature(_) => 2,
        }
    }
}

/// A uniformly sampled waveform in volts.
///
/// Construction validates the invariants (positive rate, at least one sample,
/// every sample finite), so a value of this type is always well formed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    sample_rate: f64,
    start_time: f64,
    samples: Samples,
}

impl SampledWaveform {
    pub fn new(sample_rate: f64, start_time: f64, samples: Samples) -> Result<Self> {
        ensure(
            sample_rate.is_finite() && sample_rate > 0.0,
            "sample_rate",
            "must be positive and finite",
        )?;
        ensure(start_time.is_finite(), "start_time", "must be finite")?;
        ensure(
            !samples.is_empty(),
            "samples",
            "at least one sample required",
        )?;
        let finite = match &samples {
            Samples::Real(v) => v.iter().all(|x| x.is_finite()),
            Samples::Quadrature(v) => v.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        };
        ensure(finite, "samples", "NaN or infinite sample")?;
        Ok(Self {
            sample_rate,
            start_time,
            samples,
        })
    }

    pub fn real(sample_rate: f64, start_time: f64, samples: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate, start_time, Samples::Real(samples))
    }

    pub fn quadrature(sample_rate: f64, start_time: f64, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(sample_rate, start_time, Samples::Quadrature(samples))
    }

    /// Builds an I/Q waveform from two aligned real rails.
    pub fn from_rails(i: &SampledWaveform, q: &SampledWaveform) -> Result<Self> {
        i.check_aligned(q)?;
        let (iv, qv) = (i.real_samples()?, q.real_samples()?);
        let z = iv
            .iter()
            .zip(qv)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        Self::quadrature(i.sample_rate, i.start_time, z)
    }

    /// Builds a real waveform from a closure of time, sampled at `t0 + k/fs`.
    pub fn from_fn(
        sample_rate: f64,
        start_time: f64,
        len: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let v = (0..len)
            .map(|k| f(start_time + k as f64 / sample_rate))
            .collect();
        Self::real(sample_rate, start_time, v)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn into_samples(self) -> Samples {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_real(&self) -> bool {
        matches!(self.samples, Samples::Real(_))
    }

    /// Record length `N / fs`.
    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    /// Time stamp of sample `k`.
    pub fn time_at(&self, k: usize) -> f64 {
        self.start_time + k as f64 / self.sample_rate
    }

    /// Real samples, or a mismatch error for I/Q data.
    pub fn real_samples(&self) -> Result<&[f64]> {
        match &self.samples {
            Samples::Real(v) => Ok(v),
            Samples::Quadrature(_) => Err(Error::Mismatch("expected a real waveform")),
        }
    }

    pub fn quadrature_samples(&self) -> Result<&[Complex64]> {
        match &self.samples {
            Samples::Quadrature(v) => Ok(v),
            Samples::Real(_) => Err(Error::Mismatch("expected an I/Q waveform")),
        }
    }

    /// Splits an I/Q waveform into its two real rails.
    pub fn rails(&self) -> Result<(SampledWaveform, SampledWaveform)> {
        let z = self.quadrature_samples()?;
        let i = z.iter().map(|c| c.re).collect();
        let q = z.iter().map(|c| c.im).collect();
        Ok((
            Self::real(self.sample_rate, self.start_time, i)?,
            Self::real(self.sample_rate, self.start_time, q)?,
        ))
    }

    /// Every sample multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let samples = match &self.samples {
            Samples::Real(v) => Samples::Real(v.iter().map(|x| x * k).collect()),
            Samples::Quadrature(v) => Samples::Quadrature(v.iter().map(|z| z * k).collect()),
        };
        Self::new(self.sample_rate, self.start_time, samples)
    }

    /// Same samples, different time origin.
    pub fn with_start_time(mut self, start_time: f64) -> Result<Self> {
        ensure(start_time.is_finite(), "start_time", "must be finite")?;
        self.start_time = start_time;
        Ok(self)
    }

    /// Contiguous sub-record `[from, from + len)`.
    pub fn slice(&self, from: usize, len: usize) -> Result<Self> {
        ensure(
            len > 0 && from + len <= self.len(),
            "slice",
            "range outside the record",
        )?;
        let samples = match &self.samples {
            Samples::Real(v) => Samples::Real(v[from..from + len].to_vec()),
            Samples::Quadrature(v) => Samples::Quadrature(v[from..from + len].to_vec()),
        };
        Self::new(self.sample_rate, self.time_at(from), samples)
    }

    /// Both waveforms share sample rate and length.
    pub fn check_aligned(&self, other: &SampledWaveform) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Mismatch("sample counts differ"));
        }
        if (self.sample_rate - other.sample_rate).abs() > 1e-9 * self.sample_rate {
            return Err(Error::Mismatch("sample rates differ"));
        }
        Ok(())
    }
}

/// Mean power of the record delivered into `load_impedance`, in watts.
///
/// Real rails use `v²/Z`. I/Q records use `(i² + q²)/Z`, i.e. the rails are
/// counted as two independent real signals. After ideal up-conversion with
/// `i·cos − q·sin` the passband power is half this figure.
pub fn waveform_power(wave: &SampledWaveform, load_impedance: f64) -> Result<f64> {
    ensure(
        load_impedance.is_finite() && load_impedance > 0.0,
        "load_impedance",
        "must be positive",
    )?;
    let sum: f64 = match wave.samples() {
        Samples::Real(v) => v.iter().map(|x| x * x).sum(),
        Samples::Quadrature(v) => v.iter().map(|z| z.norm_sqr()).sum(),
    };
    Ok(sum / wave.len() as f64 / load_impedance)
}

/// Watts to dBm.
pub fn watts_to_dbm(power_w: f64) -> Result<f64> {
    ensure(
        power_w.is_finite() && power_w > 0.0,
        "power",
        "must be positive for a logarithmic scale",
    )?;
    Ok(10.0 * libm::log10(power_w * 1e3))
}

/// dBm to watts.
pub fn dbm_to_watts(power_dbm: f64) -> f64 {
    libm::pow(10.0, power_dbm / 10.0) * 1e-3
}

/// Power ratio in dB.
pub(crate) fn db(ratio: f64) -> f64 {
    10.0 * libm::log10(ratio)
}
