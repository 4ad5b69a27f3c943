//! Waveform files.
//!
//! CSV layout: three `key,value` header rows (`sample_rate_hz`,
//! `start_time_s`, `channels`), a column row (`v` or `i,q`), then one sample
//! per row.
//!
//! Binary layout (little endian): the magic `TRPCWAV1`, `f64` sample rate,
//! `f64` start time, `u32` channel count, `u64` sample count, then the
//! samples as `f64` (I and Q interleaved for two channels).
//!
//! The format follows the extension: `.csv` is text, anything else binary.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use trpc_core::waveform::{SampledWaveform, Samples};

use crate::error::{SimError, SimResult};

pub const MAGIC: &[u8; 8] = b"TRPCWAV1";

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn write_waveform(path: &Path, wave: &SampledWaveform) -> SimResult<()> {
    if is_csv(path) {
        write_csv(path, wave)
    } else {
        write_binary(path, wave)
    }
}

pub fn read_waveform(path: &Path) -> SimResult<SampledWaveform> {
    if is_csv(path) {
        read_csv(path)
    } else {
        read_binary(path)
    }
}

fn write_csv(path: &Path, wave: &SampledWaveform) -> SimResult<()> {
    let file = File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| SimError::format(path, e);
    w.write_record(["sample_rate_hz", &wave.sample_rate().to_string()])
        .map_err(csv_err)?;
    w.write_record(["start_time_s", &wave.start_time().to_string()])
        .map_err(csv_err)?;
    w.write_record(["channels", &wave.samples().channels().to_string()])
        .map_err(csv_err)?;
    match wave.samples() {
        Samples::Real(v) => {
            w.write_record(["v"]).map_err(csv_err)?;
            for x in v {
                w.write_record([x.to_string()]).map_err(csv_err)?;
            }
        }
        Samples::Quadrature(v) => {
            w.write_record(["i", "q"]).map_err(csv_err)?;
            for z in v {
                w.write_record([z.re.to_string(), z.im.to_string()])
                    .map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

fn read_csv(path: &Path) -> SimResult<SampledWaveform> {
    let file = File::open(path).map_err(|e| SimError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let bad = |reason: &str| SimError::format(path, reason);
    let mut records = r.records();
    let mut header = |key: &str| -> SimResult<f64> {
        let rec = records
            .next()
            .ok_or_else(|| bad("truncated header"))?
            .map_err(|e| SimError::format(path, e))?;
        if rec.get(0) != Some(key) {
            return Err(SimError::format(
                path,
                format!("expected `{key}` header row"),
            ));
        }
        rec.get(1)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| SimError::format(path, format!("bad value for `{key}`")))
    };
    let fs = header("sample_rate_hz")?;
    let t0 = header("start_time_s")?;
    let channels = header("channels")?;
    records
        .next()
        .ok_or_else(|| bad("missing column row"))?
        .map_err(|e| SimError::format(path, e))?;
    let parse = |s: Option<&str>| -> SimResult<f64> {
        s.and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad("unparseable sample"))
    };
    let samples = if channels == 1.0 {
        let v = records
            .map(|rec| parse(rec.map_err(|e| SimError::format(path, e))?.get(0)))
            .collect::<SimResult<Vec<f64>>>()?;
        Samples::Real(v)
    } else if channels == 2.0 {
        let v = records
            .map(|rec| {
                let rec = rec.map_err(|e| SimError::format(path, e))?;
                Ok(trpc_core::waveform::Complex64::new(
                    parse(rec.get(0))?,
                    parse(rec.get(1))?,
                ))
            })
            .collect::<SimResult<Vec<_>>>()?;
        Samples::Quadrature(v)
    } else {
        return Err(bad("channels must be 1 or 2"));
    };
    Ok(SampledWaveform::new(fs, t0, samples)?)
}

fn write_binary(path: &Path, wave: &SampledWaveform) -> SimResult<()> {
    let file = File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| SimError::io(path, e));
    put(MAGIC)?;
    put(&wave.sample_rate().to_le_bytes())?;
    put(&wave.start_time().to_le_bytes())?;
    put(&(wave.samples().channels() as u32).to_le_bytes())?;
    put(&(wave.len() as u64).to_le_bytes())?;
    match wave.samples() {
        Samples::Real(v) => {
            for x in v {
                put(&x.to_le_bytes())?;
            }
        }
        Samples::Quadrature(v) => {
            for z in v {
                put(&z.re.to_le_bytes())?;
                put(&z.im.to_le_bytes())?;
            }
        }
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

fn read_binary(path: &Path) -> SimResult<SampledWaveform> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| SimError::io(path, e))?;
    let bad = |reason: &str| SimError::format(path, reason);
    if bytes.len() < 36 || &bytes[..8] != MAGIC {
        return Err(bad("not a TRPCWAV1 file"));
    }
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let fs = f64_at(8);
    let t0 = f64_at(16);
    let channels = u32::from_le_bytes(bytes[24..28].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[28..36].try_into().unwrap()) as usize;
    if !(1..=2).contains(&channels) {
        return Err(bad("channels must be 1 or 2"));
    }
    let payload = &bytes[36..];
    if payload.len() != count * channels * 8 {
        return Err(bad("sample count does not match the payload"));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let samples = if channels == 1 {
        Samples::Real(values)
    } else {
        Samples::Quadrature(
            values
                .chunks_exact(2)
                .map(|p| trpc_core::waveform::Complex64::new(p[0], p[1]))
                .collect(),
        )
    };
    Ok(SampledWaveform::new(fs, t0, samples)?)
}
