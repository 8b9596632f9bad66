//! IQ sample file I/O.
//!
//! Two interleaved little-endian formats: `cf32le` (32-bit float I, Q) and
//! `ci16le` (signed 16-bit with full scale 32767 <-> 1.0).

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use crate::stream::SampleStream;
use num_complex::Complex;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IqFormat {
    Cf32Le,
    Ci16Le,
}

impl IqFormat {
    pub fn bytes_per_sample(self) -> usize {
        match self {
            IqFormat::Cf32Le => 8,
            IqFormat::Ci16Le => 4,
        }
    }
}

impl std::str::FromStr for IqFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cf32le" | "cf32" => Ok(IqFormat::Cf32Le),
            "ci16le" | "ci16" | "cs16" => Ok(IqFormat::Ci16Le),
            other => Err(format!("unknown IQ format `{other}`")),
        }
    }
}

impl std::fmt::Display for IqFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IqFormat::Cf32Le => write!(f, "cf32le"),
            IqFormat::Ci16Le => write!(f, "ci16le"),
        }
    }
}

/// A recorded IQ capture: samples plus rate and optional tuner metadata.
#[derive(Debug, Clone)]
pub struct IqRecording<T: Scalar> {
    pub stream: SampleStream<T>,
    /// Metadata only; baseband processing ignores it.
    pub center_freq_hz: f64,
    pub source: Option<PathBuf>,
}

fn i16_of<T: Scalar>(v: T) -> i16 {
    let x = v.to_f64().unwrap_or(0.0).clamp(-1.0, 1.0);
    (x * 32767.0).round() as i16
}

/// Round-trip a stream through the format's quantization in memory; the
/// result matches what a save/load cycle would produce, bit for bit.
pub fn quantize<T: Scalar>(stream: &SampleStream<T>, format: IqFormat) -> SampleStream<T> {
    let samples = stream
        .samples
        .iter()
        .map(|s| match format {
            IqFormat::Cf32Le => Complex::new(
                cast::<T>(s.re.to_f64().unwrap_or(0.0) as f32 as f64),
                cast::<T>(s.im.to_f64().unwrap_or(0.0) as f32 as f64),
            ),
            IqFormat::Ci16Le => Complex::new(
                cast::<T>(i16_of(s.re) as f64 / 32767.0),
                cast::<T>(i16_of(s.im) as f64 / 32767.0),
            ),
        })
        .collect();
    SampleStream::from_samples(samples, stream.sample_rate_hz)
}

pub fn save_iq<T: Scalar>(stream: &SampleStream<T>, path: &Path, format: IqFormat) -> Result<()> {
    let mut bytes = Vec::with_capacity(stream.len() * format.bytes_per_sample());
    for s in &stream.samples {
        match format {
            IqFormat::Cf32Le => {
                bytes.extend_from_slice(&(s.re.to_f64().unwrap_or(0.0) as f32).to_le_bytes());
                bytes.extend_from_slice(&(s.im.to_f64().unwrap_or(0.0) as f32).to_le_bytes());
            }
            IqFormat::Ci16Le => {
                bytes.extend_from_slice(&i16_of(s.re).to_le_bytes());
                bytes.extend_from_slice(&i16_of(s.im).to_le_bytes());
            }
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn load_iq<T: Scalar>(
    path: &Path,
    format: IqFormat,
    sample_rate_hz: f64,
) -> Result<IqRecording<T>> {
    let bytes = fs::read(path)?;
    if bytes.is_empty() {
        return Err(Error::Format(format!("{}: empty IQ file", path.display())));
    }
    let bps = format.bytes_per_sample();
    if bytes.len() % bps != 0 {
        return Err(Error::Format(format!(
            "{}: {} bytes is not a whole number of {} samples \
             (truncated file or odd sample count)",
            path.display(),
            bytes.len(),
            format
        )));
    }
    let mut samples = Vec::with_capacity(bytes.len() / bps);
    match format {
        IqFormat::Cf32Le => {
            for chunk in bytes.chunks_exact(8) {
                let re = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
                let im = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
                samples.push(Complex::new(
                    cast::<T>(re as f64),
                    cast::<T>(im as f64),
                ));
            }
        }
        IqFormat::Ci16Le => {
            for chunk in bytes.chunks_exact(4) {
                let re = i16::from_le_bytes(chunk[0..2].try_into().unwrap());
                let im = i16::from_le_bytes(chunk[2..4].try_into().unwrap());
                samples.push(Complex::new(
                    cast::<T>(re as f64 / 32767.0),
                    cast::<T>(im as f64 / 32767.0),
                ));
            }
        }
    }
    let stream = SampleStream::new(samples, sample_rate_hz)?;
    Ok(IqRecording {
        stream,
        center_freq_hz: 0.0,
        source: Some(path.to_path_buf()),
    })
}
