//! Link impairments: multipath channel, carrier frequency offset, and noise.
//!
//! The full impairment chain applies the channel first, then the CFO phase
//! ramp, then additive noise — the received stream is
//! `r = ramp(conv(h, s)) + n`.

use crate::error::{Error, Result};
use crate::scalar::{cast, cis, Scalar};
use crate::stream::{power, SampleStream};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Multipath channel as an explicit impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel<T: Scalar> {
    pub taps: Vec<Complex<T>>,
}

impl<T: Scalar> ChannelModel<T> {
    pub fn new(taps: Vec<Complex<T>>) -> Result<Self> {
        if taps.is_empty() || taps.iter().all(|t| t.norm_sqr() == T::zero()) {
            return Err(Error::EmptyChannel);
        }
        Ok(Self { taps })
    }

    pub fn identity() -> Self {
        Self {
            taps: vec![Complex::new(T::one(), T::zero())],
        }
    }
}

/// Carrier frequency offset: per-sample phase `omega * k + phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfoModel {
    /// Frequency offset in radians per sample.
    pub omega: f64,
    /// Starting phase offset in radians.
    pub phi: f64,
}

impl CfoModel {
    pub fn none() -> Self {
        Self { omega: 0.0, phi: 0.0 }
    }

    pub fn from_freq_hz(freq_hz: f64, sample_rate_hz: f64, phi: f64) -> Self {
        Self {
            omega: 2.0 * std::f64::consts::PI * freq_hz / sample_rate_hz,
            phi,
        }
    }
}

/// Direct linear convolution truncated to the input length; leading samples
/// convolve against zeros (cold start). `lead_in` optionally supplies the
/// samples that preceded `x`, warm-starting the convolution.
pub(crate) fn convolve_trunc<T: Scalar>(
    x: &[Complex<T>],
    taps: &[Complex<T>],
    lead_in: &[Complex<T>],
) -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (l, h) in taps.iter().enumerate() {
            let idx = k as isize - l as isize;
            let v = if idx >= 0 {
                x[idx as usize]
            } else {
                let back = (-idx) as usize; // 1-based distance into lead_in
                if back <= lead_in.len() {
                    lead_in[lead_in.len() - back]
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            };
            acc += *h * v;
        }
        out.push(acc);
    }
    out
}

/// Apply the multipath channel: linear convolution truncated to the input
/// length.
pub fn apply_channel<T: Scalar>(
    x: &SampleStream<T>,
    ch: &ChannelModel<T>,
) -> Result<SampleStream<T>> {
    if ch.taps.is_empty() {
        return Err(Error::EmptyChannel);
    }
    Ok(SampleStream::from_samples(
        convolve_trunc(&x.samples, &ch.taps, &[]),
        x.sample_rate_hz,
    ))
}

/// Rotate samples by the phase ramp `omega * (start_index + k) + phi`.
pub(crate) fn rotate_samples<T: Scalar>(
    x: &[Complex<T>],
    omega: f64,
    phi: f64,
    start_index: i64,
) -> Vec<Complex<T>> {
    x.iter()
        .enumerate()
        .map(|(k, s)| s * cis::<T>(omega * (start_index + k as i64) as f64 + phi))
        .collect()
}

/// Apply the CFO phase ramp; `start_index` lets segments continue a
/// packet-wide ramp.
pub fn apply_cfo<T: Scalar>(
    x: &SampleStream<T>,
    cfo: &CfoModel,
    start_index: usize,
) -> SampleStream<T> {
    SampleStream::from_samples(
        rotate_samples(&x.samples, cfo.omega, cfo.phi, start_index as i64),
        x.sample_rate_hz,
    )
}

/// Add circularly-symmetric complex Gaussian noise at the requested SNR
/// relative to the measured signal power. `snr_db = f64::INFINITY` is the
/// no-noise sentinel. Deterministic under `seed`.
pub fn add_awgn<T: Scalar>(
    x: &SampleStream<T>,
    snr_db: f64,
    seed: u64,
) -> Result<SampleStream<T>> {
    if snr_db == f64::INFINITY {
        return Ok(x.clone());
    }
    let p = power(&x.samples).to_f64().unwrap_or(0.0);
    if p <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let sigma2 = p / 10f64.powf(snr_db / 10.0);
    Ok(add_noise_with_power(x, sigma2, seed))
}

/// Add complex Gaussian noise with a given per-sample noise power.
pub fn add_noise_with_power<T: Scalar>(
    x: &SampleStream<T>,
    noise_power: f64,
    seed: u64,
) -> SampleStream<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = (noise_power / 2.0).sqrt();
    let samples = x
        .samples
        .iter()
        .map(|v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v + Complex::new(cast::<T>(re * s), cast::<T>(im * s))
        })
        .collect();
    SampleStream::from_samples(samples, x.sample_rate_hz)
}

/// Synthetic channel profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelProfile {
    Flat,
    ExponentialDecay,
}

impl std::str::FromStr for ChannelProfile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(ChannelProfile::Flat),
            "exp" | "exponential" | "exponential_decay" => Ok(ChannelProfile::ExponentialDecay),
            other => Err(format!("unknown channel profile `{other}`")),
        }
    }
}

/// Per-tap complex Gaussian fading with `E[|h[l]|^2] = exp(-l / rms)`,
/// before normalization.
fn raw_exponential_taps(
    rms_delay_taps: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Complex<f64>> {
    (0..n)
        .map(|l| {
            let sigma = ((-(l as f64) / rms_delay_taps).exp() / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(re * sigma, im * sigma)
        })
        .collect()
}

/// Draw a unit-energy random channel.
///
/// The exponential profile has `E[|h[l]|^2]` proportional to
/// `exp(-l / rms_delay_taps)` with per-tap complex Gaussian fading over
/// `max_taps` taps; the flat profile is the single tap `[1]`. Each draw is
/// normalized to unit energy.
pub fn random_channel<T: Scalar>(
    profile: ChannelProfile,
    rms_delay_taps: f64,
    max_taps: usize,
    seed: u64,
) -> Result<ChannelModel<T>> {
    match profile {
        ChannelProfile::Flat => Ok(ChannelModel::identity()),
        ChannelProfile::ExponentialDecay => {
            if max_taps == 0 {
                return Err(Error::EmptyChannel);
            }
            if !(rms_delay_taps > 0.0) || rms_delay_taps > max_taps as f64 / 3.0 {
                return Err(Error::InvalidConfig(format!(
                    "rms delay {rms_delay_taps} taps outside (0, {}]",
                    max_taps as f64 / 3.0
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut taps = raw_exponential_taps(rms_delay_taps, max_taps, &mut rng);
            let energy: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
            let g = 1.0 / energy.sqrt();
            for t in taps.iter_mut() {
                *t *= g;
            }
            ChannelModel::new(
                taps.into_iter()
                    .map(|t| Complex::new(cast(t.re), cast(t.im)))
                    .collect(),
            )
        }
    }
}
