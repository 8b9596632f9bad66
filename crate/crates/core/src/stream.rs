//! Complex-sample buffer type and the shared numeric utilities built on it.

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use num_complex::Complex;

/// Floor used when converting a possibly-zero power to dB.
pub const DB_FLOOR: f64 = -200.0;

/// A buffer of complex baseband samples with an associated sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream<T: Scalar> {
    pub samples: Vec<Complex<T>>,
    pub sample_rate_hz: f64,
}

impl<T: Scalar> SampleStream<T> {
    /// Build a stream, validating that the rate is positive and every sample
    /// is finite.
    pub fn new(samples: Vec<Complex<T>>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz > 0.0) {
            return Err(Error::BadSampleRate(sample_rate_hz));
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.re.is_finite() || !s.im.is_finite() {
                return Err(Error::NonFiniteSample(i));
            }
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// Build a stream from values already known to be finite.
    pub fn from_samples(samples: Vec<Complex<T>>, sample_rate_hz: f64) -> Self {
        debug_assert!(sample_rate_hz > 0.0);
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Copy out a sub-range as a new stream.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            samples: self.samples[range].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

/// Mean of the samples.
pub fn mean<T: Scalar>(x: &[Complex<T>]) -> Complex<T> {
    if x.is_empty() {
        return Complex::new(T::zero(), T::zero());
    }
    let sum: Complex<T> = x.iter().copied().sum();
    sum / cast::<T>(x.len() as f64)
}

/// Variance: mean of `|x[k] - mean(x)|^2`.
///
/// For zero-mean signals this equals the mean power.
pub fn variance<T: Scalar>(x: &SampleStream<T>) -> Result<T> {
    if x.is_empty() {
        return Err(Error::EmptyStream);
    }
    let mu = mean(&x.samples);
    let n = cast::<T>(x.len() as f64);
    Ok(x.samples.iter().map(|s| (s - mu).norm_sqr()).sum::<T>() / n)
}

/// Mean power `mean(|x|^2)` without mean removal.
pub fn power<T: Scalar>(x: &[Complex<T>]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    x.iter().map(|s| s.norm_sqr()).sum::<T>() / cast::<T>(x.len() as f64)
}

/// Root-mean-square amplitude.
pub fn rms<T: Scalar>(x: &[Complex<T>]) -> T {
    power(x).sqrt()
}

/// `10 * log10(num / den)` with strictly positive inputs.
pub fn power_db_ratio(num: f64, den: f64) -> Result<f64> {
    if !(num > 0.0) || !(den > 0.0) {
        return Err(Error::NonPositiveRatio { num, den });
    }
    Ok(10.0 * (num / den).log10())
}

/// `10 * log10(x)` clamped at [`DB_FLOOR`] for non-positive input.
pub fn db10(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Inverse of [`db10`].
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
