//! Welch-style averaged periodogram.

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use crate::stream::{db10, SampleStream};
use num_complex::Complex;
use rustfft::FftPlanner;

/// Analysis window applied to each segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdWindow {
    Hann,
    Rectangular,
}

#[derive(Debug, Clone)]
pub struct PsdConfig {
    pub fft_size: usize,
    /// Segment overlap as a fraction of `fft_size` in `[0, 1)`.
    pub overlap: f64,
    pub window: PsdWindow,
}

impl Default for PsdConfig {
    fn default() -> Self {
        Self {
            fft_size: 1024,
            overlap: 0.5,
            window: PsdWindow::Hann,
        }
    }
}

fn analysis_window<T: Scalar>(kind: PsdWindow, n: usize) -> Vec<T> {
    match kind {
        PsdWindow::Rectangular => vec![T::one(); n],
        // Periodic Hann, the usual choice for averaged periodograms.
        PsdWindow::Hann => (0..n)
            .map(|k| {
                let c = (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos();
                cast::<T>(0.5 * (1.0 - c))
            })
            .collect(),
    }
}

/// Averaged periodogram in linear power per bin.
///
/// Normalized so that the linear sum over all bins approximates the mean
/// signal power; bins are in natural FFT order (DC first).
pub fn psd_linear<T: Scalar>(x: &SampleStream<T>, cfg: &PsdConfig) -> Result<Vec<T>> {
    let n = cfg.fft_size;
    if n == 0 {
        return Err(Error::InvalidConfig("psd fft_size must be > 0".into()));
    }
    if x.len() < n {
        return Err(Error::StreamTooShort {
            need: n,
            got: x.len(),
        });
    }
    if !(0.0..1.0).contains(&cfg.overlap) {
        return Err(Error::InvalidConfig(format!(
            "psd overlap {} outside [0, 1)",
            cfg.overlap
        )));
    }

    let step = ((n as f64) * (1.0 - cfg.overlap)).round().max(1.0) as usize;
    let win = analysis_window::<T>(cfg.window, n);
    let win_energy: T = win.iter().map(|w| *w * *w).sum();

    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(n);
    let mut acc = vec![T::zero(); n];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];

    let mut segments = 0usize;
    let mut start = 0usize;
    while start + n <= x.len() {
        for (k, b) in buf.iter_mut().enumerate() {
            *b = x.samples[start + k] * win[k];
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, b) in acc.iter_mut().zip(buf.iter()) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }

    // Per-segment Parseval: sum_b |FFT(w*x)[b]|^2 = n * sum_k |w_k x_k|^2,
    // so dividing by n * sum(w^2) makes the bin sum track the mean power.
    let scale = cast::<T>(segments as f64) * cast::<T>(n as f64) * win_energy;
    for a in acc.iter_mut() {
        *a /= scale;
    }
    Ok(acc)
}

/// Averaged periodogram in dB relative to full scale (unit power).
///
/// Silent bins clamp at [`crate::stream::DB_FLOOR`] rather than erroring.
pub fn psd_db<T: Scalar>(x: &SampleStream<T>, cfg: &PsdConfig) -> Result<Vec<f64>> {
    Ok(psd_linear(x, cfg)?
        .into_iter()
        .map(|p| db10(p.to_f64().unwrap_or(0.0)))
        .collect())
}

/// Frequency axis for natural FFT bin order, in Hz (negative frequencies in
/// the upper half).
pub fn bin_frequencies(fft_size: usize, sample_rate_hz: f64) -> Vec<f64> {
    (0..fft_size)
        .map(|b| {
            let signed = if b <= fft_size / 2 {
                b as f64
            } else {
                b as f64 - fft_size as f64
            };
            signed * sample_rate_hz / fft_size as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{variance, DB_FLOOR};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn tone(bin: usize, fft_size: usize, reps: usize) -> SampleStream<f64> {
        let n = fft_size * reps;
        let samples = (0..n)
            .map(|k| {
                let ph = 2.0 * std::f64::consts::PI * bin as f64 * k as f64 / fft_size as f64;
                Complex::new(ph.cos(), ph.sin())
            })
            .collect();
        SampleStream::from_samples(samples, 20e6)
    }

    fn awgn(n: usize, seed: u64) -> SampleStream<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
        SampleStream::from_samples(samples, 20e6)
    }

    #[test]
    fn tone_concentrates_in_its_bin() {
        let x = tone(5, 64, 8);
        let cfg = PsdConfig {
            fft_size: 64,
            overlap: 0.5,
            window: PsdWindow::Rectangular,
        };
        let p = psd_db(&x, &cfg).unwrap();
        let peak = p[5];
        for (b, v) in p.iter().enumerate() {
            if b != 5 {
                assert!(
                    peak - v >= 30.0,
                    "bin {b} at {v:.1} dB within 30 dB of peak {peak:.1}"
                );
            }
        }
    }

    #[test]
    fn white_noise_is_flat_after_averaging() {
        // >= 200 averages at fft 128 with 50% overlap.
        let x = awgn(128 * 101, 3);
        let cfg = PsdConfig {
            fft_size: 128,
            ..Default::default()
        };
        let p = psd_db(&x, &cfg).unwrap();
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        for v in &p {
            assert!((v - mean).abs() <= 2.0, "bin {v:.2} vs mean {mean:.2}");
        }
    }

    #[test]
    fn zeros_clamp_at_floor() {
        let x = SampleStream::from_samples(vec![Complex::new(0.0, 0.0); 256], 20e6);
        let p = psd_db(&x, &PsdConfig { fft_size: 64, ..Default::default() }).unwrap();
        assert!(p.iter().all(|&v| v == DB_FLOOR));
    }

    #[test]
    fn short_stream_errors() {
        let x = SampleStream::from_samples(vec![Complex::new(1.0, 0.0); 32], 20e6);
        let r = psd_linear(&x, &PsdConfig { fft_size: 64, ..Default::default() });
        assert!(matches!(r, Err(Error::StreamTooShort { .. })));
    }

    #[test]
    fn bin_sum_matches_variance() {
        let x = awgn(50_000, 11);
        let v = variance(&x).unwrap();
        let p = psd_linear(&x, &PsdConfig::default()).unwrap();
        let total: f64 = p.iter().sum();
        assert!(
            (total - v).abs() / v < 0.05,
            "psd total {total:.4} vs variance {v:.4}"
        );
    }

    #[test]
    fn frequency_axis_wraps_negative() {
        let f = bin_frequencies(8, 8000.0);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], 1000.0);
        assert_eq!(f[4], 4000.0);
        assert_eq!(f[5], -3000.0);
        assert_eq!(f[7], -1000.0);
    }
}
