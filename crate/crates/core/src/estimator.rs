//! LMS estimation of the transmit window from received samples.
//!
//! The receiver rebuilds a reference `yhat` from the demodulated symbols,
//! the channel estimate, and the current window estimate, then walks the
//! packet sample by sample:
//!
//! ```text
//! e[t]      = y[t] - yhat[t]                      (yhat uses the current w)
//! w[i]     += 2 * mu * Re{ conj(e[t]) * h[l] * o[(p+q) mod N][i] }
//! ```
//!
//! with one update per valid `(q, l)` pair at window index
//! `i = k - q*(M+L) - l`. All contributions of one sample are applied
//! together, in natural `(p, k)` order, for the configured number of epochs.
//! Bit errors in the hard decisions are deliberately left in: they flow into
//! the reference exactly as the receiver would experience them.

use crate::error::{Error, Result};
use crate::impair::{convolve_trunc, rotate_samples};
use crate::modem::transforms::SymbolTransforms;
use crate::modem::OfdmConfig;
use crate::scalar::{cast, Scalar};
use crate::stream::SampleStream;
use crate::sync::{CfoEstimate, ChannelEstimate};
use crate::window::{overlap_add, overlap_terms, window_rms_error, SymbolWrap, WindowFunction};
use num_complex::Complex;

/// Initial window estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowInit {
    /// Start from the no-window case (the usual choice; it is a fixed point
    /// when no window was applied).
    Rectangular,
    Zeros,
}

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    /// LMS step size (mu).
    pub step_size: f64,
    /// Full passes over the packet.
    pub epochs: usize,
    pub init: WindowInit,
    /// Adjacent-symbol handling; must match how the packet was windowed.
    pub wrap: SymbolWrap,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            step_size: 0.01,
            epochs: 20,
            init: WindowInit::Rectangular,
            wrap: SymbolWrap::Circular,
        }
    }
}

/// Per-epoch diagnostics from a window estimation run.
#[derive(Debug, Clone, Default)]
pub struct EstimationTrace {
    /// Mean squared residual per epoch.
    pub mse: Vec<f64>,
    /// Window RMS error per epoch; empty when the true window is unknown.
    pub window_rms_error: Vec<f64>,
}

impl EstimationTrace {
    /// CSV form: `epoch,mse,rms_error` (rms blank without ground truth).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,mse,rms_error\n");
        for (ep, mse) in self.mse.iter().enumerate() {
            let rms = self
                .window_rms_error
                .get(ep)
                .map(|r| format!("{r:.9e}"))
                .unwrap_or_default();
            out.push_str(&format!("{ep},{mse:.9e},{rms}\n"));
        }
        out
    }
}

/// Derivative of `|e|^2` with respect to one window coefficient:
/// `-2 * Re{ conj(e) * h * o }` for the given error (already conjugated),
/// channel tap, and reference symbol sample.
#[inline]
pub fn gradient_contribution<T: Scalar>(
    err_conj: Complex<T>,
    h_tap: Complex<T>,
    o_sample: Complex<T>,
) -> T {
    -cast::<T>(2.0) * (err_conj * h_tap * o_sample).re
}

/// Time-domain cores of the remodulated symbols (no prefix, no window).
pub(crate) fn remodulated_cores<T: Scalar>(
    hard_grids: &[Vec<Complex<T>>],
    cfg: &OfdmConfig,
) -> Vec<Vec<Complex<T>>> {
    let transforms = SymbolTransforms::<T>::new(cfg.m);
    let occ = cfg.occupied_bins().len();
    hard_grids
        .iter()
        .map(|g| transforms.grid_to_core(g, occ))
        .collect()
}

/// Rebuild the channel-distorted reference: overlap-add the remodulated
/// symbols under `w_hat`, then convolve with the estimated channel taps.
/// `lead_in` supplies known samples preceding the packet (the preamble) so
/// the convolution warm-starts exactly as the real signal did.
pub fn reconstruct_reference<T: Scalar>(
    hard_grids: &[Vec<Complex<T>>],
    w_hat: &WindowFunction<T>,
    ch: &ChannelEstimate<T>,
    cfg: &OfdmConfig,
    wrap: SymbolWrap,
    lead_in: &[Complex<T>],
) -> SampleStream<T> {
    let cores = remodulated_cores(hard_grids, cfg);
    let v = overlap_add(&cores, w_hat, wrap);
    SampleStream::from_samples(
        convolve_trunc(&v, &ch.time_taps, lead_in),
        cfg.sample_rate_hz,
    )
}

/// Inputs to [`estimate_window`].
pub struct WindowEstimationInput<'a, T: Scalar> {
    /// Received payload span (at least `N * K` samples). Must already be
    /// CFO-corrected unless `cfo` is provided.
    pub rx: &'a SampleStream<T>,
    pub hard_grids: &'a [Vec<Complex<T>>],
    pub channel: &'a ChannelEstimate<T>,
    /// Optional CFO correction applied internally: estimate plus the
    /// packet-global index of `rx.samples[0]`.
    pub cfo: Option<(&'a CfoEstimate, usize)>,
    /// Known clean samples immediately preceding the payload.
    pub lead_in: &'a [Complex<T>],
    /// True window, when known, for per-epoch error tracing.
    pub truth: Option<&'a WindowFunction<T>>,
    pub cfg: &'a OfdmConfig,
}

#[derive(Clone, Copy)]
struct CachedTerm<T: Scalar> {
    widx: u32,
    o: Complex<T>,
}

/// Estimate the transmit window by per-sample LMS over the packet.
pub fn estimate_window<T: Scalar>(
    input: &WindowEstimationInput<'_, T>,
    est_cfg: &EstimatorConfig,
) -> Result<(WindowFunction<T>, EstimationTrace)> {
    let cfg = input.cfg;
    let (m, l) = (cfg.m, cfg.l);
    let k_sym = cfg.k_sym();
    let n = input.hard_grids.len();
    if n < 3 {
        return Err(Error::TooFewSymbols(n));
    }
    if input.rx.len() < n * k_sym {
        return Err(Error::StreamTooShort {
            need: n * k_sym,
            got: input.rx.len(),
        });
    }
    if !(est_cfg.step_size > 0.0) || est_cfg.epochs == 0 {
        return Err(Error::InvalidConfig(
            "estimator needs step_size > 0 and epochs >= 1".into(),
        ));
    }

    let y: Vec<Complex<T>> = match input.cfo {
        Some((cfo, start)) => rotate_samples(
            &input.rx.samples[..n * k_sym],
            -cfo.omega_hat,
            -cfo.phi_hat,
            start as i64,
        ),
        None => input.rx.samples[..n * k_sym].to_vec(),
    };

    let cores = remodulated_cores(input.hard_grids, cfg);
    let taps = &input.channel.time_taps;
    let lead = input.lead_in;

    let mut what: Vec<T> = match est_cfg.init {
        WindowInit::Rectangular => WindowFunction::<T>::rectangular(cfg)
            .support_values()
            .to_vec(),
        WindowInit::Zeros => vec![T::zero(); m + 3 * l],
    };

    // The (window index, reference sample) terms per stream position are
    // fixed across epochs; cache them once.
    let dummy = CachedTerm {
        widx: 0,
        o: Complex::new(T::zero(), T::zero()),
    };
    let mut cache: Vec<([CachedTerm<T>; 3], u8)> = Vec::with_capacity(n * k_sym);
    let mut terms = Vec::with_capacity(3);
    for t in 0..n * k_sym {
        let p = t / k_sym;
        let k = (t % k_sym) as isize - l as isize;
        overlap_terms(k, p, n, m, l, est_cfg.wrap, &mut terms);
        let mut arr = [dummy; 3];
        for (j, term) in terms.iter().enumerate() {
            debug_assert!(term.widx < m + 3 * l);
            arr[j] = CachedTerm {
                widx: term.widx as u32,
                o: cores[term.sym][term.sample],
            };
        }
        cache.push((arr, terms.len() as u8));
    }

    let mu2 = cast::<T>(2.0 * est_cfg.step_size);
    let y_power = crate::stream::power(&y).to_f64().unwrap_or(0.0);
    let mse_floor = 1e-12 * y_power.max(1e-300);

    let mut trace = EstimationTrace::default();
    for _epoch in 0..est_cfg.epochs {
        let mut mse_acc = 0.0f64;
        for t in 0..n * k_sym {
            // Reference sample with the current window estimate.
            let mut yhat = Complex::new(T::zero(), T::zero());
            for (tap_l, h) in taps.iter().enumerate() {
                let tp = t as isize - tap_l as isize;
                if tp >= 0 {
                    let (arr, cnt) = &cache[tp as usize];
                    let mut v = Complex::new(T::zero(), T::zero());
                    for term in arr.iter().take(*cnt as usize) {
                        v += term.o * what[term.widx as usize];
                    }
                    yhat += *h * v;
                } else {
                    let back = (-tp) as usize;
                    if back <= lead.len() {
                        yhat += *h * lead[lead.len() - back];
                    }
                }
            }
            let e = y[t] - yhat;
            mse_acc += e.norm_sqr().to_f64().unwrap_or(f64::NAN);

            // All (q, l) contributions for this sample, applied together.
            let scaled_e_conj = e.conj() * mu2;
            for (tap_l, h) in taps.iter().enumerate() {
                let tp = t as isize - tap_l as isize;
                if tp < 0 {
                    continue;
                }
                let (arr, cnt) = &cache[tp as usize];
                for term in arr.iter().take(*cnt as usize) {
                    what[term.widx as usize] += (scaled_e_conj * *h * term.o).re;
                }
            }
        }
        let mse = mse_acc / (n * k_sym) as f64;
        if !mse.is_finite() {
            return Err(Error::Diverged {
                step_size: est_cfg.step_size,
                factor: f64::INFINITY,
            });
        }
        if let Some(&prev) = trace.mse.last() {
            if mse > 10.0 * prev.max(mse_floor) {
                return Err(Error::Diverged {
                    step_size: est_cfg.step_size,
                    factor: mse / prev.max(mse_floor),
                });
            }
        }
        trace.mse.push(mse);
        if let Some(truth) = input.truth {
            let current = WindowFunction::from_support(what.clone(), m, l)?;
            trace
                .window_rms_error
                .push(window_rms_error(&current, truth)?.to_f64().unwrap_or(f64::NAN));
        }
    }

    Ok((WindowFunction::from_support(what, m, l)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impair::{add_awgn, apply_channel, ChannelModel};
    use crate::modem::{demodulate, modulate, serialize, Constellation, OfdmPacket};
    use crate::window::apply_window;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(n: usize, seed: u64) -> Vec<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen()).collect()
    }

    fn flat_estimate(cfg: &OfdmConfig) -> ChannelEstimate<f64> {
        ChannelEstimate::from_taps(&[Complex::new(1.0, 0.0)], cfg.m, cfg.l)
    }

    #[test]
    fn gradient_contribution_examples() {
        let zero = Complex::new(0.0, 0.0);
        let one = Complex::new(1.0, 0.0);
        assert_eq!(gradient_contribution::<f64>(zero, one, one), 0.0);
        assert_eq!(gradient_contribution::<f64>(one, one, one), -2.0);
    }

    #[test]
    fn gradient_matches_finite_difference_through_reconstruction() {
        // mean |e|^2 as a function of one window coefficient, differentiated
        // two ways on a toy instance.
        let cfg = OfdmConfig::toy(8, 2, Constellation::Qpsk);
        let bits = random_bits(3 * cfg.bits_per_ofdm_symbol(), 41);
        let pkt: OfdmPacket<f64> = modulate(&bits, &cfg).unwrap();
        let w_true = WindowFunction::raised_cosine(3.0 / cfg.sample_rate_hz, &cfg).unwrap();
        let taps = vec![Complex::new(0.8, 0.1), Complex::new(0.2, -0.3)];
        let ch_est = ChannelEstimate::from_taps(&taps, cfg.m, cfg.l);
        let y = apply_channel(
            &apply_window(&pkt, &w_true, &cfg, SymbolWrap::Circular).unwrap(),
            &ChannelModel::new(taps).unwrap(),
        )
        .unwrap();

        let w_hat = WindowFunction::<f64>::rectangular(&cfg);
        let n_samp = y.len() as f64;
        let mse_of = |w: &WindowFunction<f64>| -> f64 {
            let yh = reconstruct_reference(&pkt.grids, w, &ch_est, &cfg, SymbolWrap::Circular, &[]);
            y.samples
                .iter()
                .zip(&yh.samples)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                / n_samp
        };

        // Accumulated analytic gradient over all samples for each index.
        let yh = reconstruct_reference(&pkt.grids, &w_hat, &ch_est, &cfg, SymbolWrap::Circular, &[]);
        let cores = remodulated_cores(&pkt.grids, &cfg);
        let support = cfg.m + 3 * cfg.l;
        let mut grad = vec![0.0f64; support];
        let mut terms = Vec::new();
        let k_sym = cfg.k_sym();
        for t in 0..y.len() {
            let e = y.samples[t] - yh.samples[t];
            for (tap_l, h) in ch_est.time_taps.iter().enumerate() {
                let tp = t as isize - tap_l as isize;
                if tp < 0 {
                    continue;
                }
                let p = tp as usize / k_sym;
                let k = (tp as usize % k_sym) as isize - cfg.l as isize;
                overlap_terms(k, p, pkt.n_symbols(), cfg.m, cfg.l, SymbolWrap::Circular, &mut terms);
                for term in &terms {
                    grad[term.widx] +=
                        gradient_contribution(e.conj(), *h, cores[term.sym][term.sample]) / n_samp;
                }
            }
        }

        let delta = 1e-5;
        for idx in 0..support {
            let mut up = w_hat.support_values().to_vec();
            up[idx] += delta;
            let mut dn = w_hat.support_values().to_vec();
            dn[idx] -= delta;
            let fd = (mse_of(&WindowFunction::from_support(up, cfg.m, cfg.l).unwrap())
                - mse_of(&WindowFunction::from_support(dn, cfg.m, cfg.l).unwrap()))
                / (2.0 * delta);
            let scale = grad[idx].abs().max(fd.abs()).max(1e-6);
            assert!(
                (grad[idx] - fd).abs() / scale < 1e-6,
                "index {idx}: analytic {:.9e} vs fd {:.9e}",
                grad[idx],
                fd
            );
        }
    }

    #[test]
    fn perfect_inputs_reconstruct_received_exactly() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qam64);
        let bits = random_bits(5 * cfg.bits_per_ofdm_symbol(), 42);
        let pkt: OfdmPacket<f64> = modulate(&bits, &cfg).unwrap();
        let w = WindowFunction::raised_cosine(500e-9, &cfg).unwrap();
        let taps = vec![Complex::new(0.9, 0.0), Complex::new(0.1, 0.2)];
        let y = apply_channel(
            &apply_window(&pkt, &w, &cfg, SymbolWrap::Circular).unwrap(),
            &ChannelModel::new(taps.clone()).unwrap(),
        )
        .unwrap();
        let yh = reconstruct_reference(
            &pkt.grids,
            &w,
            &ChannelEstimate::from_taps(&taps, cfg.m, cfg.l),
            &cfg,
            SymbolWrap::Circular,
            &[],
        );
        let max = y
            .samples
            .iter()
            .zip(&yh.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(max <= 1e-9, "max reconstruction error {max:.3e}");
    }

    #[test]
    fn rectangular_window_flat_channel_reconstructs_serialize() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qpsk);
        let bits = random_bits(3 * cfg.bits_per_ofdm_symbol(), 43);
        let pkt: OfdmPacket<f64> = modulate(&bits, &cfg).unwrap();
        let yh = reconstruct_reference(
            &pkt.grids,
            &WindowFunction::rectangular(&cfg),
            &flat_estimate(&cfg),
            &cfg,
            SymbolWrap::Circular,
            &[],
        );
        assert_eq!(yh.samples, serialize(&pkt, &cfg).samples);
    }

    #[test]
    fn toy_reconstruction_matches_double_loop_oracle() {
        let cfg = OfdmConfig::toy(4, 2, Constellation::Qpsk);
        let bits = random_bits(3 * cfg.bits_per_ofdm_symbol(), 44);
        let pkt: OfdmPacket<f64> = modulate(&bits, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let alpha: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
        let beta: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
        let w = WindowFunction::from_alpha_beta(&alpha, &beta, &cfg).unwrap();
        let taps = vec![Complex::new(0.6, -0.1), Complex::new(0.3, 0.3)];
        let ch = ChannelEstimate::from_taps(&taps, cfg.m, cfg.l);

        let got = reconstruct_reference(&pkt.grids, &w, &ch, &cfg, SymbolWrap::Circular, &[]);

        // Direct: v by triple sum, then y by explicit convolution sum.
        let (m, l, n) = (4isize, 2isize, 3isize);
        let k_sym = m + l;
        let mut v = vec![Complex::new(0.0, 0.0); (n * k_sym) as usize];
        for p in 0..n {
            for k in -l..m {
                let mut acc = Complex::new(0.0, 0.0);
                for q in -1..=1 {
                    let i = k - q * k_sym;
                    let wv = if i > m + l - 1 || i < -2 * l {
                        0.0
                    } else if i >= m - l {
                        alpha[(i - m + l) as usize]
                    } else if i >= 0 {
                        1.0
                    } else {
                        beta[(-1 - i) as usize]
                    };
                    let sym = (p + q).rem_euclid(n) as usize;
                    let sample = i.rem_euclid(m) as usize;
                    acc += pkt.core(sym)[sample] * wv;
                }
                v[(p * k_sym + k + l) as usize] = acc;
            }
        }
        for t in 0..v.len() {
            let mut acc = Complex::new(0.0, 0.0);
            for (tl, h) in ch.time_taps.iter().enumerate() {
                if t >= tl {
                    acc += h * v[t - tl];
                }
            }
            assert!((got.samples[t] - acc).norm() < 1e-12, "sample {t}");
        }
    }

    fn run_estimate(
        cfg: &OfdmConfig,
        n_symbols: usize,
        transition_s: f64,
        snr_db: f64,
        seed: u64,
        est_cfg: &EstimatorConfig,
    ) -> (f64, EstimationTrace) {
        let bits = random_bits(n_symbols * cfg.bits_per_ofdm_symbol(), seed);
        let pkt: OfdmPacket<f64> = modulate(&bits, cfg).unwrap();
        let w_true = if transition_s > 0.0 {
            WindowFunction::raised_cosine(transition_s, cfg).unwrap()
        } else {
            WindowFunction::rectangular(cfg)
        };
        let tx = apply_window(&pkt, &w_true, cfg, SymbolWrap::Circular).unwrap();
        let rx = add_awgn(&tx, snr_db, seed ^ 0xABCD).unwrap();
        let chan = flat_estimate(cfg);
        let demod = demodulate(
            &rx,
            &chan,
            &CfoEstimate { omega_hat: 0.0, phi_hat: 0.0 },
            0,
            n_symbols,
            cfg,
        )
        .unwrap();
        let input = WindowEstimationInput {
            rx: &rx,
            hard_grids: &demod.hard_grids,
            channel: &chan,
            cfo: None,
            lead_in: &[],
            truth: Some(&w_true),
            cfg,
        };
        let (w_hat, trace) = estimate_window(&input, est_cfg).unwrap();
        (
            window_rms_error(&w_hat, &w_true).unwrap(),
            trace,
        )
    }

    #[test]
    fn noiseless_estimate_is_accurate() {
        // 148 symbols, 64-QAM, 500 ns window, step 0.01, 20 epochs.
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qam64);
        let (rms, trace) = run_estimate(
            &cfg,
            148,
            500e-9,
            f64::INFINITY,
            77,
            &EstimatorConfig::default(),
        );
        assert!(rms < 1e-2, "noiseless window RMS {rms:.3e}");
        assert_eq!(trace.mse.len(), 20);
        assert_eq!(trace.window_rms_error.len(), 20);
    }

    #[test]
    fn rectangular_truth_is_a_fixed_point() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qam64);
        let (rms, trace) = run_estimate(
            &cfg,
            10,
            0.0,
            f64::INFINITY,
            78,
            &EstimatorConfig::default(),
        );
        assert!(rms < 1e-9, "fixed point drift {rms:.3e}");
        assert!(trace.mse.iter().all(|&m| m < 1e-20));
    }

    #[test]
    fn mse_is_non_increasing_noiseless() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qam64);
        let est_cfg = EstimatorConfig {
            step_size: 1e-3,
            epochs: 12,
            ..Default::default()
        };
        let (_, trace) = run_estimate(&cfg, 20, 500e-9, f64::INFINITY, 79, &est_cfg);
        for w in trace.mse.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-9) + 1e-30,
                "mse increased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn noise_degrades_estimate_monotonically() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qam64);
        let mut means = Vec::new();
        for &snr in &[20.0, 25.0, 30.0] {
            let mut acc = 0.0;
            for trial in 0..50u64 {
                let (rms, _) = run_estimate(
                    &cfg,
                    50,
                    500e-9,
                    snr,
                    1000 + trial,
                    &EstimatorConfig::default(),
                );
                acc += rms;
            }
            means.push(acc / 50.0);
        }
        assert!(
            means[0] > means[1] && means[1] > means[2],
            "window RMS vs SNR not monotone: {means:?}"
        );
    }

    #[test]
    fn snr30_beats_snr20() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qam64);
        let (rms20, _) =
            run_estimate(&cfg, 148, 500e-9, 20.0, 555, &EstimatorConfig::default());
        let (rms30, _) =
            run_estimate(&cfg, 148, 500e-9, 30.0, 555, &EstimatorConfig::default());
        assert!(rms30 < rms20, "rms30 {rms30:.3e} vs rms20 {rms20:.3e}");
    }

    #[test]
    fn zeros_init_converges_too() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qam16);
        let est_cfg = EstimatorConfig {
            init: WindowInit::Zeros,
            epochs: 40,
            ..Default::default()
        };
        let (rms, _) = run_estimate(&cfg, 30, 500e-9, f64::INFINITY, 80, &est_cfg);
        assert!(rms < 1e-2, "zeros-init RMS {rms:.3e}");
    }

    #[test]
    fn oversized_step_reports_divergence() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qam64);
        let bits = random_bits(5 * cfg.bits_per_ofdm_symbol(), 81);
        let pkt: OfdmPacket<f64> = modulate(&bits, &cfg).unwrap();
        let w = WindowFunction::raised_cosine(500e-9, &cfg).unwrap();
        let tx = apply_window(&pkt, &w, &cfg, SymbolWrap::Circular).unwrap();
        let chan = flat_estimate(&cfg);
        let input = WindowEstimationInput {
            rx: &tx,
            hard_grids: &pkt.grids,
            channel: &chan,
            cfo: None,
            lead_in: &[],
            truth: None,
            cfg: &cfg,
        };
        let est_cfg = EstimatorConfig {
            step_size: 5.0,
            ..Default::default()
        };
        let r = estimate_window(&input, &est_cfg);
        assert!(matches!(r, Err(Error::Diverged { .. })), "{r:?}");
    }

    #[test]
    fn single_precision_estimate_converges() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qpsk);
        let bits = random_bits(30 * cfg.bits_per_ofdm_symbol(), 90);
        let pkt: OfdmPacket<f32> = modulate(&bits, &cfg).unwrap();
        let w_true = WindowFunction::<f32>::raised_cosine(500e-9, &cfg).unwrap();
        let tx = apply_window(&pkt, &w_true, &cfg, SymbolWrap::Circular).unwrap();
        let chan = ChannelEstimate::from_taps(&[Complex::new(1.0f32, 0.0)], cfg.m, cfg.l);
        let input = WindowEstimationInput {
            rx: &tx,
            hard_grids: &pkt.grids,
            channel: &chan,
            cfo: None,
            lead_in: &[],
            truth: Some(&w_true),
            cfg: &cfg,
        };
        let (w_hat, _) = estimate_window(&input, &EstimatorConfig::default()).unwrap();
        let rms = window_rms_error(&w_hat, &w_true).unwrap();
        assert!(rms < 1e-3, "f32 window RMS {rms:.3e}");
    }

    #[test]
    fn too_few_symbols_errors() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qpsk);
        let bits = random_bits(2 * cfg.bits_per_ofdm_symbol(), 82);
        let pkt: OfdmPacket<f64> = modulate(&bits, &cfg).unwrap();
        let tx = serialize(&pkt, &cfg);
        let chan = flat_estimate(&cfg);
        let input = WindowEstimationInput {
            rx: &tx,
            hard_grids: &pkt.grids,
            channel: &chan,
            cfo: None,
            lead_in: &[],
            truth: None,
            cfg: &cfg,
        };
        assert!(matches!(
            estimate_window(&input, &EstimatorConfig::default()),
            Err(Error::TooFewSymbols(2))
        ));
    }
}
