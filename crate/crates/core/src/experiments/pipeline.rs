//! End-to-end single-packet pipeline shared by the sweeps, the OTA path,
//! and the acceptance tests: synthesize an impaired packet, run the receiver
//! chain, and cancel both ways.

use crate::cancel::{
    cancel_no_window, cancel_with_window, cancellation_improvement, CancelContext,
    CancellationReport,
};
use crate::error::{Error, Result};
use crate::estimator::{estimate_window, EstimationTrace, EstimatorConfig, WindowEstimationInput};
use crate::impair::{
    add_awgn, apply_cfo, apply_channel, random_channel, CfoModel, ChannelModel, ChannelProfile,
};
use crate::modem::{
    demodulate, generate_preamble, modulate, remodulate, Demodulated, OfdmConfig, OfdmPacket,
};
use crate::scalar::Scalar;
use crate::stream::SampleStream;
use crate::sync::{
    estimate_cfo, estimate_channel, refine_cfo, refine_channel_decision_directed, CfoEstimate,
    ChannelEstimate,
};
use crate::window::{apply_window, window_rms_error, SymbolWrap, WindowFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Derive independent sub-seeds from a packet seed.
pub fn subseed(seed: u64, stream: u64) -> u64 {
    // splitmix64 over the combined value
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One synthetic link realization.
#[derive(Debug, Clone)]
pub struct LinkSpec {
    pub snr_db: f64,
    /// Window transition time in seconds; 0 means no window.
    pub transition_time_s: f64,
    pub channel_profile: ChannelProfile,
    pub rms_delay_taps: f64,
    /// CFO drawn uniformly in +/- this many Hz.
    pub max_cfo_hz: f64,
    pub n_symbols: usize,
    pub wrap: SymbolWrap,
    pub seed: u64,
}

impl LinkSpec {
    /// The defaults used by the cancellation sweeps: exponential channel
    /// with 2-tap RMS delay and up to +/-20 kHz CFO.
    pub fn new(snr_db: f64, transition_time_s: f64, n_symbols: usize, seed: u64) -> Self {
        Self {
            snr_db,
            transition_time_s,
            channel_profile: ChannelProfile::ExponentialDecay,
            rms_delay_taps: 2.0,
            max_cfo_hz: 20e3,
            n_symbols,
            wrap: SymbolWrap::Circular,
            seed,
        }
    }
}

/// A synthesized packet with its ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticPacket<T: Scalar> {
    pub packet: OfdmPacket<T>,
    pub window: WindowFunction<T>,
    pub channel: ChannelModel<T>,
    pub cfo: CfoModel,
    pub preamble_len: usize,
    /// Impaired preamble + payload.
    pub rx: SampleStream<T>,
    pub snr_db: f64,
}

/// Build the transmit stream (preamble plus windowed payload), impair it,
/// and add noise.
pub fn synthesize_packet<T: Scalar>(
    spec: &LinkSpec,
    cfg: &OfdmConfig,
) -> Result<SyntheticPacket<T>> {
    let mut bit_rng = ChaCha8Rng::seed_from_u64(subseed(spec.seed, 0));
    let bits: Vec<bool> = (0..spec.n_symbols * cfg.bits_per_ofdm_symbol())
        .map(|_| bit_rng.gen())
        .collect();
    let packet = modulate::<T>(&bits, cfg)?;

    let window = if spec.transition_time_s > 0.0 {
        WindowFunction::raised_cosine(spec.transition_time_s, cfg)?
    } else {
        WindowFunction::rectangular(cfg)
    };
    let payload = apply_window(&packet, &window, cfg, spec.wrap)?;

    let preamble = generate_preamble::<T>(cfg);
    let mut tx = preamble.samples();
    tx.extend_from_slice(&payload.samples);
    let tx = SampleStream::from_samples(tx, cfg.sample_rate_hz);

    let channel = random_channel(
        spec.channel_profile,
        spec.rms_delay_taps,
        cfg.l,
        subseed(spec.seed, 1),
    )?;
    let mut cfo_rng = ChaCha8Rng::seed_from_u64(subseed(spec.seed, 2));
    let cfo = CfoModel::from_freq_hz(
        cfo_rng.gen_range(-spec.max_cfo_hz..=spec.max_cfo_hz),
        cfg.sample_rate_hz,
        cfo_rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    );

    let impaired = apply_cfo(&apply_channel(&tx, &channel)?, &cfo, 0);
    let rx = add_awgn(&impaired, spec.snr_db, subseed(spec.seed, 3))?;

    Ok(SyntheticPacket {
        packet,
        window,
        channel,
        cfo,
        preamble_len: preamble.len(),
        rx,
        snr_db: spec.snr_db,
    })
}

/// Receiver-chain output for one packet.
#[derive(Debug, Clone)]
pub struct ProcessedPacket<T: Scalar> {
    pub cfo_initial: CfoEstimate,
    /// Preamble estimate refined by the pilot-tracked common phase error.
    pub cfo_refined: CfoEstimate,
    pub chan_est: ChannelEstimate<T>,
    pub demod: Demodulated<T>,
    pub remod: OfdmPacket<T>,
    pub w_hat: WindowFunction<T>,
    pub trace: EstimationTrace,
    pub with_window: CancellationReport<T>,
    pub no_window: CancellationReport<T>,
    pub improvement_db: f64,
}

/// Run the full receiver on a stream that starts at the packet (preamble)
/// start: estimate CFO and channel, demodulate, remodulate, estimate the
/// window, and cancel both ways.
pub fn process_packet<T: Scalar>(
    rx: &SampleStream<T>,
    n_symbols: usize,
    est_cfg: &EstimatorConfig,
    truth_window: Option<&WindowFunction<T>>,
    snr_db: Option<f64>,
    cfg: &OfdmConfig,
) -> Result<ProcessedPacket<T>> {
    let preamble = generate_preamble::<T>(cfg);
    let pre_len = preamble.len();
    let need = pre_len + n_symbols * cfg.k_sym();
    if rx.len() < need {
        return Err(Error::StreamTooShort {
            need,
            got: rx.len(),
        });
    }

    // Pass 1: preamble estimates, first decisions.
    let cfo_initial = estimate_cfo(rx, cfg)?;
    let chan_initial = estimate_channel(rx, &cfo_initial, cfg)?;
    let payload = rx.slice(pre_len..need);
    let demod1 = demodulate(&payload, &chan_initial, &cfo_initial, pre_len, n_symbols, cfg)?;

    // Pass 2: pilot-fit CFO and decision-directed channel refinement, then
    // re-decide with the tightened estimates.
    let cfo_mid = refine_cfo(&cfo_initial, &demod1.cpe_per_symbol, pre_len, cfg);
    let chan_est = refine_channel_decision_directed(
        &payload,
        &demod1.hard_grids,
        &cfo_mid,
        pre_len,
        &chan_initial,
        cfg,
    )?;
    let demod = demodulate(&payload, &chan_est, &cfo_mid, pre_len, n_symbols, cfg)?;
    let cfo_refined = refine_cfo(&cfo_mid, &demod.cpe_per_symbol, pre_len, cfg);
    let remod = remodulate(&demod.hard_grids, cfg)?;

    let lead_in = preamble.samples();
    let input = WindowEstimationInput {
        rx: &payload,
        hard_grids: &demod.hard_grids,
        channel: &chan_est,
        cfo: Some((&cfo_refined, pre_len)),
        lead_in: &lead_in,
        truth: truth_window,
        cfg,
    };
    let (w_hat, trace) = estimate_window(&input, est_cfg)?;

    let ctx = CancelContext {
        channel: &chan_est,
        cfo: &cfo_refined,
        lead_in: &lead_in,
        start_index: pre_len,
        wrap: est_cfg.wrap,
        cfg,
    };
    let mut with_window = cancel_with_window(&payload, &remod, &w_hat, &ctx)?;
    let mut no_window = cancel_no_window(&payload, &remod, &ctx)?;
    with_window.snr_db = snr_db;
    no_window.snr_db = snr_db;
    if let Some(truth) = truth_window {
        let rms = window_rms_error(&w_hat, truth)?.to_f64().unwrap_or(f64::NAN);
        with_window.window_rms_error = Some(rms);
    }
    let improvement_db = cancellation_improvement(&with_window, &no_window)?;

    Ok(ProcessedPacket {
        cfo_initial,
        cfo_refined,
        chan_est,
        demod,
        remod,
        w_hat,
        trace,
        with_window,
        no_window,
        improvement_db,
    })
}

/// Bit error rate between transmitted and decided bits.
pub fn bit_error_rate(tx: &[bool], rx: &[bool]) -> f64 {
    let n = tx.len().min(rx.len());
    if n == 0 {
        return 0.0;
    }
    let errors = tx[..n].iter().zip(&rx[..n]).filter(|(a, b)| a != b).count();
    errors as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::Constellation;

    #[test]
    fn pipeline_cancels_well_at_high_snr() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qam64);
        let spec = LinkSpec::new(30.0, 500e-9, 40, 11);
        let synth = synthesize_packet::<f64>(&spec, &cfg).unwrap();
        let out = process_packet(
            &synth.rx,
            40,
            &EstimatorConfig::default(),
            Some(&synth.window),
            Some(30.0),
            &cfg,
        )
        .unwrap();

        let ber = bit_error_rate(&synth.packet.payload_bits, &out.demod.bits);
        assert!(ber < 0.05, "ber {ber}");
        assert!(
            out.improvement_db >= 5.0,
            "improvement {:.2} dB",
            out.improvement_db
        );
        assert!(
            out.with_window.c_db > out.no_window.c_db,
            "with {:.2} vs without {:.2}",
            out.with_window.c_db,
            out.no_window.c_db
        );
        // the refined CFO lands near the injected one
        let err = (out.cfo_refined.omega_hat - synth.cfo.omega).abs();
        assert!(err < 1e-5, "omega error {err:.3e}");
    }

    #[test]
    fn synthesize_is_deterministic() {
        let cfg = OfdmConfig::wifi_80211g(Constellation::Qpsk);
        let spec = LinkSpec::new(20.0, 100e-9, 10, 7);
        let a = synthesize_packet::<f64>(&spec, &cfg).unwrap();
        let b = synthesize_packet::<f64>(&spec, &cfg).unwrap();
        assert_eq!(a.rx.samples, b.rx.samples);
    }

    #[test]
    fn subseed_streams_differ() {
        let s = 42;
        assert_ne!(subseed(s, 0), subseed(s, 1));
        assert_ne!(subseed(s, 1), subseed(s, 2));
        assert_eq!(subseed(s, 3), subseed(s, 3));
    }
}
