//! Batch experiments: window-error-vs-SNR and cancellation sweeps, with
//! deterministic CSV output.

use super::pipeline::{
    bit_error_rate, process_packet, subseed, synthesize_packet, LinkSpec,
};
use crate::error::{Error, Result};
use crate::estimator::{estimate_window, EstimatorConfig, WindowEstimationInput};
use crate::impair::add_awgn;
use crate::modem::{demodulate, modulate, Constellation, OfdmConfig};
use crate::sync::{CfoEstimate, ChannelEstimate};
use crate::window::{apply_window, window_rms_error, SymbolWrap, WindowFunction};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

/// Sweep parameters; a TOML file with these fields is the CLI's config
/// format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub snr_grid_db: Vec<f64>,
    /// Transition times in seconds; 0 means no window.
    pub transition_times_s: Vec<f64>,
    pub packets_per_point: usize,
    pub payload_bytes: usize,
    pub seed: u64,
    /// Numerology profile, e.g. `80211g-qam64`.
    pub profile: String,
    pub output_dir: PathBuf,
}

impl SweepConfig {
    /// Small grid that completes in minutes.
    pub fn desk() -> Self {
        Self {
            snr_grid_db: vec![20.0, 25.0, 30.0],
            transition_times_s: vec![0.0, 100e-9, 300e-9, 500e-9, 1000e-9],
            packets_per_point: 50,
            payload_bytes: 4000,
            seed: 1,
            profile: "80211g-qam64".into(),
            output_dir: PathBuf::from("out"),
        }
    }

    /// Full-scale grid: 500 packets of 4000 bytes per point, six window
    /// transition values, SNR swept 20 to 30 dB.
    pub fn paper() -> Self {
        Self {
            snr_grid_db: (0..=5).map(|i| 20.0 + 2.0 * i as f64).collect(),
            transition_times_s: vec![0.0, 100e-9, 200e-9, 400e-9, 600e-9, 800e-9, 1000e-9],
            packets_per_point: 500,
            payload_bytes: 4000,
            seed: 1,
            profile: "80211g-qam64".into(),
            output_dir: PathBuf::from("out"),
        }
    }

    /// Window-error-sweep defaults: 148-symbol packets (5328 bytes at
    /// 64-QAM), 500 ns window, SNR 20-30 dB plus a noiseless control.
    pub fn desk_window_sweep() -> Self {
        Self {
            snr_grid_db: vec![20.0, 22.0, 24.0, 26.0, 28.0, 30.0, f64::INFINITY],
            transition_times_s: vec![500e-9],
            packets_per_point: 10,
            payload_bytes: 5328,
            seed: 1,
            profile: "80211g-qam64".into(),
            output_dir: PathBuf::from("out"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_grid_db.is_empty() || self.transition_times_s.is_empty() {
            return Err(Error::InvalidConfig("empty sweep grid".into()));
        }
        if self.packets_per_point == 0 {
            return Err(Error::InvalidConfig("packets_per_point must be >= 1".into()));
        }
        if self.payload_bytes == 0 {
            return Err(Error::InvalidConfig("payload_bytes must be >= 1".into()));
        }
        self.ofdm_config()?;
        Ok(())
    }

    /// Resolve the numerology profile string.
    pub fn ofdm_config(&self) -> Result<OfdmConfig> {
        parse_profile(&self.profile)
    }

    /// Short hash of the result-determining fields (the output directory is
    /// excluded) for CSV reproducibility headers.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(
            format!(
                "snr={:?} transitions={:?} packets={} payload={} seed={} profile={}",
                self.snr_grid_db,
                self.transition_times_s,
                self.packets_per_point,
                self.payload_bytes,
                self.seed,
                self.profile
            )
            .as_bytes(),
        );
        let out = hasher.finalize();
        out[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn parse_profile(profile: &str) -> Result<OfdmConfig> {
    let lower = profile.to_ascii_lowercase();
    let constellation = match lower.as_str() {
        "80211g-qpsk" => Constellation::Qpsk,
        "80211g-qam16" => Constellation::Qam16,
        "80211g-qam64" | "80211g" => Constellation::Qam64,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown numerology profile `{other}`"
            )))
        }
    };
    Ok(OfdmConfig::wifi_80211g(constellation))
}

fn csv_preamble(tool: &str, digest: &str, seed: u64) -> String {
    format!(
        "# wofdm {} {tool} config_sha256={digest} seed={seed}\n",
        env!("CARGO_PKG_VERSION")
    )
}

fn fmt_db(v: f64) -> String {
    format!("{v:.4}")
}

fn fmt_err(v: f64) -> String {
    format!("{v:.6e}")
}

/// One row of the window-error sweep.
#[derive(Debug, Clone)]
pub struct WindowSweepPoint {
    pub snr_db: f64,
    pub mean_rms_error: f64,
    pub std_rms_error: f64,
    pub packets: usize,
}

/// Window RMS error as a function of SNR: 64-QAM packets with a raised
/// cosine window, flat channel with a perfect estimate, no CFO; hard
/// decisions (and their bit errors) feed the estimator.
pub fn run_window_error_sweep(cfg: &SweepConfig) -> Result<(Vec<WindowSweepPoint>, String)> {
    cfg.validate()?;
    let ofdm = cfg.ofdm_config()?;
    let transition = cfg.transition_times_s[0];
    if transition <= 0.0 {
        return Err(Error::InvalidConfig(
            "window sweep needs a positive transition time".into(),
        ));
    }
    let n_symbols = crate::modem::symbols_for_bits(cfg.payload_bytes * 8, &ofdm);
    let w_true = WindowFunction::<f64>::raised_cosine(transition, &ofdm)?;
    let chan = ChannelEstimate::from_taps(&[Complex::new(1.0, 0.0)], ofdm.m, ofdm.l);
    let zero_cfo = CfoEstimate {
        omega_hat: 0.0,
        phi_hat: 0.0,
    };
    let est_cfg = EstimatorConfig::default();

    let mut points = Vec::with_capacity(cfg.snr_grid_db.len());
    for (si, &snr) in cfg.snr_grid_db.iter().enumerate() {
        let errs: Vec<f64> = (0..cfg.packets_per_point)
            .into_par_iter()
            .map(|pkt_idx| -> Result<f64> {
                let seed = subseed(cfg.seed, (si * 1_000_003 + pkt_idx) as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let bits: Vec<bool> = (0..n_symbols * ofdm.bits_per_ofdm_symbol())
                    .map(|_| rng.gen())
                    .collect();
                let pkt = modulate::<f64>(&bits, &ofdm)?;
                let tx = apply_window(&pkt, &w_true, &ofdm, SymbolWrap::Circular)?;
                let rx = add_awgn(&tx, snr, subseed(seed, 9))?;
                let demod = demodulate(&rx, &chan, &zero_cfo, 0, n_symbols, &ofdm)?;
                let input = WindowEstimationInput {
                    rx: &rx,
                    hard_grids: &demod.hard_grids,
                    channel: &chan,
                    cfo: None,
                    lead_in: &[],
                    truth: None,
                    cfg: &ofdm,
                };
                let (w_hat, _) = estimate_window(&input, &est_cfg)?;
                window_rms_error(&w_hat, &w_true)
            })
            .collect::<Result<Vec<f64>>>()?;
        let n = errs.len() as f64;
        let mean = errs.iter().sum::<f64>() / n;
        let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
        points.push(WindowSweepPoint {
            snr_db: snr,
            mean_rms_error: mean,
            std_rms_error: var.sqrt(),
            packets: errs.len(),
        });
    }

    let mut csv = csv_preamble("window-sweep", &cfg.digest(), cfg.seed);
    csv.push_str("snr_db,mean_rms_error,std_rms_error,packets\n");
    for p in &points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_db(p.snr_db),
            fmt_err(p.mean_rms_error),
            fmt_err(p.std_rms_error),
            p.packets
        ));
    }
    Ok((points, csv))
}

/// One row of the cancellation sweep.
#[derive(Debug, Clone)]
pub struct CancelSweepPoint {
    pub snr_db: f64,
    pub transition_time_s: f64,
    pub packets: usize,
    pub mean_c_with_db: f64,
    pub mean_c_without_db: f64,
    pub improvement_db: f64,
    pub mean_c_minus_snr_with_db: f64,
    pub mean_c_minus_snr_without_db: f64,
    pub mean_window_rms_error: f64,
    pub mean_ber: f64,
}

/// Full pipeline per packet (modulate, window, channel, CFO, noise,
/// synchronize, estimate, demodulate, remodulate, estimate the window,
/// cancel both ways), averaged per (SNR, transition-time) grid point.
pub fn run_cancellation_sweep(cfg: &SweepConfig) -> Result<(Vec<CancelSweepPoint>, String)> {
    cfg.validate()?;
    let ofdm = cfg.ofdm_config()?;
    let n_symbols = crate::modem::symbols_for_bits(cfg.payload_bytes * 8, &ofdm);
    let est_cfg = EstimatorConfig::default();

    let mut points = Vec::new();
    for (si, &snr) in cfg.snr_grid_db.iter().enumerate() {
        for (ti, &transition) in cfg.transition_times_s.iter().enumerate() {
            let results: Vec<(f64, f64, f64, f64)> = (0..cfg.packets_per_point)
                .into_par_iter()
                .map(|pkt_idx| -> Result<(f64, f64, f64, f64)> {
                    let seed = subseed(
                        cfg.seed,
                        ((si * 101 + ti) * 1_000_003 + pkt_idx) as u64,
                    );
                    let spec = LinkSpec {
                        wrap: SymbolWrap::Circular,
                        ..LinkSpec::new(snr, transition, n_symbols, seed)
                    };
                    let synth = synthesize_packet::<f64>(&spec, &ofdm)?;
                    let out = process_packet(
                        &synth.rx,
                        n_symbols,
                        &est_cfg,
                        Some(&synth.window),
                        Some(snr),
                        &ofdm,
                    )?;
                    let ber = bit_error_rate(&synth.packet.payload_bits, &out.demod.bits);
                    Ok((
                        out.with_window.c_db,
                        out.no_window.c_db,
                        out.with_window.window_rms_error.unwrap_or(f64::NAN),
                        ber,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;

            let n = results.len() as f64;
            let mean_with = results.iter().map(|r| r.0).sum::<f64>() / n;
            let mean_without = results.iter().map(|r| r.1).sum::<f64>() / n;
            let mean_rms = results.iter().map(|r| r.2).sum::<f64>() / n;
            let mean_ber = results.iter().map(|r| r.3).sum::<f64>() / n;
            points.push(CancelSweepPoint {
                snr_db: snr,
                transition_time_s: transition,
                packets: results.len(),
                mean_c_with_db: mean_with,
                mean_c_without_db: mean_without,
                improvement_db: mean_with - mean_without,
                mean_c_minus_snr_with_db: mean_with - snr,
                mean_c_minus_snr_without_db: mean_without - snr,
                mean_window_rms_error: mean_rms,
                mean_ber,
            });
        }
    }

    let mut csv = csv_preamble("cancel-sweep", &cfg.digest(), cfg.seed);
    csv.push_str(
        "snr_db,transition_ns,packets,mean_c_with_db,mean_c_without_db,improvement_db,\
         c_minus_snr_with_db,c_minus_snr_without_db,mean_window_rms_error,mean_ber\n",
    );
    for p in &points {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt_db(p.snr_db),
            fmt_db(p.transition_time_s * 1e9),
            p.packets,
            fmt_db(p.mean_c_with_db),
            fmt_db(p.mean_c_without_db),
            fmt_db(p.improvement_db),
            fmt_db(p.mean_c_minus_snr_with_db),
            fmt_db(p.mean_c_minus_snr_without_db),
            fmt_err(p.mean_window_rms_error),
            fmt_err(p.mean_ber),
        ));
    }
    Ok((points, csv))
}
