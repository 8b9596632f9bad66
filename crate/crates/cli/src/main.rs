//! `wofdm`: batch experiments for windowed-OFDM signal cancellation.
//!
//! Subcommands: `window-sweep`, `cancel-sweep`, `ota`, `gen-iq`, `psd`.
//! Exit codes: 0 on success, 2 when an `ota` run finds no packets, 1 on any
//! error.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use wofdm_core::estimator::EstimatorConfig;
use wofdm_core::experiments::{
    generate_recording, parse_profile, run_cancellation_sweep, run_ota, run_window_error_sweep,
    OtaOptions, RecordingSpec, SweepConfig,
};
use wofdm_core::impair::ChannelProfile;
use wofdm_core::iq::{load_iq, save_iq, IqFormat};
use wofdm_core::psd::{bin_frequencies, psd_db, PsdConfig, PsdWindow};
use wofdm_core::window::SymbolWrap;

#[derive(Parser)]
#[command(name = "wofdm", version, about = "Windowed-OFDM cancellation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Window-estimation RMS error versus SNR (CSV output).
    WindowSweep(SweepArgs),
    /// Cancellation with and without the window estimate over an
    /// (SNR, transition-time) grid (CSV output).
    CancelSweep(SweepArgs),
    /// Run both cancellation paths on a recorded IQ file.
    Ota(OtaArgs),
    /// Synthesize an IQ recording for loopback experiments.
    GenIq(GenIqArgs),
    /// Welch power spectral density of an IQ file (CSV output).
    Psd(PsdArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep configuration; flags below override individual fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in parameter set.
    #[arg(long, value_parser = ["desk", "paper"])]
    preset: Option<String>,
    /// Comma-separated SNR grid in dB ("inf" for a noiseless control).
    #[arg(long, value_delimiter = ',')]
    snr: Vec<f64>,
    /// Comma-separated window transition times in ns (0 = no window).
    #[arg(long = "transition-ns", value_delimiter = ',')]
    transition_ns: Vec<f64>,
    #[arg(long)]
    packets: Option<usize>,
    #[arg(long)]
    payload_bytes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Numerology profile (80211g-qpsk, 80211g-qam16, 80211g-qam64).
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl SweepArgs {
    fn resolve(&self, window_sweep: bool) -> Result<SweepConfig> {
        let mut cfg = match (self.config.as_ref(), self.preset.as_deref()) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some("paper")) => {
                if window_sweep {
                    let mut c = SweepConfig::desk_window_sweep();
                    c.snr_grid_db = (0..=10).map(|i| 20.0 + i as f64).collect();
                    c.packets_per_point = 50;
                    c
                } else {
                    SweepConfig::paper()
                }
            }
            (None, _) => {
                if window_sweep {
                    SweepConfig::desk_window_sweep()
                } else {
                    SweepConfig::desk()
                }
            }
        };
        if !self.snr.is_empty() {
            cfg.snr_grid_db = self.snr.clone();
        }
        if !self.transition_ns.is_empty() {
            cfg.transition_times_s = self.transition_ns.iter().map(|t| t * 1e-9).collect();
        }
        if let Some(p) = self.packets {
            cfg.packets_per_point = p;
        }
        if let Some(p) = self.payload_bytes {
            cfg.payload_bytes = p;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = &self.profile {
            cfg.profile = p.clone();
        }
        if let Some(d) = &self.out_dir {
            cfg.output_dir = d.clone();
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct OtaArgs {
    /// Recorded IQ file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "cf32le")]
    format: String,
    #[arg(long, default_value_t = 20e6)]
    sample_rate: f64,
    #[arg(long, default_value = "80211g-qam64")]
    profile: String,
    /// Payload symbols per packet; inferred from the energy envelope when
    /// not given.
    #[arg(long)]
    symbols: Option<usize>,
    #[arg(long, default_value_t = 256)]
    psd_fft: usize,
    #[arg(long)]
    max_packets: Option<usize>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GenIqArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    packets: usize,
    #[arg(long, default_value_t = 1000)]
    payload_bytes: usize,
    #[arg(long = "transition-ns", default_value_t = 500.0)]
    transition_ns: f64,
    #[arg(long, default_value_t = 30.0)]
    snr_db: f64,
    /// Silence between packets, in samples.
    #[arg(long, default_value_t = 2000)]
    gap: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "cf32le")]
    format: String,
    #[arg(long, default_value = "80211g-qam64")]
    profile: String,
    /// Channel profile: flat or exponential.
    #[arg(long, default_value = "exponential")]
    channel: String,
}

#[derive(Args)]
struct PsdArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "cf32le")]
    format: String,
    #[arg(long, default_value_t = 20e6)]
    sample_rate: f64,
    #[arg(long, default_value_t = 1024)]
    fft_size: usize,
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    /// Output CSV path; defaults next to the input.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_file(dir: &PathBuf, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::WindowSweep(args) => {
            let cfg = args.resolve(true)?;
            let (points, csv) = run_window_error_sweep(&cfg)?;
            write_file(&cfg.output_dir, "window_sweep.csv", &csv)?;
            for p in &points {
                println!(
                    "snr {:>8.1} dB: window rms error {:.4e} (+/- {:.2e}) over {} packets",
                    p.snr_db, p.mean_rms_error, p.std_rms_error, p.packets
                );
            }
            Ok(0)
        }
        Command::CancelSweep(args) => {
            let cfg = args.resolve(false)?;
            let (points, csv) = run_cancellation_sweep(&cfg)?;
            write_file(&cfg.output_dir, "cancel_sweep.csv", &csv)?;
            for p in &points {
                println!(
                    "snr {:>5.1} dB, T {:>6.0} ns: c_with {:>7.2} dB, c_without {:>7.2} dB, \
                     improvement {:>6.2} dB",
                    p.snr_db,
                    p.transition_time_s * 1e9,
                    p.mean_c_with_db,
                    p.mean_c_without_db,
                    p.improvement_db
                );
            }
            Ok(0)
        }
        Command::Ota(args) => {
            let format: IqFormat = args.format.parse().map_err(anyhow::Error::msg)?;
            let cfg = parse_profile(&args.profile)?;
            let recording = load_iq::<f64>(&args.input, format, args.sample_rate)?;
            if (recording.stream.sample_rate_hz - cfg.sample_rate_hz).abs()
                > 1e-6 * cfg.sample_rate_hz
            {
                anyhow::bail!(
                    "recording sample rate {} does not match the numerology's {}",
                    recording.stream.sample_rate_hz,
                    cfg.sample_rate_hz
                );
            }
            let opts = OtaOptions {
                est: EstimatorConfig {
                    wrap: SymbolWrap::ZeroEdges,
                    ..Default::default()
                },
                n_symbols: args.symbols,
                psd_fft: args.psd_fft,
                max_packets: args.max_packets,
            };
            let result = run_ota(&recording, &cfg, &opts)?;
            write_file(&args.out_dir, "ota_packets.csv", &result.per_packet_csv)?;
            write_file(&args.out_dir, "ota_summary.csv", &result.summary_csv)?;
            if let Some(psd) = &result.psd_csv {
                write_file(&args.out_dir, "ota_psd.csv", psd)?;
            }
            if let Some(w) = &result.window_csv {
                write_file(&args.out_dir, "ota_window.csv", w)?;
            }
            if let Some(t) = &result.trace_csv {
                write_file(&args.out_dir, "ota_trace.csv", t)?;
            }
            if result.packets.is_empty() {
                eprintln!("no packets found in {}", args.input.display());
                return Ok(2);
            }
            println!(
                "{} packets: mean c_with {:.2} dB, mean c_without {:.2} dB, \
                 mean improvement {:.2} dB",
                result.packets.len(),
                result.mean_c_with_db,
                result.mean_c_without_db,
                result.mean_improvement_db
            );
            Ok(0)
        }
        Command::GenIq(args) => {
            let format: IqFormat = args.format.parse().map_err(anyhow::Error::msg)?;
            let channel_profile: ChannelProfile =
                args.channel.parse().map_err(anyhow::Error::msg)?;
            let cfg = parse_profile(&args.profile)?;
            let spec = RecordingSpec {
                packets: args.packets,
                payload_bytes: args.payload_bytes,
                transition_time_s: args.transition_ns * 1e-9,
                snr_db: args.snr_db,
                gap_samples: args.gap,
                channel_profile,
                rms_delay_taps: 2.0,
                max_cfo_hz: 20e3,
                seed: args.seed,
                format,
            };
            let stream = generate_recording::<f64>(&spec, &cfg)?;
            save_iq(&stream, &args.out, format)?;
            println!(
                "wrote {} ({} samples, {} packets, {} at {} dB SNR)",
                args.out.display(),
                stream.len(),
                args.packets,
                format,
                args.snr_db
            );
            Ok(0)
        }
        Command::Psd(args) => {
            let format: IqFormat = args.format.parse().map_err(anyhow::Error::msg)?;
            let recording = load_iq::<f64>(&args.input, format, args.sample_rate)?;
            let cfg = PsdConfig {
                fft_size: args.fft_size,
                overlap: args.overlap,
                window: PsdWindow::Hann,
            };
            let p = psd_db(&recording.stream, &cfg)?;
            let freqs = bin_frequencies(cfg.fft_size, args.sample_rate);
            let mut csv = String::from("bin,freq_hz,psd_db\n");
            for (b, (f, v)) in freqs.iter().zip(&p).enumerate() {
                csv.push_str(&format!("{b},{f:.1},{v:.3}\n"));
            }
            let out = args
                .out
                .unwrap_or_else(|| args.input.with_extension("psd.csv"));
            fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
