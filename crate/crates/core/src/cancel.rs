//! OFDM signal cancellation with and without the transmit-window estimate.
//!
//! The reconstruction applies the estimated impairments to the rebuilt
//! packet (window, then channel, then CFO ramp) and subtracts it from the
//! received samples; the received stream itself is never inverse-filtered,
//! so other users' signals and the noise are left unshaped. The
//! reconstruction path reuses the same windowing and convolution code as the
//! transmit simulator, so the only differences between the received stream
//! and the reconstruction are estimation errors, bit errors, and noise.

use crate::error::{Error, Result};
use crate::impair::{convolve_trunc, rotate_samples};
use crate::modem::{OfdmConfig, OfdmPacket};
use crate::scalar::Scalar;
use crate::stream::{variance, SampleStream};
use crate::sync::{CfoEstimate, ChannelEstimate};
use crate::window::{apply_window, SymbolWrap, WindowFunction};
use num_complex::Complex;

/// Which reconstruction the report came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CancelMethod {
    NoWindow,
    WithWindow,
}

impl std::fmt::Display for CancelMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CancelMethod::NoWindow => write!(f, "no_window"),
            CancelMethod::WithWindow => write!(f, "with_window"),
        }
    }
}

/// Residue and metrics from one cancellation pass.
#[derive(Debug, Clone)]
pub struct CancellationReport<T: Scalar> {
    pub residue: SampleStream<T>,
    /// Cancellation ratio `10 log10(var(r) / var(u))`.
    pub c_db: f64,
    /// Link SNR when the caller knows or estimated it.
    pub snr_db: Option<f64>,
    pub method: CancelMethod,
    /// Window estimate quality when ground truth was available.
    pub window_rms_error: Option<f64>,
    /// Set when a numerically-zero residue clamped the ratio at +200 dB.
    pub clamped: bool,
}

impl<T: Scalar> CancellationReport<T> {
    /// CSV row: `packet_id,method,snr_db,c_db,window_rms_error`.
    pub fn csv_row(&self, packet_id: usize) -> String {
        let snr = self.snr_db.map(|v| format!("{v:.4}")).unwrap_or_default();
        let rms = self
            .window_rms_error
            .map(|v| format!("{v:.9e}"))
            .unwrap_or_default();
        format!("{packet_id},{},{snr},{:.4},{rms}", self.method, self.c_db)
    }
}

/// Shared estimates and alignment for a cancellation pass.
pub struct CancelContext<'a, T: Scalar> {
    pub channel: &'a ChannelEstimate<T>,
    pub cfo: &'a CfoEstimate,
    /// Known clean samples (pre-channel) immediately preceding the packet,
    /// e.g. the preamble; warm-starts the reconstruction's convolution.
    pub lead_in: &'a [Complex<T>],
    /// Packet-global index of `r.samples[0]`, so the reconstruction's CFO
    /// ramp stays in phase across the whole packet.
    pub start_index: usize,
    pub wrap: SymbolWrap,
    pub cfg: &'a OfdmConfig,
}

fn reconstruct<T: Scalar>(
    s_hat: &OfdmPacket<T>,
    w: &WindowFunction<T>,
    ctx: &CancelContext<'_, T>,
) -> Result<Vec<Complex<T>>> {
    let v = apply_window(s_hat, w, ctx.cfg, ctx.wrap)?;
    let convolved = convolve_trunc(&v.samples, &ctx.channel.time_taps, ctx.lead_in);
    Ok(rotate_samples(
        &convolved,
        ctx.cfo.omega_hat,
        ctx.cfo.phi_hat,
        ctx.start_index as i64,
    ))
}

fn cancel_impl<T: Scalar>(
    r: &SampleStream<T>,
    s_hat: &OfdmPacket<T>,
    w: &WindowFunction<T>,
    ctx: &CancelContext<'_, T>,
    method: CancelMethod,
) -> Result<CancellationReport<T>> {
    let recon = reconstruct(s_hat, w, ctx)?;
    if recon.len() != r.len() {
        return Err(Error::LengthMismatch {
            left: r.len(),
            right: recon.len(),
        });
    }
    let residue = SampleStream::from_samples(
        r.samples
            .iter()
            .zip(&recon)
            .map(|(a, b)| a - b)
            .collect(),
        r.sample_rate_hz,
    );
    let (c_db, clamped) = cancellation_ratio(r, &residue)?;
    Ok(CancellationReport {
        residue,
        c_db,
        snr_db: None,
        method,
        window_rms_error: None,
        clamped,
    })
}

/// Cancellation without a window term: the reconstruction is the serialized
/// packet (equivalently, a rectangular window) through the estimated channel
/// and CFO.
pub fn cancel_no_window<T: Scalar>(
    r: &SampleStream<T>,
    s_hat: &OfdmPacket<T>,
    ctx: &CancelContext<'_, T>,
) -> Result<CancellationReport<T>> {
    let rect = WindowFunction::rectangular(ctx.cfg);
    cancel_impl(r, s_hat, &rect, ctx, CancelMethod::NoWindow)
}

/// Window-aware cancellation: the reconstruction overlap-adds the three
/// windowed copies under `w_hat` before the channel and CFO are applied.
pub fn cancel_with_window<T: Scalar>(
    r: &SampleStream<T>,
    s_hat: &OfdmPacket<T>,
    w_hat: &WindowFunction<T>,
    ctx: &CancelContext<'_, T>,
) -> Result<CancellationReport<T>> {
    cancel_impl(r, s_hat, w_hat, ctx, CancelMethod::WithWindow)
}

/// `10 log10(var(r) / var(u))`; a zero-variance residue clamps at +200 dB
/// and sets the flag.
pub fn cancellation_ratio<T: Scalar>(
    r: &SampleStream<T>,
    u: &SampleStream<T>,
) -> Result<(f64, bool)> {
    let var_r = variance(r)?.to_f64().unwrap_or(0.0);
    let var_u = variance(u)?.to_f64().unwrap_or(0.0);
    if var_u <= 0.0 {
        return Ok((200.0, true));
    }
    if var_r <= 0.0 {
        return Ok((-200.0, false));
    }
    Ok((10.0 * (var_r / var_u).log10(), false))
}

/// `c_with - c_without` in dB for two reports over the same received stream.
pub fn cancellation_improvement<T: Scalar>(
    with_w: &CancellationReport<T>,
    without_w: &CancellationReport<T>,
) -> Result<f64> {
    if with_w.method != CancelMethod::WithWindow || without_w.method != CancelMethod::NoWindow {
        return Err(Error::MethodMismatch);
    }
    if with_w.residue.len() != without_w.residue.len() {
        return Err(Error::LengthMismatch {
            left: with_w.residue.len(),
            right: without_w.residue.len(),
        });
    }
    Ok(with_w.c_db - without_w.c_db)
}
