//! Baseband DSP for windowed OFDM: an 802.11g-style modem, transmit-window
//! estimation from received samples, and OFDM signal cancellation that uses
//! the window estimate.
//!
//! The crate is organized around a small set of value types:
//!
//! * [`SampleStream`] — complex baseband samples plus a sample rate,
//! * [`OfdmConfig`] / [`OfdmPacket`] — numerology and modulated packets,
//! * [`WindowFunction`] — the transmit window over its full support,
//! * [`ChannelModel`] / [`CfoModel`] — link impairments,
//! * [`ChannelEstimate`] / [`CfoEstimate`] — their receiver-side estimates,
//! * [`CancellationReport`] — residue and cancellation-ratio metrics.
//!
//! All sample math is generic over the [`Scalar`] floating-point type
//! (`f32` or `f64`); the `*64` aliases below pin the double-precision
//! instantiation used by the CLI and the experiment harness.

pub mod cancel;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod impair;
pub mod iq;
pub mod modem;
pub mod psd;
pub mod scalar;
pub mod stream;
pub mod sync;
pub mod window;

pub use cancel::{CancelContext, CancelMethod, CancellationReport};
pub use error::{Error, Result};
pub use estimator::{EstimationTrace, EstimatorConfig, WindowEstimationInput, WindowInit};
pub use impair::{CfoModel, ChannelModel, ChannelProfile};
pub use iq::{IqFormat, IqRecording};
pub use modem::{Constellation, Demodulated, OfdmConfig, OfdmPacket, Preamble};
pub use scalar::Scalar;
pub use stream::SampleStream;
pub use sync::{CfoEstimate, ChannelEstimate};
pub use window::{SymbolWrap, WindowFunction};

/// Complex sample in single precision.
pub type Sample32 = num_complex::Complex<f32>;
/// Complex sample in double precision.
pub type Sample64 = num_complex::Complex<f64>;
/// Single-precision sample stream.
pub type Stream32 = SampleStream<f32>;
/// Double-precision sample stream, the default for experiments.
pub type Stream64 = SampleStream<f64>;
/// Double-precision OFDM packet.
pub type Packet64 = OfdmPacket<f64>;
/// Double-precision transmit window.
pub type Window64 = WindowFunction<f64>;
/// Double-precision channel estimate.
pub type ChannelEstimate64 = ChannelEstimate<f64>;
/// Double-precision cancellation report.
pub type Report64 = CancellationReport<f64>;
