//! Experiment harness: synthetic sweeps, recorded-IQ processing, and the
//! single-packet pipeline they share.

pub mod ota;
pub mod pipeline;
pub mod sweeps;

pub use ota::{generate_recording, run_ota, OtaOptions, OtaPacketReport, OtaResult, RecordingSpec};
pub use pipeline::{
    bit_error_rate, process_packet, subseed, synthesize_packet, LinkSpec, ProcessedPacket,
    SyntheticPacket,
};
pub use sweeps::{
    parse_profile, run_cancellation_sweep, run_window_error_sweep, CancelSweepPoint, SweepConfig,
    WindowSweepPoint,
};
