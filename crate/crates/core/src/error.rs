//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample stream")]
    EmptyStream,
    #[error("sample stream has {got} samples, need at least {need}")]
    StreamTooShort { need: usize, got: usize },
    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("sample rate must be positive, got {0}")]
    BadSampleRate(f64),
    #[error("dB ratio requires positive arguments, got {num} / {den}")]
    NonPositiveRatio { num: f64, den: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("window transition of {got} samples is outside 1..={max}")]
    TransitionOutOfRange { got: isize, max: usize },
    #[error("window numerology (m={got_m}, l={got_l}) does not match (m={want_m}, l={want_l})")]
    NumerologyMismatch {
        want_m: usize,
        want_l: usize,
        got_m: usize,
        got_l: usize,
    },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("signal power is zero")]
    ZeroPower,
    #[error("channel estimate is zero on occupied subcarrier bin {0}")]
    ZeroChannelBin(usize),
    #[error("channel model has no taps")]
    EmptyChannel,
    #[error("empty payload")]
    EmptyPayload,
    #[error("empty symbol grids")]
    EmptyGrids,
    #[error("window estimation needs at least 3 OFDM symbols, got {0}")]
    TooFewSymbols(usize),
    #[error(
        "window estimate diverged: mean squared error grew {factor:.1}x over one epoch \
         (step size {step_size}); reduce the step size"
    )]
    Diverged { step_size: f64, factor: f64 },
    #[error("cancellation reports must pair the with-window and no-window methods")]
    MethodMismatch,
    #[error("IQ file format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
