//! Modulated OFDM packet.

use crate::scalar::Scalar;
use num_complex::Complex;

/// A packet of `N` OFDM symbols: the frequency-domain grids, the time-domain
/// symbols with their mandatory cyclic prefix, and the payload bits.
///
/// `time_symbols[p]` holds `K = M + L` samples; the sample at symbol-relative
/// index `k` (for `-L <= k <= M-1`) is stored at `time_symbols[p][k + L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmPacket<T: Scalar> {
    pub grids: Vec<Vec<Complex<T>>>,
    pub time_symbols: Vec<Vec<Complex<T>>>,
    pub payload_bits: Vec<bool>,
}

impl<T: Scalar> OfdmPacket<T> {
    pub fn n_symbols(&self) -> usize {
        self.grids.len()
    }

    /// Transform size, recovered from the grid length.
    pub fn m(&self) -> usize {
        self.grids.first().map(|g| g.len()).unwrap_or(0)
    }

    /// The core `M` samples of symbol `p` (cyclic prefix stripped).
    pub fn core(&self, p: usize) -> &[Complex<T>] {
        let k = self.time_symbols[p].len();
        &self.time_symbols[p][k - self.m()..]
    }
}
