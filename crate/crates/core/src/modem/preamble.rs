//! Packet preamble: a repeated short field for detection and coarse carrier
//! offset, and two identical long training symbols for channel estimation.
//!
//! The structure mirrors the 802.11 preamble (10 short repetitions, a double
//! guard, then two long training symbols) but the training sequences are
//! locally defined pseudo-random values rather than the standard's tables.

use super::config::{logical_index, OfdmConfig};
use super::transforms::SymbolTransforms;
use crate::scalar::{cast, Scalar};
use crate::stream::power;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Fixed seeds so every run of every build derives the same sequences.
const SHORT_SEED: u64 = 0x5EED_0001;
const LONG_SEED: u64 = 0x5EED_0002;

/// Number of short-field repetitions.
pub const SHORT_REPS: usize = 10;

#[derive(Debug, Clone)]
pub struct Preamble<T: Scalar> {
    /// Repeated-structure field for detection and coarse CFO.
    pub short_field: Vec<Complex<T>>,
    /// Guard (cyclic prefix of the training symbol) plus two identical
    /// training symbols.
    pub long_field: Vec<Complex<T>>,
    /// Frequency-domain training values; nonzero exactly on occupied bins.
    pub long_training_grid: Vec<Complex<T>>,
    /// Guard length in front of the long training symbols (`2L`).
    pub guard_len: usize,
    m: usize,
}

impl<T: Scalar> Preamble<T> {
    pub fn len(&self) -> usize {
        self.short_field.len() + self.long_field.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Offset of the long field (guard start) within the preamble.
    pub fn long_field_offset(&self) -> usize {
        self.short_field.len()
    }

    /// Offset of the first long training symbol within the preamble.
    pub fn first_long_symbol_offset(&self) -> usize {
        self.short_field.len() + self.guard_len
    }

    /// Clean time-domain samples of one long training symbol.
    pub fn long_training_time(&self) -> &[Complex<T>] {
        let start = self.guard_len;
        &self.long_field[start..start + self.m]
    }

    /// All preamble samples in transmit order.
    pub fn samples(&self) -> Vec<Complex<T>> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.short_field);
        out.extend_from_slice(&self.long_field);
        out
    }
}

/// Deterministic preamble for the given numerology.
pub fn generate_preamble<T: Scalar>(cfg: &OfdmConfig) -> Preamble<T> {
    let m = cfg.m;
    let occupied = cfg.occupied_bins();
    let transforms = SymbolTransforms::<T>::new(m);

    // Short field: a sparse grid on every 4th logical bin gives a base
    // pattern of period m/4 which is tiled SHORT_REPS times.
    let stride: isize = if m >= 16 { 4 } else { 2 };
    let mut rng = ChaCha8Rng::seed_from_u64(SHORT_SEED);
    let mut short_grid = vec![Complex::new(T::zero(), T::zero()); m];
    for &bin in &occupied {
        let logical = logical_index(m, bin);
        if logical != 0 && logical % stride == 0 {
            let re = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let im = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            short_grid[bin] = Complex::new(cast(re), cast(im));
        }
    }
    let mut short_base = transforms.inverse_unnormalized(&short_grid);
    let p = power(&short_base);
    let g = T::one() / p.sqrt();
    for s in short_base.iter_mut() {
        *s *= g;
    }
    let period = m / stride as usize;
    let mut short_field = Vec::with_capacity(period * SHORT_REPS);
    for _ in 0..SHORT_REPS {
        short_field.extend_from_slice(&short_base[..period]);
    }

    // Long field: pseudo-random BPSK on all occupied bins. The 1/sqrt(occ)
    // scale gives exactly unit mean power for unit-magnitude training values.
    let mut rng = ChaCha8Rng::seed_from_u64(LONG_SEED);
    let mut long_grid = vec![Complex::new(T::zero(), T::zero()); m];
    for &bin in &occupied {
        let v = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        long_grid[bin] = Complex::new(cast(v), T::zero());
    }
    let long_symbol = transforms.grid_to_core(&long_grid, occupied.len());

    let guard_len = 2 * cfg.l;
    let mut long_field = Vec::with_capacity(guard_len + 2 * m);
    long_field.extend_from_slice(&long_symbol[m - guard_len..]);
    long_field.extend_from_slice(&long_symbol);
    long_field.extend_from_slice(&long_symbol);

    Preamble {
        short_field,
        long_field,
        long_training_grid: long_grid,
        guard_len,
        m,
    }
}
