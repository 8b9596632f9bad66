//! Symbol-level FFT helpers with the crate's fixed scaling convention.
//!
//! A grid `X[m]` maps to the time-domain core as
//! `x[k] = (1 / sqrt(occ)) * sum_m X[m] e^{j 2 pi m k / M}`, which puts the
//! mean transmit power at 1.0 for unit-power constellations on `occ`
//! occupied bins. The forward path inverts that scaling exactly.

use crate::scalar::{cast, Scalar};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct SymbolTransforms<T: Scalar> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    m: usize,
}

impl<T: Scalar> SymbolTransforms<T> {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            m,
        }
    }

    /// Unnormalized inverse transform: `sum_m X[m] e^{j 2 pi m k / M}`.
    pub fn inverse_unnormalized(&self, grid: &[Complex<T>]) -> Vec<Complex<T>> {
        debug_assert_eq!(grid.len(), self.m);
        let mut buf = grid.to_vec();
        self.inverse.process(&mut buf);
        buf
    }

    /// Grid to time-domain core with the `1/sqrt(occ)` power normalization.
    pub fn grid_to_core(&self, grid: &[Complex<T>], occupied: usize) -> Vec<Complex<T>> {
        let mut buf = self.inverse_unnormalized(grid);
        let g = T::one() / cast::<T>(occupied as f64).sqrt();
        for b in buf.iter_mut() {
            *b *= g;
        }
        buf
    }

    /// Time-domain core back to the grid; exact inverse of [`grid_to_core`].
    pub fn core_to_grid(&self, core: &[Complex<T>], occupied: usize) -> Vec<Complex<T>> {
        debug_assert_eq!(core.len(), self.m);
        let mut buf = core.to_vec();
        self.forward.process(&mut buf);
        let g = cast::<T>(occupied as f64).sqrt() / cast::<T>(self.m as f64);
        for b in buf.iter_mut() {
            *b *= g;
        }
        buf
    }
}
