//! OFDM numerology.

use super::constellation::Constellation;
use crate::error::{Error, Result};
use num_complex::Complex;

/// OFDM numerology: transform size, mandatory cyclic prefix, subcarrier map,
/// constellation, and sample rate.
///
/// Subcarriers are FFT bin indices in `0..m`; bins above `m/2` carry the
/// negative logical frequencies.
#[derive(Debug, Clone)]
pub struct OfdmConfig {
    /// Transform size (total subcarrier count).
    pub m: usize,
    /// Mandatory cyclic prefix length, `l < m`.
    pub l: usize,
    /// Data-bearing bins, kept sorted by logical frequency.
    pub data_subcarriers: Vec<usize>,
    /// Pilot bins, kept sorted by logical frequency.
    pub pilot_subcarriers: Vec<usize>,
    /// Fixed pilot values, one per pilot bin.
    pub pilot_values: Vec<Complex<f64>>,
    pub constellation: Constellation,
    pub sample_rate_hz: f64,
    /// Receiver FFT-window advance into the cyclic prefix, in samples.
    ///
    /// Pulling the transform window a few samples ahead of the nominal
    /// symbol start keeps the transmit window's edge transitions (and their
    /// overlap with the next symbol) out of the demodulated core at the cost
    /// of the same number of samples of multipath margin.
    pub fft_advance: usize,
}

/// Logical (signed) frequency index of an FFT bin.
pub fn logical_index(m: usize, bin: usize) -> isize {
    if bin < m / 2 {
        bin as isize
    } else {
        bin as isize - m as isize
    }
}

impl OfdmConfig {
    /// OFDM symbol length `K = M + L`.
    pub fn k_sym(&self) -> usize {
        self.m + self.l
    }

    /// Data plus pilot bins in logical frequency order.
    pub fn occupied_bins(&self) -> Vec<usize> {
        let mut bins: Vec<usize> = self
            .data_subcarriers
            .iter()
            .chain(self.pilot_subcarriers.iter())
            .copied()
            .collect();
        bins.sort_by_key(|&b| logical_index(self.m, b));
        bins
    }

    /// Bins that carry no energy.
    pub fn null_subcarriers(&self) -> Vec<usize> {
        let occupied: std::collections::HashSet<usize> =
            self.occupied_bins().into_iter().collect();
        (0..self.m).filter(|b| !occupied.contains(b)).collect()
    }

    pub fn bits_per_ofdm_symbol(&self) -> usize {
        self.constellation.bits_per_symbol() * self.data_subcarriers.len()
    }

    /// The 802.11g-like profile: M = 64, L = 16, 48 data bins, 4 pilots at
    /// logical ±7 and ±21, 20 Msps.
    pub fn wifi_80211g(constellation: Constellation) -> Self {
        let to_bin = |logical: isize| -> usize {
            if logical >= 0 {
                logical as usize
            } else {
                (64 + logical) as usize
            }
        };
        let pilot_logical: [isize; 4] = [-21, -7, 7, 21];
        let mut data = Vec::new();
        for logical in -26isize..=26 {
            if logical == 0 || pilot_logical.contains(&logical) {
                continue;
            }
            data.push(to_bin(logical));
        }
        let cfg = Self {
            m: 64,
            l: 16,
            data_subcarriers: data,
            pilot_subcarriers: pilot_logical.iter().map(|&p| to_bin(p)).collect(),
            pilot_values: vec![
                Complex::new(1.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(-1.0, 0.0),
            ],
            constellation,
            sample_rate_hz: 20e6,
            fft_advance: 4,
        };
        cfg.validate().expect("802.11g profile is valid");
        cfg
    }

    /// Tiny numerology for brute-force oracles: every bin except DC carries
    /// data, no pilots.
    pub fn toy(m: usize, l: usize, constellation: Constellation) -> Self {
        let mut data: Vec<usize> = (1..m).collect();
        data.sort_by_key(|&b| logical_index(m, b));
        let cfg = Self {
            m,
            l,
            data_subcarriers: data,
            pilot_subcarriers: vec![],
            pilot_values: vec![],
            constellation,
            sample_rate_hz: 20e6,
            fft_advance: l / 4,
        };
        cfg.validate().expect("toy profile is valid");
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 4 {
            return Err(Error::InvalidConfig(format!("m = {} too small", self.m)));
        }
        if self.l == 0 || self.l >= self.m {
            return Err(Error::InvalidConfig(format!(
                "prefix l = {} must satisfy 1 <= l < m = {}",
                self.l, self.m
            )));
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(Error::BadSampleRate(self.sample_rate_hz));
        }
        if self.pilot_values.len() != self.pilot_subcarriers.len() {
            return Err(Error::InvalidConfig(
                "pilot_values length must match pilot_subcarriers".into(),
            ));
        }
        if self.fft_advance >= self.l {
            return Err(Error::InvalidConfig(format!(
                "fft_advance {} must be smaller than the prefix l = {}",
                self.fft_advance, self.l
            )));
        }
        if self.data_subcarriers.is_empty() {
            return Err(Error::InvalidConfig("no data subcarriers".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &b in self.data_subcarriers.iter().chain(&self.pilot_subcarriers) {
            if b >= self.m {
                return Err(Error::InvalidConfig(format!("bin {b} out of range")));
            }
            if !seen.insert(b) {
                return Err(Error::InvalidConfig(format!("bin {b} assigned twice")));
            }
        }
        Ok(())
    }
}
