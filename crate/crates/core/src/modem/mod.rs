//! OFDM modem: bits to packets and back.
//!
//! The transmit path maps Gray-coded constellation points onto the data
//! subcarriers, inserts fixed pilots, inverse-transforms each grid, and
//! prepends the mandatory cyclic prefix. The receive path undoes each step
//! with single-tap equalization against a channel estimate and pilot-based
//! common-phase-error correction before hard decisions.

mod config;
mod constellation;
mod packet;
mod preamble;
pub(crate) mod transforms;

pub use config::{logical_index, OfdmConfig};
pub use constellation::Constellation;
pub use packet::OfdmPacket;
pub use preamble::{generate_preamble, Preamble, SHORT_REPS};

use crate::error::{Error, Result};
use crate::impair::rotate_samples;
use crate::scalar::{cast, Scalar};
use crate::stream::SampleStream;
use crate::sync::{CfoEstimate, ChannelEstimate};
use num_complex::Complex;
use transforms::SymbolTransforms;

/// Demodulation result: decided bits, the re-sliced decided grids, and
/// per-symbol diagnostics.
#[derive(Debug, Clone)]
pub struct Demodulated<T: Scalar> {
    pub bits: Vec<bool>,
    /// Hard-decision grids: decided points on data bins, known pilots on
    /// pilot bins, zeros on nulls.
    pub hard_grids: Vec<Vec<Complex<T>>>,
    /// Pilot-measured common phase error per symbol, radians.
    pub cpe_per_symbol: Vec<f64>,
    /// RMS error vector magnitude over data bins, relative to the decided
    /// points.
    pub evm_rms: f64,
}

/// Number of OFDM symbols needed to carry `bit_count` payload bits.
pub fn symbols_for_bits(bit_count: usize, cfg: &OfdmConfig) -> usize {
    let per_symbol = cfg.bits_per_ofdm_symbol();
    bit_count.div_ceil(per_symbol)
}

/// Map payload bits onto OFDM symbols.
///
/// The payload is zero-padded to fill the final symbol; the padded bits are
/// recorded in the returned packet. Mean transmit power is normalized to 1.0
/// by construction (deterministically, not per-realization).
pub fn modulate<T: Scalar>(bits: &[bool], cfg: &OfdmConfig) -> Result<OfdmPacket<T>> {
    cfg.validate()?;
    if bits.is_empty() {
        return Err(Error::EmptyPayload);
    }
    let per_symbol = cfg.bits_per_ofdm_symbol();
    let n_symbols = symbols_for_bits(bits.len(), cfg);
    let mut padded = bits.to_vec();
    padded.resize(n_symbols * per_symbol, false);

    let transforms = SymbolTransforms::<T>::new(cfg.m);
    let occ = cfg.occupied_bins().len();
    let bps = cfg.constellation.bits_per_symbol();

    let mut grids = Vec::with_capacity(n_symbols);
    let mut time_symbols = Vec::with_capacity(n_symbols);
    for p in 0..n_symbols {
        let mut grid = vec![Complex::new(T::zero(), T::zero()); cfg.m];
        for (&bin, pilot) in cfg.pilot_subcarriers.iter().zip(&cfg.pilot_values) {
            grid[bin] = Complex::new(cast(pilot.re), cast(pilot.im));
        }
        let sym_bits = &padded[p * per_symbol..(p + 1) * per_symbol];
        for (d, &bin) in cfg.data_subcarriers.iter().enumerate() {
            grid[bin] = cfg.constellation.map(&sym_bits[d * bps..(d + 1) * bps]);
        }

        let core = transforms.grid_to_core(&grid, occ);
        let mut sym = Vec::with_capacity(cfg.k_sym());
        sym.extend_from_slice(&core[cfg.m - cfg.l..]);
        sym.extend_from_slice(&core);
        grids.push(grid);
        time_symbols.push(sym);
    }

    Ok(OfdmPacket {
        grids,
        time_symbols,
        payload_bits: padded,
    })
}

/// Concatenate the packet's symbols with no windowing and no overlap.
///
/// This is the unwindowed transmit stream; its length is exactly `N * K`.
pub fn serialize<T: Scalar>(pkt: &OfdmPacket<T>, cfg: &OfdmConfig) -> SampleStream<T> {
    let mut samples = Vec::with_capacity(pkt.n_symbols() * cfg.k_sym());
    for sym in &pkt.time_symbols {
        samples.extend_from_slice(sym);
    }
    SampleStream::from_samples(samples, cfg.sample_rate_hz)
}

/// Per-symbol frequency grids of a CFO-corrected payload span.
///
/// The transform window for each symbol is advanced `cfg.fft_advance`
/// samples into the cyclic prefix and the resulting cyclic rotation is
/// undone per bin.
pub(crate) fn received_grids<T: Scalar>(
    corrected: &[Complex<T>],
    n_symbols: usize,
    cfg: &OfdmConfig,
) -> Vec<Vec<Complex<T>>> {
    let transforms = SymbolTransforms::<T>::new(cfg.m);
    let occ = cfg.occupied_bins().len();
    let k_sym = cfg.k_sym();
    let advance = cfg.fft_advance;
    let advance_comp: Vec<Complex<T>> = (0..cfg.m)
        .map(|m| {
            crate::scalar::cis::<T>(
                2.0 * std::f64::consts::PI * (m * advance) as f64 / cfg.m as f64,
            )
        })
        .collect();
    (0..n_symbols)
        .map(|p| {
            let start = p * k_sym + cfg.l - advance;
            let mut grid = transforms.core_to_grid(&corrected[start..start + cfg.m], occ);
            if advance > 0 {
                for (g, comp) in grid.iter_mut().zip(&advance_comp) {
                    *g = *g * *comp;
                }
            }
            grid
        })
        .collect()
}

/// Demodulate `n_symbols` OFDM symbols from a time-aligned stream.
///
/// `start_index` is the packet-global index of `rx.samples[0]`, used to keep
/// the CFO correction ramp in phase with the estimate's reference point.
pub fn demodulate<T: Scalar>(
    rx: &SampleStream<T>,
    chan_est: &ChannelEstimate<T>,
    cfo_est: &CfoEstimate,
    start_index: usize,
    n_symbols: usize,
    cfg: &OfdmConfig,
) -> Result<Demodulated<T>> {
    let k_sym = cfg.k_sym();
    if rx.len() < n_symbols * k_sym {
        return Err(Error::StreamTooShort {
            need: n_symbols * k_sym,
            got: rx.len(),
        });
    }
    let occupied = cfg.occupied_bins();
    for &bin in &occupied {
        if chan_est.freq_response[bin].norm_sqr() == T::zero() {
            return Err(Error::ZeroChannelBin(bin));
        }
    }

    let corrected = rotate_samples(
        &rx.samples[..n_symbols * k_sym],
        -cfo_est.omega_hat,
        -cfo_est.phi_hat,
        start_index as i64,
    );

    let grids = received_grids(&corrected, n_symbols, cfg);

    let mut bits = Vec::with_capacity(n_symbols * cfg.bits_per_ofdm_symbol());
    let mut hard_grids = Vec::with_capacity(n_symbols);
    let mut cpe_per_symbol = Vec::with_capacity(n_symbols);
    let mut evm_acc = 0.0f64;
    let mut evm_n = 0usize;

    for p in 0..n_symbols {
        let grid = &grids[p];

        // Single-tap equalization, then pilot-based common phase error.
        let mut cpe_acc = Complex::new(T::zero(), T::zero());
        for (&bin, pilot) in cfg.pilot_subcarriers.iter().zip(&cfg.pilot_values) {
            let eq = grid[bin] / chan_est.freq_response[bin];
            let p_known = Complex::new(cast::<T>(pilot.re), cast::<T>(pilot.im));
            cpe_acc += eq * p_known.conj();
        }
        let cpe = if cfg.pilot_subcarriers.is_empty() {
            0.0
        } else {
            cpe_acc.arg().to_f64().unwrap_or(0.0)
        };
        cpe_per_symbol.push(cpe);
        let derotate = Complex::new(cast::<T>(cpe.cos()), cast::<T>(-cpe.sin()));

        let mut hard = vec![Complex::new(T::zero(), T::zero()); cfg.m];
        for (&bin, pilot) in cfg.pilot_subcarriers.iter().zip(&cfg.pilot_values) {
            hard[bin] = Complex::new(cast(pilot.re), cast(pilot.im));
        }
        for &bin in &cfg.data_subcarriers {
            let eq = grid[bin] / chan_est.freq_response[bin] * derotate;
            let point = cfg.constellation.decide(eq, &mut bits);
            hard[bin] = point;
            evm_acc += (eq - point).norm_sqr().to_f64().unwrap_or(0.0);
            evm_n += 1;
        }
        hard_grids.push(hard);
    }

    Ok(Demodulated {
        bits,
        hard_grids,
        cpe_per_symbol,
        evm_rms: if evm_n == 0 {
            0.0
        } else {
            (evm_acc / evm_n as f64).sqrt()
        },
    })
}

/// Rebuild a clean packet from hard-decision grids.
///
/// Same pipeline as [`modulate`] after the bit-mapping stage; the payload
/// bits are recovered from the grid points.
pub fn remodulate<T: Scalar>(
    hard_grids: &[Vec<Complex<T>>],
    cfg: &OfdmConfig,
) -> Result<OfdmPacket<T>> {
    if hard_grids.is_empty() {
        return Err(Error::EmptyGrids);
    }
    let transforms = SymbolTransforms::<T>::new(cfg.m);
    let occ = cfg.occupied_bins().len();

    let mut bits = Vec::with_capacity(hard_grids.len() * cfg.bits_per_ofdm_symbol());
    let mut time_symbols = Vec::with_capacity(hard_grids.len());
    for grid in hard_grids {
        if grid.len() != cfg.m {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: cfg.m,
            });
        }
        for &bin in &cfg.data_subcarriers {
            cfg.constellation.decide(grid[bin], &mut bits);
        }
        let core = transforms.grid_to_core(grid, occ);
        let mut sym = Vec::with_capacity(cfg.k_sym());
        sym.extend_from_slice(&core[cfg.m - cfg.l..]);
        sym.extend_from_slice(&core);
        time_symbols.push(sym);
    }

    Ok(OfdmPacket {
        grids: hard_grids.to_vec(),
        time_symbols,
        payload_bits: bits,
    })
}
