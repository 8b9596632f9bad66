//! Preamble-based estimation: carrier frequency offset, channel response,
//! pilot-tracked CFO refinement, and packet timing for recorded streams.

use crate::error::{Error, Result};
use crate::impair::rotate_samples;
use crate::modem::transforms::SymbolTransforms;
use crate::modem::{generate_preamble, logical_index, OfdmConfig, Preamble, SHORT_REPS};
use crate::scalar::{cast, Scalar};
use crate::stream::SampleStream;
use num_complex::Complex;

/// Carrier-frequency-offset estimate.
///
/// The repeated-field estimator is unambiguous for |omega| < pi / M.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfoEstimate {
    /// Radians per sample.
    pub omega_hat: f64,
    /// Starting phase in radians, referenced to packet-global sample 0.
    pub phi_hat: f64,
}

/// Channel estimate as a per-bin frequency response plus its first `L`
/// time-domain taps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate<T: Scalar> {
    pub freq_response: Vec<Complex<T>>,
    pub time_taps: Vec<Complex<T>>,
}

impl<T: Scalar> ChannelEstimate<T> {
    /// Exact estimate from known taps (genie estimates in tests and sweeps).
    pub fn from_taps(taps: &[Complex<T>], m: usize, l: usize) -> Self {
        let mut freq_response = Vec::with_capacity(m);
        for bin in 0..m {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, h) in taps.iter().enumerate() {
                let ph = -2.0 * std::f64::consts::PI * (bin * j) as f64 / m as f64;
                acc += *h * Complex::new(cast::<T>(ph.cos()), cast::<T>(ph.sin()));
            }
            freq_response.push(acc);
        }
        let mut time_taps = taps.to_vec();
        time_taps.resize(l, Complex::new(T::zero(), T::zero()));
        time_taps.truncate(l);
        Self {
            freq_response,
            time_taps,
        }
    }

    /// Build from per-bin estimates on the occupied bins: nulls are filled
    /// by interpolation for the frequency response, while the time taps are
    /// a least-squares `L`-tap fit to the occupied bins alone.
    ///
    /// Fitting the taps to the measured bins (rather than inverse-
    /// transforming the interpolated response and truncating) keeps the
    /// made-up null values out of the reconstruction: a truncated inverse
    /// transform leaks the band-edge extrapolation error back into the
    /// occupied bins and caps cancellation for frequency-selective channels.
    pub fn from_occupied(
        mut freq_response: Vec<Complex<T>>,
        occupied: &[usize],
        m: usize,
        l: usize,
    ) -> Self {
        let time_taps = fit_taps_to_occupied(&freq_response, occupied, m, l);
        interpolate_nulls(&mut freq_response, occupied, m);
        Self {
            freq_response,
            time_taps,
        }
    }
}

/// Least-squares fit of `l` causal taps to the occupied-bin response.
fn fit_taps_to_occupied<T: Scalar>(
    freq_response: &[Complex<T>],
    occupied: &[usize],
    m: usize,
    l: usize,
) -> Vec<Complex<T>> {
    let to64 = |c: Complex<T>| {
        Complex::new(c.re.to_f64().unwrap_or(0.0), c.im.to_f64().unwrap_or(0.0))
    };
    // Normal equations in f64: (A^H A) h = A^H b with A[row][tap] =
    // exp(-j 2 pi bin tap / m) over the occupied bins.
    let mut ata = vec![vec![Complex::new(0.0f64, 0.0); l]; l];
    let mut atb = vec![Complex::new(0.0f64, 0.0); l];
    for &bin in occupied {
        let b = to64(freq_response[bin]);
        let a: Vec<Complex<f64>> = (0..l)
            .map(|tap| {
                let ph = -2.0 * std::f64::consts::PI * (bin * tap) as f64 / m as f64;
                Complex::new(ph.cos(), ph.sin())
            })
            .collect();
        for i in 0..l {
            atb[i] += a[i].conj() * b;
            for j in 0..l {
                ata[i][j] += a[i].conj() * a[j];
            }
        }
    }
    let taps = solve_hermitian(&mut ata, &mut atb);
    taps.into_iter()
        .map(|t| Complex::new(cast::<T>(t.re), cast::<T>(t.im)))
        .collect()
}

/// Gaussian elimination with partial pivoting for the small tap systems.
fn solve_hermitian(
    a: &mut [Vec<Complex<f64>>],
    b: &mut [Complex<f64>],
) -> Vec<Complex<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .norm_sqr()
                    .partial_cmp(&a[j][col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        if diag.norm_sqr() == 0.0 {
            continue;
        }
        for row in col + 1..n {
            let factor = a[row][col] / diag;
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![Complex::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = if a[row][row].norm_sqr() > 0.0 {
            acc / a[row][row]
        } else {
            Complex::new(0.0, 0.0)
        };
    }
    x
}

/// Estimate the CFO from the two repeats of the long training field.
///
/// `preamble_rx` must be time-aligned so that the preamble starts at sample
/// 0; the returned phase is referenced to that sample.
pub fn estimate_cfo<T: Scalar>(
    preamble_rx: &SampleStream<T>,
    cfg: &OfdmConfig,
) -> Result<CfoEstimate> {
    let preamble: Preamble<T> = generate_preamble(cfg);
    if preamble_rx.len() < preamble.len() {
        return Err(Error::StreamTooShort {
            need: preamble.len(),
            got: preamble_rx.len(),
        });
    }
    let m = cfg.m;
    let lt = preamble.first_long_symbol_offset();
    let x = &preamble_rx.samples;

    let mut corr = Complex::new(0.0f64, 0.0f64);
    for t in lt..lt + m {
        let a = x[t + m];
        let b = x[t];
        let prod = a * b.conj();
        corr += Complex::new(
            prod.re.to_f64().unwrap_or(0.0),
            prod.im.to_f64().unwrap_or(0.0),
        );
    }
    let omega_hat = corr.arg() / m as f64;

    // Starting phase from the mean rotation of the corrected training field
    // against the clean training samples.
    let clean = preamble.long_training_time();
    let mut acc = Complex::new(0.0f64, 0.0f64);
    for t in lt..lt + 2 * m {
        let ph = -omega_hat * t as f64;
        let rotated = x[t] * Complex::new(cast::<T>(ph.cos()), cast::<T>(ph.sin()));
        let prod = rotated * clean[(t - lt) % m].conj();
        acc += Complex::new(
            prod.re.to_f64().unwrap_or(0.0),
            prod.im.to_f64().unwrap_or(0.0),
        );
    }
    Ok(CfoEstimate {
        omega_hat,
        phi_hat: acc.arg(),
    })
}

/// Least-squares per-bin channel estimate from the two long training
/// symbols, averaged, with null bins filled by linear interpolation of
/// magnitude and unwrapped phase (band edges hold the outermost anchor).
pub fn estimate_channel<T: Scalar>(
    preamble_rx: &SampleStream<T>,
    cfo: &CfoEstimate,
    cfg: &OfdmConfig,
) -> Result<ChannelEstimate<T>> {
    let preamble: Preamble<T> = generate_preamble(cfg);
    if preamble_rx.len() < preamble.len() {
        return Err(Error::StreamTooShort {
            need: preamble.len(),
            got: preamble_rx.len(),
        });
    }
    let m = cfg.m;
    let lt = preamble.first_long_symbol_offset();
    let corrected = rotate_samples(
        &preamble_rx.samples[lt..lt + 2 * m],
        -cfo.omega_hat,
        -cfo.phi_hat,
        lt as i64,
    );
    if crate::stream::power(&corrected) == T::zero() {
        return Err(Error::ZeroPower);
    }

    let occupied = cfg.occupied_bins();
    let transforms = SymbolTransforms::<T>::new(m);
    let z1 = transforms.core_to_grid(&corrected[..m], occupied.len());
    let z2 = transforms.core_to_grid(&corrected[m..], occupied.len());

    let half = cast::<T>(0.5);
    let mut freq_response = vec![Complex::new(T::zero(), T::zero()); m];
    for &bin in &occupied {
        let t = preamble.long_training_grid[bin];
        if t.norm_sqr() == T::zero() {
            return Err(Error::ZeroPower);
        }
        freq_response[bin] = (z1[bin] + z2[bin]) * half / t;
    }
    Ok(ChannelEstimate::from_occupied(freq_response, &occupied, m, cfg.l))
}

/// Fill null bins by linear interpolation of magnitude and unwrapped phase
/// between the nearest occupied anchors (in logical frequency order); bins
/// beyond the outermost anchors hold the edge value.
fn interpolate_nulls<T: Scalar>(
    freq_response: &mut [Complex<T>],
    occupied: &[usize],
    m: usize,
) {
    let mut anchors: Vec<(f64, f64, f64)> = occupied
        .iter()
        .map(|&bin| {
            let h = freq_response[bin];
            (
                logical_index(m, bin) as f64,
                h.norm().to_f64().unwrap_or(0.0),
                h.arg().to_f64().unwrap_or(0.0),
            )
        })
        .collect();
    // anchors are in logical order; unwrap their phases
    for j in 1..anchors.len() {
        let prev = anchors[j - 1].2;
        let mut ph = anchors[j].2;
        while ph - prev > std::f64::consts::PI {
            ph -= 2.0 * std::f64::consts::PI;
        }
        while ph - prev < -std::f64::consts::PI {
            ph += 2.0 * std::f64::consts::PI;
        }
        anchors[j].2 = ph;
    }

    let occupied_set: std::collections::HashSet<usize> = occupied.iter().copied().collect();
    for bin in 0..m {
        if occupied_set.contains(&bin) {
            continue;
        }
        let logical = logical_index(m, bin) as f64;
        let pos = anchors.partition_point(|a| a.0 < logical);
        let (mag, phase) = if pos == 0 {
            (anchors[0].1, anchors[0].2)
        } else if pos == anchors.len() {
            (anchors[pos - 1].1, anchors[pos - 1].2)
        } else {
            let (x0, m0, p0) = anchors[pos - 1];
            let (x1, m1, p1) = anchors[pos];
            let f = (logical - x0) / (x1 - x0);
            (m0 + f * (m1 - m0), p0 + f * (p1 - p0))
        };
        freq_response[bin] = Complex::new(
            cast::<T>(mag * phase.cos()),
            cast::<T>(mag * phase.sin()),
        );
    }
}

/// Decision-directed channel refinement over the payload.
///
/// The preamble estimate comes from two training symbols; averaging per-bin
/// least-squares estimates over every payload symbol (known pilots plus the
/// decided data points) tightens it by roughly the square root of the packet
/// length. Per-symbol common phase, measured against the initial estimate,
/// is removed before accumulation so the refinement stays aligned with the
/// CFO correction.
pub fn refine_channel_decision_directed<T: Scalar>(
    payload: &SampleStream<T>,
    hard_grids: &[Vec<Complex<T>>],
    cfo: &CfoEstimate,
    payload_start: usize,
    initial: &ChannelEstimate<T>,
    cfg: &OfdmConfig,
) -> Result<ChannelEstimate<T>> {
    let n = hard_grids.len();
    if n == 0 {
        return Err(Error::EmptyGrids);
    }
    let k_sym = cfg.k_sym();
    if payload.len() < n * k_sym {
        return Err(Error::StreamTooShort {
            need: n * k_sym,
            got: payload.len(),
        });
    }
    let corrected = rotate_samples(
        &payload.samples[..n * k_sym],
        -cfo.omega_hat,
        -cfo.phi_hat,
        payload_start as i64,
    );
    let grids = crate::modem::received_grids(&corrected, n, cfg);
    let occupied = cfg.occupied_bins();

    let mut num = vec![Complex::new(T::zero(), T::zero()); cfg.m];
    let mut den = vec![T::zero(); cfg.m];
    for (z, x_hat) in grids.iter().zip(hard_grids) {
        // Residual common phase against the initial estimate.
        let mut acc = Complex::new(T::zero(), T::zero());
        for &bin in &occupied {
            acc += z[bin] * (initial.freq_response[bin] * x_hat[bin]).conj();
        }
        let theta = acc.arg().to_f64().unwrap_or(0.0);
        let derot = Complex::new(cast::<T>(theta.cos()), cast::<T>(-theta.sin()));
        for &bin in &occupied {
            num[bin] += z[bin] * derot * x_hat[bin].conj();
            den[bin] += x_hat[bin].norm_sqr();
        }
    }

    let mut freq_response = vec![Complex::new(T::zero(), T::zero()); cfg.m];
    for &bin in &occupied {
        freq_response[bin] = if den[bin] > T::zero() {
            num[bin] / den[bin]
        } else {
            initial.freq_response[bin]
        };
    }
    Ok(ChannelEstimate::from_occupied(
        freq_response,
        &occupied,
        cfg.m,
        cfg.l,
    ))
}

/// Refine a preamble CFO estimate with the pilot-tracked common phase error
/// of the payload symbols.
///
/// Fits a line to the unwrapped per-symbol phase against the absolute sample
/// time of each symbol's transform window; the slope corrects `omega_hat`
/// and the intercept (at sample 0) corrects `phi_hat`. Under a constant CFO
/// the residual phase is a pure ramp, so the line fit is the matched
/// estimator for it.
pub fn refine_cfo(
    cfo: &CfoEstimate,
    cpe_per_symbol: &[f64],
    payload_start: usize,
    cfg: &OfdmConfig,
) -> CfoEstimate {
    let n = cpe_per_symbol.len();
    if n < 2 {
        return *cfo;
    }
    let mut unwrapped = Vec::with_capacity(n);
    let mut prev = cpe_per_symbol[0];
    unwrapped.push(prev);
    for &raw in &cpe_per_symbol[1..] {
        let mut ph = raw;
        while ph - prev > std::f64::consts::PI {
            ph -= 2.0 * std::f64::consts::PI;
        }
        while ph - prev < -std::f64::consts::PI {
            ph += 2.0 * std::f64::consts::PI;
        }
        unwrapped.push(ph);
        prev = ph;
    }

    let k_sym = cfg.k_sym() as f64;
    // Center of each symbol's (advanced) transform window.
    let t0 = payload_start as f64 + (cfg.l - cfg.fft_advance) as f64
        + (cfg.m as f64 - 1.0) / 2.0;
    let times: Vec<f64> = (0..n).map(|p| t0 + p as f64 * k_sym).collect();

    let tm = times.iter().sum::<f64>() / n as f64;
    let um = unwrapped.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, u) in times.iter().zip(&unwrapped) {
        num += (t - tm) * (u - um);
        den += (t - tm) * (t - tm);
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    let intercept = um - slope * tm;

    CfoEstimate {
        omega_hat: cfo.omega_hat + slope,
        phi_hat: cfo.phi_hat + intercept,
    }
}

/// Detect packet starts in a recorded stream.
///
/// An autocorrelation plateau at the short-field period flags candidates;
/// each is refined by cross-correlating against the known long training
/// symbol (after coarse CFO correction) for a sample-accurate start.
pub fn detect_packet<T: Scalar>(stream: &SampleStream<T>, cfg: &OfdmConfig) -> Vec<usize> {
    let preamble: Preamble<T> = generate_preamble(cfg);
    let period = preamble.short_field.len() / SHORT_REPS;
    let window = preamble.short_field.len() - period;
    let x = &stream.samples;
    if x.len() < preamble.len() + cfg.m {
        return Vec::new();
    }

    let to64 = |c: Complex<T>| {
        Complex::new(c.re.to_f64().unwrap_or(0.0), c.im.to_f64().unwrap_or(0.0))
    };

    // Sliding lag-`period` autocorrelation over `window` samples.
    let n_pos = x.len() - window - period;
    let mut corr = Complex::new(0.0f64, 0.0);
    let mut e0 = 0.0f64;
    let mut e1 = 0.0f64;
    for u in 0..window {
        corr += to64(x[u + period]) * to64(x[u]).conj();
        e0 += to64(x[u]).norm_sqr();
        e1 += to64(x[u + period]).norm_sqr();
    }
    let rho_at = |corr: Complex<f64>, e0: f64, e1: f64| -> f64 {
        corr.norm() / (e0 * e1).sqrt().max(1e-300)
    };

    const PLATEAU: f64 = 0.75;
    const XCORR_MIN: f64 = 0.5;
    let min_run = 2 * period;

    let mut starts = Vec::new();
    let mut t = 0usize;
    let mut run_start: Option<usize> = None;
    let mut rho_peak_arg = Complex::new(0.0f64, 0.0);
    let mut rho_peak = 0.0f64;

    while t < n_pos {
        let rho = rho_at(corr, e0, e1);
        if rho > PLATEAU {
            if run_start.is_none() {
                run_start = Some(t);
                rho_peak = 0.0;
            }
            if rho > rho_peak {
                rho_peak = rho;
                rho_peak_arg = corr;
            }
        }
        let run_done = (rho <= PLATEAU || t + 1 == n_pos) && run_start.is_some();
        if run_done {
            let rs = run_start.take().unwrap();
            let run_len = t - rs;
            if run_len >= min_run {
                let coarse_omega = rho_peak_arg.arg() / period as f64;
                if let Some(start) =
                    refine_start(x, rs, coarse_omega, &preamble, cfg, XCORR_MIN)
                {
                    starts.push(start);
                    // Skip past this packet before searching again.
                    let skip_to = start + preamble.len();
                    if skip_to > t {
                        let mut adv = t;
                        while adv < skip_to.min(n_pos.saturating_sub(1)) {
                            corr -= to64(x[adv + period]) * to64(x[adv]).conj();
                            corr += to64(x[adv + window + period]) * to64(x[adv + window]).conj();
                            e0 += to64(x[adv + window]).norm_sqr() - to64(x[adv]).norm_sqr();
                            e1 += to64(x[adv + window + period]).norm_sqr()
                                - to64(x[adv + period]).norm_sqr();
                            adv += 1;
                        }
                        t = adv;
                        continue;
                    }
                }
            }
        }
        if t + 1 < n_pos {
            corr -= to64(x[t + period]) * to64(x[t]).conj();
            corr += to64(x[t + window + period]) * to64(x[t + window]).conj();
            e0 += to64(x[t + window]).norm_sqr() - to64(x[t]).norm_sqr();
            e1 += to64(x[t + window + period]).norm_sqr() - to64(x[t + period]).norm_sqr();
        }
        t += 1;
    }
    starts
}

/// Cross-correlate the coarse-corrected stream against the known long
/// training symbol around a plateau; returns the packet start if both long
/// repeats line up.
fn refine_start<T: Scalar>(
    x: &[Complex<T>],
    plateau_start: usize,
    coarse_omega: f64,
    preamble: &Preamble<T>,
    cfg: &OfdmConfig,
    xcorr_min: f64,
) -> Option<usize> {
    let m = cfg.m;
    let lt_off = preamble.first_long_symbol_offset();
    let clean = preamble.long_training_time();
    let clean_energy: f64 = clean
        .iter()
        .map(|c| c.norm_sqr().to_f64().unwrap_or(0.0))
        .sum();

    // The plateau begins near the short-field start; search a window around
    // the expected long-field position.
    let lo = plateau_start.saturating_sub(2 * m);
    let hi = (plateau_start + lt_off + 2 * m).min(x.len().saturating_sub(2 * m));
    if lo >= hi {
        return None;
    }

    let mut best = (0usize, 0.0f64);
    for t in lo..hi {
        let mut acc = Complex::new(0.0f64, 0.0);
        let mut energy = 0.0f64;
        for u in 0..m {
            let s = x[t + u];
            let s64 = Complex::new(s.re.to_f64().unwrap_or(0.0), s.im.to_f64().unwrap_or(0.0));
            let ph = -coarse_omega * (t + u) as f64;
            let rot = s64 * Complex::new(ph.cos(), ph.sin());
            let c = clean[u];
            let c64 = Complex::new(c.re.to_f64().unwrap_or(0.0), c.im.to_f64().unwrap_or(0.0));
            acc += rot * c64.conj();
            energy += s64.norm_sqr();
        }
        let norm = (energy * clean_energy).sqrt().max(1e-300);
        let metric = acc.norm() / norm;
        if metric > best.1 {
            best = (t, metric);
        }
    }
    let (t1, metric) = best;
    if metric < xcorr_min || t1 < lt_off {
        return None;
    }
    Some(t1 - lt_off)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impair::{add_awgn, apply_cfo, apply_channel, CfoModel, ChannelModel};
    use crate::modem::Constellation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn wifi() -> OfdmConfig {
        OfdmConfig::wifi_80211g(Constellation::Qam64)
    }

    fn clean_preamble_stream(cfg: &OfdmConfig) -> SampleStream<f64> {
        let p: Preamble<f64> = generate_preamble(cfg);
        SampleStream::from_samples(p.samples(), cfg.sample_rate_hz)
    }

    #[test]
    fn zero_cfo_estimates_as_zero() {
        let cfg = wifi();
        let rx = clean_preamble_stream(&cfg);
        let est = estimate_cfo(&rx, &cfg).unwrap();
        assert!(est.omega_hat.abs() < 1e-9, "omega {:.3e}", est.omega_hat);
        assert!(est.phi_hat.abs() < 1e-9);
    }

    #[test]
    fn injected_cfo_is_recovered_noiseless() {
        let cfg = wifi();
        let omega = 2.0 * std::f64::consts::PI * 0.001;
        let rx = apply_cfo(
            &clean_preamble_stream(&cfg),
            &CfoModel { omega, phi: 0.8 },
            0,
        );
        let est = estimate_cfo(&rx, &cfg).unwrap();
        assert!(
            (est.omega_hat - omega).abs() < 1e-7,
            "omega error {:.3e}",
            est.omega_hat - omega
        );
        assert!((est.phi_hat - 0.8).abs() < 1e-6);
    }

    #[test]
    fn cfo_rms_error_at_20db() {
        let cfg = wifi();
        let omega = 2.0 * std::f64::consts::PI * 3e-4;
        let clean = apply_cfo(
            &clean_preamble_stream(&cfg),
            &CfoModel { omega, phi: 0.1 },
            0,
        );
        let mut sq = 0.0;
        let trials = 200;
        for seed in 0..trials {
            let rx = add_awgn(&clean, 20.0, seed).unwrap();
            let est = estimate_cfo(&rx, &cfg).unwrap();
            sq += (est.omega_hat - omega).powi(2);
        }
        let rms = (sq / trials as f64).sqrt();
        assert!(
            rms < 2.0 * std::f64::consts::PI * 1e-4,
            "rms omega error {rms:.3e}"
        );
    }

    #[test]
    fn cfo_estimator_is_unbiased_at_high_snr() {
        let cfg = wifi();
        let mut sum_err = 0.0;
        for k in 0..1000 {
            let phi = 2.0 * std::f64::consts::PI * (k as f64 / 1000.0) - std::f64::consts::PI;
            let rx = apply_cfo(&clean_preamble_stream(&cfg), &CfoModel { omega: 0.0, phi }, 0);
            let est = estimate_cfo(&rx, &cfg).unwrap();
            sum_err += est.omega_hat;
        }
        assert!((sum_err / 1000.0).abs() < 1e-9);
    }

    #[test]
    fn too_short_stream_errors() {
        let cfg = wifi();
        let rx = SampleStream::from_samples(vec![Complex::new(1.0, 0.0); 100], 20e6);
        assert!(matches!(
            estimate_cfo(&rx, &cfg),
            Err(Error::StreamTooShort { .. })
        ));
    }

    #[test]
    fn flat_channel_estimates_as_unity() {
        let cfg = wifi();
        let rx = clean_preamble_stream(&cfg);
        let cfo = estimate_cfo(&rx, &cfg).unwrap();
        let est = estimate_channel(&rx, &cfo, &cfg).unwrap();
        for &bin in &cfg.occupied_bins() {
            assert!(
                (est.freq_response[bin] - Complex::new(1.0, 0.0)).norm() < 1e-9,
                "bin {bin}: {:?}",
                est.freq_response[bin]
            );
        }
    }

    #[test]
    fn two_tap_channel_matches_transform_of_taps() {
        let cfg = wifi();
        let taps = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.5)];
        let rx = apply_channel(
            &clean_preamble_stream(&cfg),
            &ChannelModel::new(taps.clone()).unwrap(),
        )
        .unwrap();
        let est = estimate_channel(&rx, &CfoEstimate { omega_hat: 0.0, phi_hat: 0.0 }, &cfg)
            .unwrap();
        let oracle = ChannelEstimate::from_taps(&taps, cfg.m, cfg.l);
        for &bin in &cfg.occupied_bins() {
            assert!(
                (est.freq_response[bin] - oracle.freq_response[bin]).norm() < 1e-9,
                "bin {bin}"
            );
        }
        // Tap fit over the occupied bins recovers the true taps exactly.
        assert!((est.time_taps[0] - taps[0]).norm() < 1e-9);
        assert!((est.time_taps[1] - taps[1]).norm() < 1e-9);
        for t in &est.time_taps[2..] {
            assert!(t.norm() < 1e-9);
        }
    }

    #[test]
    fn channel_error_small_at_30db() {
        let cfg = wifi();
        let taps = vec![
            Complex::new(0.9, 0.1),
            Complex::new(0.0, 0.3),
            Complex::new(-0.2, 0.0),
        ];
        let clean = apply_channel(
            &clean_preamble_stream(&cfg),
            &ChannelModel::new(taps.clone()).unwrap(),
        )
        .unwrap();
        let oracle = ChannelEstimate::from_taps(&taps, cfg.m, cfg.l);
        let mut acc = 0.0;
        let mut count = 0usize;
        for seed in 0..100 {
            let rx = add_awgn(&clean, 30.0, 1000 + seed).unwrap();
            let est = estimate_channel(
                &rx,
                &CfoEstimate { omega_hat: 0.0, phi_hat: 0.0 },
                &cfg,
            )
            .unwrap();
            for &bin in &cfg.occupied_bins() {
                let rel = (est.freq_response[bin] - oracle.freq_response[bin]).norm()
                    / oracle.freq_response[bin].norm();
                acc += rel * rel;
                count += 1;
            }
        }
        let rms = (acc / count as f64).sqrt();
        assert!(rms <= 0.05, "per-bin relative RMS {rms:.4}");
    }

    #[test]
    fn channel_estimate_scales_with_gain() {
        let cfg = wifi();
        let taps = vec![Complex::new(0.8, 0.0), Complex::new(0.1, -0.3)];
        let a = Complex::new(0.3, 1.2);
        let scaled: Vec<Complex<f64>> = taps.iter().map(|t| t * a).collect();
        let cfo = CfoEstimate { omega_hat: 0.0, phi_hat: 0.0 };

        let rx1 = apply_channel(
            &clean_preamble_stream(&cfg),
            &ChannelModel::new(taps).unwrap(),
        )
        .unwrap();
        let rx2 = apply_channel(
            &clean_preamble_stream(&cfg),
            &ChannelModel::new(scaled).unwrap(),
        )
        .unwrap();
        let h1 = estimate_channel(&rx1, &cfo, &cfg).unwrap();
        let h2 = estimate_channel(&rx2, &cfo, &cfg).unwrap();
        for bin in 0..cfg.m {
            let expect = h1.freq_response[bin] * a;
            let got = h2.freq_response[bin];
            assert!(
                (got - expect).norm() <= 1e-9 * expect.norm().max(1e-9),
                "bin {bin}"
            );
        }
    }

    #[test]
    fn interpolated_nulls_lie_between_anchors() {
        let cfg = wifi();
        let taps = vec![Complex::new(0.7, 0.2), Complex::new(0.3, -0.4)];
        let rx = apply_channel(
            &clean_preamble_stream(&cfg),
            &ChannelModel::new(taps).unwrap(),
        )
        .unwrap();
        let est = estimate_channel(&rx, &CfoEstimate { omega_hat: 0.0, phi_hat: 0.0 }, &cfg)
            .unwrap();

        // DC interpolates halfway between logical -1 and +1 in magnitude
        // and unwrapped phase.
        let h_m1 = est.freq_response[63];
        let h_p1 = est.freq_response[1];
        let dc = est.freq_response[0];
        let mag_expect = (h_m1.norm() + h_p1.norm()) / 2.0;
        assert!((dc.norm() - mag_expect).abs() < 1e-9);
        let p0 = h_m1.arg();
        let mut p1 = h_p1.arg();
        while p1 - p0 > std::f64::consts::PI {
            p1 -= 2.0 * std::f64::consts::PI;
        }
        while p1 - p0 < -std::f64::consts::PI {
            p1 += 2.0 * std::f64::consts::PI;
        }
        let ph_expect = (p0 + p1) / 2.0;
        let mut got = dc.arg();
        while got - ph_expect > std::f64::consts::PI {
            got -= 2.0 * std::f64::consts::PI;
        }
        while got - ph_expect < -std::f64::consts::PI {
            got += 2.0 * std::f64::consts::PI;
        }
        assert!((got - ph_expect).abs() < 1e-9);

        // band edges hold the outermost anchor
        let edge = est.freq_response[32]; // logical -32
        let anchor = est.freq_response[64 - 26]; // logical -26
        assert!((edge - anchor).norm() < 1e-12);
    }

    #[test]
    fn cfo_error_propagates_into_channel_estimate() {
        let cfg = wifi();
        let taps = vec![Complex::new(0.9, 0.0), Complex::new(0.0, 0.4)];
        let rx = apply_channel(
            &clean_preamble_stream(&cfg),
            &ChannelModel::new(taps.clone()).unwrap(),
        )
        .unwrap();
        let oracle = ChannelEstimate::from_taps(&taps, cfg.m, cfg.l);
        let mut errs = Vec::new();
        for delta in [0.0, 1e-4, 1e-3] {
            let est = estimate_channel(
                &rx,
                &CfoEstimate { omega_hat: delta, phi_hat: 0.0 },
                &cfg,
            )
            .unwrap();
            let mut acc = 0.0;
            for &bin in &cfg.occupied_bins() {
                acc += (est.freq_response[bin] - oracle.freq_response[bin]).norm_sqr();
            }
            errs.push(acc.sqrt());
        }
        assert!(errs[0] < errs[1] && errs[1] < errs[2], "errors {errs:?}");
    }

    #[test]
    fn refine_cfo_recovers_residual_ramp() {
        let cfg = wifi();
        let base = CfoEstimate { omega_hat: 1e-3, phi_hat: 0.2 };
        let delta_omega = 3e-5;
        let delta_phi = -0.05;
        let payload_start = 320usize;
        // Synthesize the per-symbol phase the pilots would measure for a
        // residual ramp delta_omega * t + delta_phi.
        let n = 40;
        let cpe: Vec<f64> = (0..n)
            .map(|p| {
                let t = payload_start as f64
                    + p as f64 * cfg.k_sym() as f64
                    + (cfg.l - cfg.fft_advance) as f64
                    + (cfg.m as f64 - 1.0) / 2.0;
                delta_omega * t + delta_phi
            })
            .collect();
        let refined = refine_cfo(&base, &cpe, payload_start, &cfg);
        assert!((refined.omega_hat - (base.omega_hat + delta_omega)).abs() < 1e-12);
        assert!((refined.phi_hat - (base.phi_hat + delta_phi)).abs() < 1e-9);
    }

    #[test]
    fn decision_directed_refinement_tightens_the_estimate() {
        use crate::modem::{demodulate, modulate, serialize};
        let cfg = wifi();
        let taps = vec![
            Complex::new(0.85, 0.1),
            Complex::new(0.1, -0.3),
            Complex::new(-0.15, 0.05),
        ];
        let ch = ChannelModel::new(taps.clone()).unwrap();
        let oracle = ChannelEstimate::from_taps(&taps, cfg.m, cfg.l);
        let cfo = CfoEstimate { omega_hat: 0.0, phi_hat: 0.0 };

        let mut rng = ChaCha8Rng::seed_from_u64(321);
        let bits: Vec<bool> = (0..60 * cfg.bits_per_ofdm_symbol()).map(|_| rng.gen()).collect();
        let pkt = modulate::<f64>(&bits, &cfg).unwrap();
        let preamble: Preamble<f64> = generate_preamble(&cfg);
        let mut tx = preamble.samples();
        tx.extend_from_slice(&serialize(&pkt, &cfg).samples);
        let rx = crate::impair::add_awgn(
            &apply_channel(
                &SampleStream::from_samples(tx, cfg.sample_rate_hz),
                &ch,
            )
            .unwrap(),
            25.0,
            77,
        )
        .unwrap();

        let pre_len = preamble.len();
        let initial = estimate_channel(&rx, &cfo, &cfg).unwrap();
        let payload = rx.slice(pre_len..pre_len + 60 * cfg.k_sym());
        let demod = demodulate(&payload, &initial, &cfo, pre_len, 60, &cfg).unwrap();
        let refined = refine_channel_decision_directed(
            &payload,
            &demod.hard_grids,
            &cfo,
            pre_len,
            &initial,
            &cfg,
        )
        .unwrap();

        let err = |est: &ChannelEstimate<f64>| -> f64 {
            cfg.occupied_bins()
                .iter()
                .map(|&b| (est.freq_response[b] - oracle.freq_response[b]).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let before = err(&initial);
        let after = err(&refined);
        assert!(
            after < before / 2.0,
            "refinement: {before:.4} -> {after:.4}"
        );
    }

    fn embed_preamble(offset: usize, total: usize, cfg: &OfdmConfig, seed: u64) -> SampleStream<f64> {
        let p: Preamble<f64> = generate_preamble(cfg);
        let mut samples = vec![Complex::new(0.0, 0.0); total];
        for (k, s) in p.samples().iter().enumerate() {
            samples[offset + k] = *s;
        }
        // fill with noise ~26 dB below the preamble
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in samples.iter_mut() {
            let re: f64 = rng.gen::<f64>() - 0.5;
            let im: f64 = rng.gen::<f64>() - 0.5;
            *s += Complex::new(re * 0.1, im * 0.1);
        }
        SampleStream::from_samples(samples, cfg.sample_rate_hz)
    }

    #[test]
    fn packet_at_offset_1000_is_found_exactly() {
        let cfg = wifi();
        let rx = embed_preamble(1000, 3000, &cfg, 5);
        let starts = detect_packet(&rx, &cfg);
        assert_eq!(starts, vec![1000]);
    }

    #[test]
    fn pure_noise_yields_no_detections() {
        let cfg = wifi();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let samples: Vec<Complex<f64>> = (0..20_000)
            .map(|_| Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let rx = SampleStream::from_samples(samples, cfg.sample_rate_hz);
        assert!(detect_packet(&rx, &cfg).is_empty());
    }

    #[test]
    fn two_packets_are_both_found() {
        let cfg = wifi();
        let p: Preamble<f64> = generate_preamble(&cfg);
        let mut samples = vec![Complex::new(0.0, 0.0); 6000];
        for (k, s) in p.samples().iter().enumerate() {
            samples[500 + k] = *s;
            samples[3500 + k] = *s;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for s in samples.iter_mut() {
            *s += Complex::new((rng.gen::<f64>() - 0.5) * 0.05, (rng.gen::<f64>() - 0.5) * 0.05);
        }
        let rx = SampleStream::from_samples(samples, cfg.sample_rate_hz);
        let starts = detect_packet(&rx, &cfg);
        assert_eq!(starts, vec![500, 3500]);
    }
}
