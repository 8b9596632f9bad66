//! Transmit window model and windowed overlap-add.
//!
//! A window has support `-2L <= i <= M+L-1`: a rising transition through the
//! (possibly extended) cyclic prefix, a flat run, and a falling transition
//! through the end of the symbol and its cyclic suffix. The trailing
//! transition coefficients are `alpha` (indexed by `i - M + L`) and the
//! leading ones are `beta` (indexed by `-1 - i`, reversing sample order).
//! Designed windows keep the flat region pinned at 1; estimated windows are
//! free over the whole support.

use crate::error::{Error, Result};
use crate::modem::{OfdmConfig, OfdmPacket};
use crate::scalar::{cast, Scalar};
use crate::stream::SampleStream;
use num_complex::Complex;

/// How symbol indices outside `0..N` are treated by the overlap-add.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolWrap {
    /// Adjacent-symbol indices wrap modulo `N` (the literal model).
    Circular,
    /// Contributions referencing symbols outside the packet are dropped;
    /// recorded packets do not wrap.
    ZeroEdges,
}

/// Transmit window coefficients over the full support.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFunction<T: Scalar> {
    /// Coefficient for index `i` lives at `coeffs[i + 2*l]`; length `m + 3*l`.
    coeffs: Vec<T>,
    m: usize,
    l: usize,
}

impl<T: Scalar> WindowFunction<T> {
    /// Lowest support index, `-2L`.
    pub fn support_min(&self) -> isize {
        -2 * self.l as isize
    }

    /// Highest support index, `M + L - 1`.
    pub fn support_max(&self) -> isize {
        (self.m + self.l) as isize - 1
    }

    pub fn support_len(&self) -> usize {
        self.m + 3 * self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Window value at any index; zero outside the support.
    #[inline]
    pub fn coefficient(&self, i: isize) -> T {
        if i < self.support_min() || i > self.support_max() {
            T::zero()
        } else {
            self.coeffs[(i + 2 * self.l as isize) as usize]
        }
    }

    /// All support coefficients in index order (`i = -2L .. M+L-1`).
    pub fn support_values(&self) -> &[T] {
        &self.coeffs
    }

    /// Trailing transition `alpha[j] = w[M - L + j]`, length `2L`.
    pub fn alpha(&self) -> &[T] {
        &self.coeffs[self.m + self.l..]
    }

    /// Leading transition `beta[j] = w[-1 - j]`, length `2L`.
    pub fn beta(&self) -> Vec<T> {
        self.coeffs[..2 * self.l].iter().rev().copied().collect()
    }

    /// Build from a full support vector (not clamped; used for estimates).
    pub fn from_support(coeffs: Vec<T>, m: usize, l: usize) -> Result<Self> {
        if coeffs.len() != m + 3 * l {
            return Err(Error::LengthMismatch {
                left: coeffs.len(),
                right: m + 3 * l,
            });
        }
        Ok(Self { coeffs, m, l })
    }

    /// Build from transition vectors; the flat region is pinned at 1 and the
    /// transitions are clamped to `[0, 1]` (designed-window construction).
    pub fn from_alpha_beta(alpha: &[T], beta: &[T], cfg: &OfdmConfig) -> Result<Self> {
        let (m, l) = (cfg.m, cfg.l);
        if alpha.len() != 2 * l || beta.len() != 2 * l {
            return Err(Error::LengthMismatch {
                left: alpha.len().max(beta.len()),
                right: 2 * l,
            });
        }
        let clamp = |v: T| v.max(T::zero()).min(T::one());
        let mut coeffs = vec![T::zero(); m + 3 * l];
        for j in 0..2 * l {
            // beta[j] sits at i = -1 - j
            coeffs[2 * l - 1 - j] = clamp(beta[j]);
        }
        for i in 0..(m - l) {
            coeffs[2 * l + i] = T::one();
        }
        for j in 0..2 * l {
            coeffs[m + l + j] = clamp(alpha[j]);
        }
        Ok(Self { coeffs, m, l })
    }

    /// The no-window case: 1 on `-L <= i <= M-1`, 0 elsewhere.
    pub fn rectangular(cfg: &OfdmConfig) -> Self {
        let (m, l) = (cfg.m, cfg.l);
        let mut coeffs = vec![T::zero(); m + 3 * l];
        for i in -(l as isize)..m as isize {
            coeffs[(i + 2 * l as isize) as usize] = T::one();
        }
        Self { coeffs, m, l }
    }

    /// Raised-cosine window in the 802.11-recommendation style: each
    /// transition spans the symbol boundary equally (half extends the
    /// prefix, half forms the cyclic suffix).
    pub fn raised_cosine(transition_time_s: f64, cfg: &OfdmConfig) -> Result<Self> {
        let (m, l) = (cfg.m as isize, cfg.l as isize);
        let t = (transition_time_s * cfg.sample_rate_hz).round() as isize;
        if t < 1 || t > 2 * l {
            return Err(Error::TransitionOutOfRange {
                got: t,
                max: 2 * cfg.l,
            });
        }
        let rise: Vec<f64> = (0..t)
            .map(|n| {
                let x = std::f64::consts::PI * (n as f64 + 0.5) / (2.0 * t as f64);
                x.sin().powi(2)
            })
            .collect();

        let rise_start = -l - t / 2; // covers rise_start .. rise_start + t - 1
        let fall_start = m - t / 2;
        let mut coeffs = vec![T::zero(); (m + 3 * l) as usize];
        for i in -2 * l..=(m + l - 1) {
            let v = if i < rise_start {
                0.0
            } else if i < rise_start + t {
                rise[(i - rise_start) as usize]
            } else if i < fall_start {
                1.0
            } else if i < fall_start + t {
                rise[(t - 1 - (i - fall_start)) as usize]
            } else {
                0.0
            };
            coeffs[(i + 2 * l) as usize] = cast(v.clamp(0.0, 1.0));
        }
        Ok(Self {
            coeffs,
            m: cfg.m,
            l: cfg.l,
        })
    }

    fn check_numerology(&self, other: &Self) -> Result<()> {
        if self.m != other.m || self.l != other.l {
            return Err(Error::NumerologyMismatch {
                want_m: self.m,
                want_l: self.l,
                got_m: other.m,
                got_l: other.l,
            });
        }
        Ok(())
    }

    /// CSV form: one `index,coefficient` line per support index.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,coefficient\n");
        for i in self.support_min()..=self.support_max() {
            out.push_str(&format!("{},{:.12e}\n", i, self.coefficient(i)));
        }
        out
    }

    /// Parse the CSV form produced by [`to_csv`]; numerology is recovered
    /// from the index range.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut pairs: Vec<(isize, f64)> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("index") || line.starts_with('#') {
                continue;
            }
            let (idx, val) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("bad window row `{line}`")))?;
            let i: isize = idx
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad window index `{idx}`")))?;
            let v: f64 = val
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad window value `{val}`")))?;
            pairs.push((i, v));
        }
        if pairs.is_empty() {
            return Err(Error::Format("empty window file".into()));
        }
        pairs.sort_by_key(|&(i, _)| i);
        let min = pairs[0].0;
        let max = pairs[pairs.len() - 1].0;
        if min >= 0 || (-min) % 2 != 0 {
            return Err(Error::Format(format!("window support starts at {min}")));
        }
        let l = ((-min) / 2) as usize;
        let m = (max + 1 - l as isize) as usize;
        if pairs.len() != m + 3 * l {
            return Err(Error::Format(format!(
                "window support has {} rows, expected {}",
                pairs.len(),
                m + 3 * l
            )));
        }
        Ok(Self {
            coeffs: pairs.into_iter().map(|(_, v)| cast(v)).collect(),
            m,
            l,
        })
    }
}

/// RMS of `est - truth` over the full window support.
pub fn window_rms_error<T: Scalar>(
    est: &WindowFunction<T>,
    truth: &WindowFunction<T>,
) -> Result<T> {
    est.check_numerology(truth)?;
    let sum: T = est
        .support_values()
        .iter()
        .zip(truth.support_values())
        .map(|(a, b)| (*a - *b) * (*a - *b))
        .sum();
    Ok((sum / cast::<T>(est.support_len() as f64)).sqrt())
}

/// One overlap-add contribution: window coefficient `coeffs[widx]` times
/// core sample `sample` of symbol `sym`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OverlapTerm {
    pub widx: usize,
    pub sym: usize,
    pub sample: usize,
}

/// The up-to-three `(q = -1, 0, 1)` terms forming the combined output at
/// symbol-relative index `k` of symbol `p`.
pub(crate) fn overlap_terms(
    k: isize,
    p: usize,
    n: usize,
    m: usize,
    l: usize,
    wrap: SymbolWrap,
    out: &mut Vec<OverlapTerm>,
) {
    out.clear();
    let k_sym = (m + l) as isize;
    for q in -1isize..=1 {
        let i = k - q * k_sym;
        if i < -2 * (l as isize) || i > (m + l) as isize - 1 {
            continue;
        }
        let sym = p as isize + q;
        let sym = match wrap {
            SymbolWrap::Circular => sym.rem_euclid(n as isize) as usize,
            SymbolWrap::ZeroEdges => {
                if sym < 0 || sym >= n as isize {
                    continue;
                }
                sym as usize
            }
        };
        out.push(OverlapTerm {
            widx: (i + 2 * l as isize) as usize,
            sym,
            sample: i.rem_euclid(m as isize) as usize,
        });
    }
}

/// Windowed overlap-add over time-domain symbol cores; output length `N * K`.
pub(crate) fn overlap_add<T: Scalar>(
    cores: &[Vec<Complex<T>>],
    w: &WindowFunction<T>,
    wrap: SymbolWrap,
) -> Vec<Complex<T>> {
    let n = cores.len();
    let (m, l) = (w.m, w.l);
    let k_sym = m + l;
    let coeffs = w.support_values();
    let mut out = Vec::with_capacity(n * k_sym);
    let mut terms = Vec::with_capacity(3);
    for p in 0..n {
        for kk in 0..k_sym {
            let k = kk as isize - l as isize;
            overlap_terms(k, p, n, m, l, wrap, &mut terms);
            let mut acc = Complex::new(T::zero(), T::zero());
            for t in &terms {
                acc += cores[t.sym][t.sample] * coeffs[t.widx];
            }
            out.push(acc);
        }
    }
    out
}

/// Apply the transmit window to a packet: for every output sample, the three
/// windowed contributions from the previous, current, and next symbols are
/// summed, with adjacent-symbol indices handled per `wrap`.
pub fn apply_window<T: Scalar>(
    pkt: &OfdmPacket<T>,
    w: &WindowFunction<T>,
    cfg: &OfdmConfig,
    wrap: SymbolWrap,
) -> Result<SampleStream<T>> {
    if pkt.n_symbols() == 0 {
        return Err(Error::EmptyGrids);
    }
    if pkt.m() != w.m || cfg.m != w.m || cfg.l != w.l {
        return Err(Error::NumerologyMismatch {
            want_m: w.m,
            want_l: w.l,
            got_m: cfg.m,
            got_l: cfg.l,
        });
    }
    let cores: Vec<Vec<Complex<T>>> = (0..pkt.n_symbols())
        .map(|p| pkt.core(p).to_vec())
        .collect();
    Ok(SampleStream::from_samples(
        overlap_add(&cores, w, wrap),
        cfg.sample_rate_hz,
    ))
}
