//! Mel filterbank and Mel frequency cepstral coefficients.
//!
//! Per frame, the filterbank energies are `E_i = sum_nu g[i][nu] |X[nu]|^2`
//! over the one-sided power spectrum, and the cepstrum is the one-based DCT
//! of `ln E_i`. The segment vector is the mean (or median) of the frame
//! cepstra.

use serde::{Deserialize, Serialize};

use super::{Aggregation, FrameTiming, LOG_FLOOR};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::signal::{DctTable, Signal, StftConfig, StftPlan};

pub fn hz_to_mel<T: Real>(f: T) -> T {
    T::of(2595.0) * (T::one() + f / T::of(700.0)).log10()
}

pub fn mel_to_hz<T: Real>(mel: T) -> T {
    T::of(700.0) * (T::of(10.0).powf(mel / T::of(2595.0)) - T::one())
}

/// Triangular filters equally spaced on the Mel scale between 0 Hz and
/// Nyquist, each with unit peak at its centre frequency.
#[derive(Debug, Clone)]
pub struct MelFilterbank<T> {
    n_filters: usize,
    dft_length: usize,
    sample_rate_hz: T,
    /// `n_filters + 2` band edges; filter `i` spans `edges[i]..edges[i+2]`.
    edges_hz: Vec<T>,
    /// `weights[i][nu]` for one-sided bins `nu = 0..=dft_length/2`.
    weights: Vec<Vec<T>>,
    /// Half-open range of bins with non-zero weight, per filter.
    support: Vec<(usize, usize)>,
}

impl<T: Real> MelFilterbank<T> {
    pub fn new(n_filters: usize, dft_length: usize, sample_rate_hz: T) -> Result<Self> {
        if n_filters < 2 || n_filters > dft_length / 2 {
            return invalid(format!(
                "filter count {n_filters} must lie in 2..={}",
                dft_length / 2
            ));
        }
        if !(sample_rate_hz > T::zero()) {
            return invalid("sample rate must be positive");
        }
        let top = hz_to_mel(sample_rate_hz / T::of(2.0));
        let steps = T::of_usize(n_filters + 1);
        let edges_hz: Vec<T> = (0..n_filters + 2)
            .map(|i| mel_to_hz(top * T::of_usize(i) / steps))
            .collect();
        let spacing = sample_rate_hz / T::of_usize(dft_length);
        let n_bins = dft_length / 2 + 1;
        let mut bank = Self {
            n_filters,
            dft_length,
            sample_rate_hz,
            edges_hz,
            weights: Vec::with_capacity(n_filters),
            support: Vec::with_capacity(n_filters),
        };
        for i in 0..n_filters {
            let row: Vec<T> = (0..n_bins)
                .map(|nu| bank.triangle(i, T::of_usize(nu) * spacing))
                .collect();
            if row.iter().all(|&w| w == T::zero()) {
                return invalid(format!(
                    "filter {i} covers no DFT bin; use fewer filters or a longer DFT"
                ));
            }
            let first = row.iter().position(|&w| w != T::zero()).unwrap_or(0);
            let last = row.iter().rposition(|&w| w != T::zero()).unwrap_or(0);
            bank.support.push((first, last + 1));
            bank.weights.push(row);
        }
        Ok(bank)
    }

    /// Response of filter `i` at frequency `f_hz`.
    pub fn triangle(&self, i: usize, f_hz: T) -> T {
        let (lo, mid, hi) = (self.edges_hz[i], self.edges_hz[i + 1], self.edges_hz[i + 2]);
        if f_hz <= lo || f_hz >= hi {
            T::zero()
        } else if f_hz <= mid {
            (f_hz - lo) / (mid - lo)
        } else {
            (hi - f_hz) / (hi - mid)
        }
    }

    pub fn n_filters(&self) -> usize {
        self.n_filters
    }

    pub fn dft_length(&self) -> usize {
        self.dft_length
    }

    pub fn sample_rate_hz(&self) -> T {
        self.sample_rate_hz
    }

    pub fn edges_hz(&self) -> &[T] {
        &self.edges_hz
    }

    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn centers_hz(&self) -> Vec<T> {
        self.edges_hz[1..=self.n_filters].to_vec()
    }

    /// Full width (upper minus lower edge) of every filter.
    pub fn bandwidths_hz(&self) -> Vec<T> {
        self.edges_hz.windows(3).map(|w| w[2] - w[0]).collect()
    }

    /// Filter energies of one one-sided power spectrum.
    pub fn energies(&self, power: &[T]) -> Result<Vec<T>> {
        if power.len() != self.dft_length / 2 + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dft_length / 2 + 1,
                got: power.len(),
            });
        }
        Ok((0..self.n_filters).map(|i| self.energy(i, power)).collect())
    }

    /// Energy of filter `i`; bins outside its support contribute nothing.
    pub(crate) fn energy(&self, i: usize, power: &[T]) -> T {
        let (a, b) = self.support[i];
        self.weights[i][a..b]
            .iter()
            .zip(&power[a..b])
            .map(|(&g, &p)| g * p)
            .sum()
    }
}

/// Cepstral coefficients `c[1..=n_kept]` from filterbank energies.
pub fn cepstrum_from_energies<T: Real>(energies: &[T], n_kept: usize) -> Result<Vec<T>> {
    let table = DctTable::new(energies.len())?;
    let logs: Vec<T> = energies.iter().map(|&e| floored_ln(e)).collect();
    table.apply(&logs, n_kept)
}

pub(crate) fn floored_ln<T: Real>(e: T) -> T {
    e.max(T::of(LOG_FLOOR)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfccConfig {
    pub frame: StftConfig,
    pub n_kept: usize,
    pub aggregation: Aggregation,
}

/// Serializable MFCC parameters; frame lengths are given in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfccSettings {
    pub n_filters: usize,
    pub n_kept: usize,
    pub framing: FrameTiming,
    pub aggregation: Aggregation,
}

impl Default for MfccSettings {
    fn default() -> Self {
        Self {
            n_filters: 26,
            n_kept: 13,
            framing: FrameTiming::default(),
            aggregation: Aggregation::Mean,
        }
    }
}

impl MfccSettings {
    pub fn resolve<T: Real>(&self, sample_rate_hz: f64) -> Result<(MelFilterbank<T>, MfccConfig)> {
        let frame = self.framing.resolve(sample_rate_hz)?;
        let bank = MelFilterbank::new(self.n_filters, frame.dft_length, T::of(sample_rate_hz))?;
        Ok((
            bank,
            MfccConfig {
                frame,
                n_kept: self.n_kept,
                aggregation: self.aggregation,
            },
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfccVector<T> {
    /// `c[1..=n_kept]`.
    pub coefficients: Vec<T>,
}

impl<T: Real> MfccVector<T> {
    pub fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("mfcc_{i}")).collect()
    }
}

fn check_config<T: Real>(bank: &MelFilterbank<T>, cfg: &MfccConfig) -> Result<()> {
    if cfg.n_kept < 1 || cfg.n_kept > bank.n_filters {
        return invalid(format!(
            "number of kept coefficients {} must lie in 1..={}",
            cfg.n_kept, bank.n_filters
        ));
    }
    if cfg.frame.dft_length != bank.dft_length {
        return invalid(format!(
            "filterbank built for a {}-point DFT but frames use {}",
            bank.dft_length, cfg.frame.dft_length
        ));
    }
    Ok(())
}

/// Cepstra of every frame of the segment.
pub fn frame_cepstra<T: Real>(
    segment: &Signal<T>,
    bank: &MelFilterbank<T>,
    cfg: &MfccConfig,
) -> Result<Vec<Vec<T>>> {
    check_config(bank, cfg)?;
    let plan = StftPlan::new(cfg.frame)?;
    let table = DctTable::new(bank.n_filters)?;
    let half = bank.dft_length / 2 + 1;
    let mut out = Vec::with_capacity(cfg.frame.frame_count(segment.len()));
    let mut power = vec![T::zero(); half];
    let mut first_err = None;
    plan.for_each_frame(segment.samples(), |_, bins| {
        for (p, c) in power.iter_mut().zip(&bins[..half]) {
            *p = c.norm_sqr();
        }
        let logs: Vec<T> = (0..bank.n_filters)
            .map(|i| floored_ln(bank.energy(i, &power)))
            .collect();
        match table.apply(&logs, cfg.n_kept) {
            Ok(c) => out.push(c),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    })?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Segment-level MFCC vector.
pub fn mfcc<T: Real>(
    segment: &Signal<T>,
    bank: &MelFilterbank<T>,
    cfg: &MfccConfig,
) -> Result<MfccVector<T>> {
    let frames = frame_cepstra(segment, bank, cfg)?;
    Ok(MfccVector {
        coefficients: cfg.aggregation.reduce(&frames),
    })
}
