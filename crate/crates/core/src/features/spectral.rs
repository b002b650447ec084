//! Spectral descriptors of a magnitude spectrum (feature set "SD").
//!
//! All sums run over the full bin range `mu1 = 0 .. mu2 = K-1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::signal::{dft, Signal, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMode {
    /// Magnitudes normalised to sum one before `-sum p log p`; gain invariant.
    #[default]
    Normalized,
    /// `-sum |X| log |X|` on the raw magnitudes.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    /// Roll-off energy fraction.
    pub kappa: f64,
    pub entropy: EntropyMode,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            kappa: 0.95,
            entropy: EntropyMode::Normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFeatures<T> {
    pub centroid_hz: T,
    pub spread_hz: T,
    pub kurtosis: T,
    pub entropy: T,
    pub crest: T,
    pub rolloff_hz: T,
}

impl<T: Real> SpectralFeatures<T> {
    pub const NAMES: [&'static str; 6] = [
        "sd_centroid_hz",
        "sd_spread_hz",
        "sd_kurtosis",
        "sd_entropy",
        "sd_crest",
        "sd_rolloff_hz",
    ];

    pub fn to_vec(&self) -> Vec<T> {
        vec![
            self.centroid_hz,
            self.spread_hz,
            self.kurtosis,
            self.entropy,
            self.crest,
            self.rolloff_hz,
        ]
    }
}

/// Descriptors of `magnitudes` located at `bin_freqs_hz`.
///
/// A spectrum with zero spread (a single occupied bin) has no defined
/// kurtosis; it is reported as 1, the lower bound of the descriptor.
pub fn extract_spectral_features<T: Real>(
    magnitudes: &[T],
    bin_freqs_hz: &[T],
    cfg: &SpectralConfig,
) -> Result<SpectralFeatures<T>> {
    let k = magnitudes.len();
    if k < 3 {
        return invalid(format!("spectral features need at least 3 bins, got {k}"));
    }
    if bin_freqs_hz.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: bin_freqs_hz.len(),
        });
    }
    if !(cfg.kappa > 0.0 && cfg.kappa < 1.0) {
        return invalid(format!("kappa must lie in (0, 1), got {}", cfg.kappa));
    }
    if magnitudes.iter().any(|&m| !(m >= T::zero()) || !m.is_finite()) {
        return invalid("magnitudes must be finite and non-negative");
    }
    if bin_freqs_hz.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("bin frequencies must be strictly increasing");
    }
    let total: T = magnitudes.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::Degenerate("all-zero spectrum".into()));
    }

    let weighted = |g: &dyn Fn(T) -> T| -> T {
        magnitudes
            .iter()
            .zip(bin_freqs_hz)
            .map(|(&m, &f)| g(f) * m)
            .sum::<T>()
            / total
    };
    let centroid = weighted(&|f| f);
    let spread = weighted(&|f| (f - centroid).powi(2)).sqrt();
    let kurtosis = if spread > T::zero() {
        weighted(&|f| (f - centroid).powi(4)) / spread.powi(4)
    } else {
        T::one()
    };

    let log_span = T::of_usize(k - 1).ln();
    let plogp = |p: T| if p > T::zero() { p * p.ln() } else { T::zero() };
    let entropy = match cfg.entropy {
        EntropyMode::Normalized => -magnitudes.iter().map(|&m| plogp(m / total)).sum::<T>(),
        EntropyMode::Literal => -magnitudes.iter().map(|&m| plogp(m)).sum::<T>(),
    } / log_span;

    let peak = magnitudes.iter().fold(T::zero(), |a, &b| a.max(b));
    let crest = peak / (total / T::of_usize(k));

    let threshold = T::of(cfg.kappa) * total;
    let mut acc = T::zero();
    let mut rolloff_bin = k - 1;
    for (i, &m) in magnitudes.iter().enumerate() {
        acc += m;
        if acc >= threshold {
            rolloff_bin = i;
            break;
        }
    }

    Ok(SpectralFeatures {
        centroid_hz: centroid,
        spread_hz: spread,
        kurtosis,
        entropy,
        crest,
        rolloff_hz: bin_freqs_hz[rolloff_bin],
    })
}

/// One-sided magnitude spectrum of the Hann-windowed segment with a DFT the
/// length of the segment. Returns `(magnitudes, bin frequencies)`.
pub fn segment_spectrum<T: Real>(segment: &Signal<T>) -> Result<(Vec<T>, Vec<T>)> {
    let n = segment.len();
    let window: Vec<T> = WindowSpec::hann(n)?.coefficients();
    let windowed: Vec<T> = segment
        .samples()
        .iter()
        .zip(&window)
        .map(|(&x, &w)| x * w)
        .collect();
    let bins = dft(&windowed, n)?;
    let spacing = segment.sample_rate_hz() / T::of_usize(n);
    let half = n / 2 + 1;
    let mags = bins[..half].iter().map(|c| c.norm_sqr().sqrt()).collect();
    let freqs = (0..half).map(|mu| T::of_usize(mu) * spacing).collect();
    Ok((mags, freqs))
}

/// Spectral descriptors of a time-domain segment.
pub fn spectral_features_of<T: Real>(
    segment: &Signal<T>,
    cfg: &SpectralConfig,
) -> Result<SpectralFeatures<T>> {
    let (mags, freqs) = segment_spectrum(segment)?;
    extract_spectral_features(&mags, &freqs, cfg)
}
