//! Feature extractors: time-domain statistics, spectral descriptors,
//! envelope fault amplitudes, MFCCs and the amplitude modulation spectrogram.

pub mod ams;
pub mod envelope;
pub mod mfcc;
pub mod spectral;
pub mod time;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::signal::{next_power_of_two, StftConfig, WindowKind, WindowSpec};

/// Energies are floored here before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-12;

/// How per-frame values are reduced to one value per segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
}

impl Aggregation {
    /// Column-wise reduction of `rows` (all rows of equal length).
    pub(crate) fn reduce<T: crate::Real>(&self, rows: &[Vec<T>]) -> Vec<T> {
        let width = rows.first().map_or(0, Vec::len);
        match self {
            Aggregation::Mean => {
                let n = T::of_usize(rows.len());
                let mut acc = vec![T::zero(); width];
                for row in rows {
                    for (a, &v) in acc.iter_mut().zip(row) {
                        *a += v;
                    }
                }
                acc.into_iter().map(|a| a / n).collect()
            }
            Aggregation::Median => (0..width)
                .map(|j| {
                    let mut col: Vec<T> = rows.iter().map(|r| r[j]).collect();
                    col.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
                    let m = col.len();
                    if m % 2 == 1 {
                        col[m / 2]
                    } else {
                        (col[m / 2 - 1] + col[m / 2]) / T::of(2.0)
                    }
                })
                .collect(),
        }
    }
}

/// Frame timing in seconds, resolved to samples for a given sample rate.
///
/// The defaults are 25 ms Hann frames every 4 ms with the DFT length rounded
/// up to the next power of two. `strict_nfft` instead uses a 512-point DFT
/// and shortens the window to 512 samples when it would not fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameTiming {
    pub window_s: f64,
    pub hop_s: f64,
    pub window: WindowKind,
    /// Explicit DFT length; `None` picks the next power of two.
    pub dft_length: Option<usize>,
    pub strict_nfft: bool,
}

impl Default for FrameTiming {
    fn default() -> Self {
        Self {
            window_s: 0.025,
            hop_s: 0.004,
            window: WindowKind::Hann,
            dft_length: None,
            strict_nfft: false,
        }
    }
}

pub const STRICT_NFFT: usize = 512;

impl FrameTiming {
    pub fn resolve(&self, sample_rate_hz: f64) -> Result<StftConfig> {
        if !(self.window_s > 0.0 && self.hop_s > 0.0) {
            return invalid("frame window and hop durations must be positive");
        }
        let mut window_len = (self.window_s * sample_rate_hz).round() as usize;
        let hop = ((self.hop_s * sample_rate_hz).round() as usize).max(1);
        let dft_length = if self.strict_nfft {
            window_len = window_len.min(STRICT_NFFT);
            STRICT_NFFT
        } else {
            self.dft_length
                .unwrap_or_else(|| next_power_of_two(window_len))
        };
        StftConfig::new(WindowSpec::new(self.window, window_len)?, hop, dft_length)
    }
}
