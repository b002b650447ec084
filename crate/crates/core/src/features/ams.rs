//! Amplitude modulation spectrogram (AMS) and its scalar summary.
//!
//! A first STFT splits the segment into subbands; each subband's squared
//! magnitude over frames is an envelope signal sampled at the frame rate. A
//! second STFT of every envelope gives its modulation spectrum, whose
//! magnitudes are averaged over second-stage frames and log-compressed.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::mfcc::floored_ln;
use super::{Aggregation, FrameTiming};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::signal::{Signal, StftConfig, StftPlan, WindowKind, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmsConfig {
    /// Acoustic-frequency STFT in samples.
    pub first: StftConfig,
    /// Modulation STFT in first-stage frames.
    pub second: StftConfig,
    pub aggregation: Aggregation,
}

/// Serializable AMS parameters. Defaults: 25 ms / 4 ms first stage, a
/// 128-frame window with 64-frame hop and 256-point DFT in the second, and
/// the scalar summed over centres above 20 kHz and modulations below 80 Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmsSettings {
    pub first: FrameTiming,
    pub second_window: WindowKind,
    pub second_window_frames: usize,
    pub second_hop_frames: usize,
    pub second_dft_length: usize,
    pub aggregation: Aggregation,
    pub min_center_hz: f64,
    pub max_mod_hz: f64,
}

impl Default for AmsSettings {
    fn default() -> Self {
        Self {
            first: FrameTiming::default(),
            second_window: WindowKind::Hann,
            second_window_frames: 128,
            second_hop_frames: 64,
            second_dft_length: 256,
            aggregation: Aggregation::Mean,
            min_center_hz: 20_000.0,
            max_mod_hz: 80.0,
        }
    }
}

impl AmsSettings {
    pub fn resolve(&self, sample_rate_hz: f64) -> Result<AmsConfig> {
        Ok(AmsConfig {
            first: self.first.resolve(sample_rate_hz)?,
            second: StftConfig::new(
                WindowSpec::new(self.second_window, self.second_window_frames)?,
                self.second_hop_frames,
                self.second_dft_length,
            )?,
            aggregation: self.aggregation,
        })
    }
}

/// Log-magnitude AMS: `values[subband][modulation bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmsMatrix<T> {
    pub values: Vec<Vec<T>>,
    pub center_freqs_hz: Vec<T>,
    pub mod_freqs_hz: Vec<T>,
}

impl<T: Real> AmsMatrix<T> {
    pub fn n_subbands(&self) -> usize {
        self.values.len()
    }

    pub fn n_mod_bins(&self) -> usize {
        self.mod_freqs_hz.len()
    }

    pub fn mod_bin_spacing_hz(&self) -> T {
        self.mod_freqs_hz[1] - self.mod_freqs_hz[0]
    }

    /// Subband whose centre frequency is closest to `f_hz`.
    pub fn nearest_subband(&self, f_hz: T) -> usize {
        let spacing = self.center_freqs_hz[1] - self.center_freqs_hz[0];
        let idx = (f_hz / spacing).round().to_usize().unwrap_or(0);
        idx.min(self.n_subbands() - 1)
    }

    /// Writes the matrix as CSV: a header of modulation frequencies, then one
    /// row per subband led by its centre frequency.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["center_hz".to_string()];
        header.extend(self.mod_freqs_hz.iter().map(|m| format!("{m}")));
        w.write_record(&header)?;
        for (c, row) in self.center_freqs_hz.iter().zip(&self.values) {
            let mut rec = vec![format!("{c}")];
            rec.extend(row.iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Amplitude modulation spectrogram of a segment.
pub fn ams<T: Real>(segment: &Signal<T>, cfg: &AmsConfig) -> Result<AmsMatrix<T>> {
    let first = StftPlan::new(cfg.first)?;
    let second = StftPlan::new(cfg.second)?;
    let needed_frames = cfg.second.window.length;
    let needed = cfg.first.samples_for_frames(needed_frames);
    if segment.len() < needed {
        return invalid(format!(
            "segment of {} samples is too short for the modulation window ({} samples needed)",
            segment.len(),
            needed
        ));
    }
    let power = first.power_frames(segment.samples())?;
    let n_sub = cfg.first.dft_length / 2 + 1;
    let fs = segment.sample_rate_hz();
    let frame_rate = fs / T::of_usize(cfg.first.hop);

    let mut envelope = vec![T::zero(); power.len()];
    let mut values = Vec::with_capacity(n_sub);
    for band in 0..n_sub {
        for (e, frame) in envelope.iter_mut().zip(&power) {
            *e = frame[band];
        }
        let mags = second.magnitude_frames(&envelope)?;
        values.push(
            cfg.aggregation
                .reduce(&mags)
                .into_iter()
                .map(floored_ln)
                .collect(),
        );
    }

    let sub_spacing = fs / T::of_usize(cfg.first.dft_length);
    let mod_spacing = frame_rate / T::of_usize(cfg.second.dft_length);
    Ok(AmsMatrix {
        values,
        center_freqs_hz: (0..n_sub).map(|i| T::of_usize(i) * sub_spacing).collect(),
        mod_freqs_hz: (0..cfg.second.dft_length / 2 + 1)
            .map(|m| T::of_usize(m) * mod_spacing)
            .collect(),
    })
}

/// Sum of AMS cells with centre frequency above `min_center_hz` and
/// modulation frequency strictly between 0 and `max_mod_hz`.
pub fn ams_scalar<T: Real>(ams: &AmsMatrix<T>, min_center_hz: T, max_mod_hz: T) -> Result<T> {
    let cols: Vec<usize> = ams
        .mod_freqs_hz
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > T::zero() && m < max_mod_hz)
        .map(|(j, _)| j)
        .collect();
    let rows: Vec<usize> = ams
        .center_freqs_hz
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > min_center_hz)
        .map(|(i, _)| i)
        .collect();
    if cols.is_empty() || rows.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no AMS cells above {min_center_hz} Hz centre and below {max_mod_hz} Hz modulation"
        )));
    }
    Ok(rows
        .iter()
        .map(|&i| cols.iter().map(|&j| ams.values[i][j]).sum::<T>())
        .sum())
}
