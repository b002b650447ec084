//! Time-domain statistics of a segment (feature set "TD").
//!
//! The mean uses `1/K`; variance, RMS and the third/fourth central moments
//! use `1/(K-1)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Which sample the peak-to-RMS ratio takes as the peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PeakMode {
    /// `max(x)`
    #[default]
    Raw,
    /// `max(|x|)`
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct TimeFeatureConfig {
    pub peak: PeakMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeFeatures<T> {
    pub average: T,
    pub variance: T,
    pub rms: T,
    pub kurtosis: T,
    pub skewness: T,
    pub amplitude_range: T,
    pub peak_to_rms: T,
}

impl<T: Real> TimeFeatures<T> {
    pub const NAMES: [&'static str; 7] = [
        "td_average",
        "td_variance",
        "td_rms",
        "td_kurtosis",
        "td_skewness",
        "td_amplitude_range",
        "td_peak_to_rms",
    ];

    pub fn to_vec(&self) -> Vec<T> {
        vec![
            self.average,
            self.variance,
            self.rms,
            self.kurtosis,
            self.skewness,
            self.amplitude_range,
            self.peak_to_rms,
        ]
    }
}

fn check_len<T>(x: &[T]) -> Result<()> {
    if x.len() < 2 {
        return invalid(format!(
            "time features need at least 2 samples, got {}",
            x.len()
        ));
    }
    Ok(())
}

fn bessel<T: Real>(x: &[T]) -> T {
    T::one() / T::of_usize(x.len() - 1)
}

pub fn average<T: Real>(x: &[T]) -> Result<T> {
    if x.is_empty() {
        return invalid("average of an empty segment");
    }
    Ok(x.iter().copied().sum::<T>() / T::of_usize(x.len()))
}

fn central_moment<T: Real>(x: &[T], mean: T, power: i32) -> T {
    x.iter().map(|&v| (v - mean).powi(power)).sum::<T>() * bessel(x)
}

pub fn variance<T: Real>(x: &[T]) -> Result<T> {
    check_len(x)?;
    Ok(central_moment(x, average(x)?, 2))
}

pub fn rms<T: Real>(x: &[T]) -> Result<T> {
    check_len(x)?;
    Ok((x.iter().map(|&v| v * v).sum::<T>() * bessel(x)).sqrt())
}

fn nonzero_variance<T: Real>(x: &[T]) -> Result<(T, T)> {
    let mean = average(x)?;
    let var = central_moment(x, mean, 2);
    if var <= T::zero() {
        return Err(Error::Degenerate(
            "constant segment has zero variance".into(),
        ));
    }
    Ok((mean, var))
}

pub fn kurtosis<T: Real>(x: &[T]) -> Result<T> {
    check_len(x)?;
    let (mean, var) = nonzero_variance(x)?;
    Ok(central_moment(x, mean, 4) / (var * var))
}

pub fn skewness<T: Real>(x: &[T]) -> Result<T> {
    check_len(x)?;
    let (mean, var) = nonzero_variance(x)?;
    Ok(central_moment(x, mean, 3) / var.sqrt().powi(3))
}

fn max_min<T: Real>(x: &[T]) -> (T, T) {
    x.iter().fold((T::neg_infinity(), T::infinity()), |(hi, lo), &v| {
        (hi.max(v), lo.min(v))
    })
}

pub fn amplitude_range<T: Real>(x: &[T]) -> Result<T> {
    if x.is_empty() {
        return invalid("range of an empty segment");
    }
    let (hi, lo) = max_min(x);
    Ok(hi - lo)
}

pub fn peak_to_rms<T: Real>(x: &[T], mode: PeakMode) -> Result<T> {
    let r = rms(x)?;
    if r <= T::zero() {
        return Err(Error::Degenerate("all-zero segment has zero rms".into()));
    }
    let peak = match mode {
        PeakMode::Raw => max_min(x).0,
        PeakMode::Absolute => x.iter().fold(T::zero(), |m, &v| m.max(v.abs())),
    };
    Ok(peak / r)
}

/// All seven statistics. Constant segments are rejected because kurtosis
/// and skewness are undefined for them.
pub fn extract_time_features<T: Real>(
    segment: &[T],
    cfg: &TimeFeatureConfig,
) -> Result<TimeFeatures<T>> {
    check_len(segment)?;
    Ok(TimeFeatures {
        average: average(segment)?,
        variance: variance(segment)?,
        rms: rms(segment)?,
        kurtosis: kurtosis(segment)?,
        skewness: skewness(segment)?,
        amplitude_range: amplitude_range(segment)?,
        peak_to_rms: peak_to_rms(segment, cfg.peak)?,
    })
}
