//! Fixed-length, non-overlapping framing of a recording, dismissing frames
//! during which the rotational speed changes.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metrics::Label;
use crate::scalar::Real;
use crate::signal::Signal;
use crate::synth::interpolate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    pub frame_s: f64,
    /// A frame is dismissed when `(max rpm - min rpm) / mean rpm` exceeds
    /// this fraction.
    pub max_rpm_range_frac: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            frame_s: 2.0,
            max_rpm_range_frac: 0.01,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frame_s > 0.0 && self.frame_s.is_finite()) {
            return invalid(format!("frame length must be positive, got {}", self.frame_s));
        }
        if !(self.max_rpm_range_frac >= 0.0) {
            return invalid("rpm range threshold must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRecord<T> {
    pub segment: Signal<T>,
    pub rotational_freq_hz: T,
    pub label: Label,
    pub source_id: String,
}

/// Sample span `[start, start + len)` of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpan {
    pub index: usize,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation<T> {
    pub kept: Vec<SegmentRecord<T>>,
    pub kept_spans: Vec<FrameSpan>,
    pub dismissed: Vec<FrameSpan>,
}

/// Minimum, maximum and time average of the piecewise-linear track over
/// `[t0, t1]`.
fn track_stats(track: &[(f64, f64)], t0: f64, t1: f64) -> (f64, f64, f64) {
    let mut knots = vec![t0];
    knots.extend(track.iter().map(|p| p.0).filter(|&t| t > t0 && t < t1));
    knots.push(t1);
    let vals: Vec<f64> = knots.iter().map(|&t| interpolate(track, t)).collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let area: f64 = knots
        .windows(2)
        .zip(vals.windows(2))
        .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0]))
        .sum();
    (lo, hi, area / (t1 - t0))
}

pub fn check_speed_track(track: &[(f64, f64)]) -> Result<()> {
    if track.is_empty() {
        return invalid("speed track is empty");
    }
    if track.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return invalid("speed track times must increase strictly");
    }
    if track.iter().any(|&(t, r)| !t.is_finite() || !(r > 0.0 && r.is_finite())) {
        return invalid("speed track needs finite times and positive speeds");
    }
    Ok(())
}

/// Splits `signal` into frames of `cfg.frame_s`. The speed track is a list
/// of `(time_s, rpm)` knots interpolated linearly and must cover the
/// signal's duration. Kept segments are labelled `source_id/index`.
pub fn segment<T: Real>(
    signal: &Signal<T>,
    speed_track: &[(f64, f64)],
    label: Label,
    source_id: &str,
    cfg: &SegmentationConfig,
) -> Result<Segmentation<T>> {
    cfg.validate()?;
    check_speed_track(speed_track)?;
    let fs = signal.sample_rate_hz().as_f64();
    let frame_len = (cfg.frame_s * fs).round() as usize;
    if frame_len == 0 || signal.len() < frame_len {
        return Err(Error::InsufficientData(format!(
            "signal of {:.3} s is shorter than one {} s frame",
            signal.len() as f64 / fs,
            cfg.frame_s
        )));
    }
    let duration = signal.len() as f64 / fs;
    let slack = 1.0 / fs;
    let (first, last) = (speed_track[0].0, speed_track[speed_track.len() - 1].0);
    if first > slack || last < duration - slack {
        return invalid(format!(
            "speed track covers {first} s to {last} s but the signal lasts {duration} s"
        ));
    }

    let mut out = Segmentation {
        kept: Vec::new(),
        kept_spans: Vec::new(),
        dismissed: Vec::new(),
    };
    for index in 0..signal.len() / frame_len {
        let start = index * frame_len;
        let span = FrameSpan {
            index,
            start,
            len: frame_len,
        };
        let t0 = start as f64 / fs;
        let t1 = (start + frame_len) as f64 / fs;
        let (lo, hi, mean) = track_stats(speed_track, t0, t1);
        if hi - lo > cfg.max_rpm_range_frac * mean {
            out.dismissed.push(span);
            continue;
        }
        out.kept.push(SegmentRecord {
            segment: signal.slice(start, frame_len)?,
            rotational_freq_hz: T::of(mean / 60.0),
            label,
            source_id: format!("{source_id}/{index:04}"),
        });
        out.kept_spans.push(span);
    }
    Ok(out)
}
