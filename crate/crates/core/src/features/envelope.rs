//! Bearing characteristic fault frequencies and envelope-spectrum amplitudes
//! at their first three harmonics (feature set "ENV_AMP").

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::signal::{analytic_envelope, dft, Signal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BearingGeometry<T> {
    pub n_rolling_elements: usize,
    pub ball_diameter_mm: T,
    pub pitch_diameter_mm: T,
    pub contact_angle_rad: T,
}

impl<T: Real> BearingGeometry<T> {
    /// Nine-ball deep-groove geometry (d = 7.94 mm, D = 39.04 mm, no contact
    /// angle). Its fault-frequency ratios are mutually non-commensurate, which
    /// keeps harmonic lines of different faults apart.
    pub fn generic_deep_groove() -> Self {
        Self {
            n_rolling_elements: 9,
            ball_diameter_mm: T::of(7.94),
            pitch_diameter_mm: T::of(39.04),
            contact_angle_rad: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rolling_elements < 2 {
            return invalid("a bearing needs at least 2 rolling elements");
        }
        let d = self.ball_diameter_mm;
        let pitch = self.pitch_diameter_mm;
        if !(d > T::zero() && d < pitch && pitch.is_finite()) {
            return invalid(format!(
                "need 0 < ball diameter ({d}) < pitch diameter ({pitch})"
            ));
        }
        let phi = self.contact_angle_rad;
        if !(phi >= T::zero() && phi < T::FRAC_PI_2()) {
            return invalid(format!("contact angle {phi} rad outside [0, pi/2)"));
        }
        Ok(())
    }
}

impl<T: Real> Default for BearingGeometry<T> {
    fn default() -> Self {
        Self::generic_deep_groove()
    }
}

/// Absolute characteristic fault frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultFrequencies<T> {
    pub bpfo_hz: T,
    pub bpfi_hz: T,
    /// Cage (fundamental train) frequency.
    pub ca_hz: T,
    /// Rolling-element (ball spin) frequency.
    pub re_hz: T,
}

impl<T: Real> FaultFrequencies<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.bpfo_hz, self.bpfi_hz, self.ca_hz, self.re_hz]
    }

    pub fn max_hz(&self) -> T {
        self.as_array().into_iter().fold(T::zero(), T::max)
    }
}

/// Standard rigid-body kinematic fault frequencies at shaft frequency
/// `rotational_freq_hz`.
pub fn fault_frequencies<T: Real>(
    geometry: &BearingGeometry<T>,
    rotational_freq_hz: T,
) -> Result<FaultFrequencies<T>> {
    geometry.validate()?;
    if !(rotational_freq_hz > T::zero()) || !rotational_freq_hz.is_finite() {
        return invalid(format!(
            "rotational frequency must be positive, got {rotational_freq_hz}"
        ));
    }
    let half = T::of(0.5);
    let n = T::of_usize(geometry.n_rolling_elements);
    let r = geometry.ball_diameter_mm / geometry.pitch_diameter_mm
        * geometry.contact_angle_rad.cos();
    let fr = rotational_freq_hz;
    Ok(FaultFrequencies {
        bpfo_hz: half * n * fr * (T::one() - r),
        bpfi_hz: half * n * fr * (T::one() + r),
        ca_hz: half * fr * (T::one() - r),
        re_hz: geometry.pitch_diameter_mm / (T::of(2.0) * geometry.ball_diameter_mm)
            * fr
            * (T::one() - r * r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct EnvelopeConfig {
    /// Half-width of a local-maximum search around each harmonic bin.
    /// Zero selects the nearest bin only.
    pub peak_search_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvAmpFeatures<T> {
    pub amp_bpfo: T,
    pub amp_bpfi: T,
    pub amp_ca: T,
    pub amp_re: T,
}

impl<T: Real> EnvAmpFeatures<T> {
    pub const NAMES: [&'static str; 4] = ["env_amp_bpfo", "env_amp_bpfi", "env_amp_ca", "env_amp_re"];

    pub fn to_vec(&self) -> Vec<T> {
        vec![self.amp_bpfo, self.amp_bpfi, self.amp_ca, self.amp_re]
    }
}

/// Magnitude spectrum of the mean-removed analytic envelope, one-sided
/// (`0..=K/2`), with its bin spacing in Hz.
pub fn envelope_spectrum<T: Real>(segment: &Signal<T>) -> Result<(Vec<T>, T)> {
    let mut env = analytic_envelope(segment)?;
    let mean = env.iter().copied().sum::<T>() / T::of_usize(env.len());
    for v in &mut env {
        *v -= mean;
    }
    let n = env.len();
    let bins = dft(&env, n)?;
    let mags = bins[..n / 2 + 1].iter().map(|c| c.norm_sqr().sqrt()).collect();
    Ok((mags, segment.sample_rate_hz() / T::of_usize(n)))
}

/// Index of the bin nearest to `freq_hz`; exact midpoints go to the lower bin.
pub fn nearest_bin<T: Real>(freq_hz: T, bin_spacing_hz: T) -> usize {
    let x = freq_hz / bin_spacing_hz;
    (x - T::of(0.5)).ceil().max(T::zero()).to_usize().unwrap_or(0)
}

fn harmonic_sum<T: Real>(
    mags: &[T],
    spacing: T,
    fault_hz: T,
    cfg: &EnvelopeConfig,
) -> Result<T> {
    let last = mags.len() - 1;
    let mut sum = T::zero();
    for h in 1..=3 {
        let target = T::of_usize(h) * fault_hz;
        let bin = nearest_bin(target, spacing);
        if bin + cfg.peak_search_bins > last {
            return Err(Error::InvalidInput(format!(
                "harmonic {h} of {fault_hz} Hz lies beyond the envelope spectrum ({} Hz)",
                T::of_usize(last) * spacing
            )));
        }
        let lo = bin.saturating_sub(cfg.peak_search_bins);
        let hi = bin + cfg.peak_search_bins;
        sum += mags[lo..=hi].iter().fold(T::zero(), |a, &b| a.max(b));
    }
    Ok(sum)
}

/// Sum of envelope-spectrum magnitudes at harmonics 1..=3 of each fault
/// frequency.
pub fn envelope_fault_amplitudes<T: Real>(
    segment: &Signal<T>,
    faults: &FaultFrequencies<T>,
    cfg: &EnvelopeConfig,
) -> Result<EnvAmpFeatures<T>> {
    let (mags, spacing) = envelope_spectrum(segment)?;
    let amp = |f| harmonic_sum(&mags, spacing, f, cfg);
    Ok(EnvAmpFeatures {
        amp_bpfo: amp(faults.bpfo_hz)?,
        amp_bpfi: amp(faults.bpfi_hz)?,
        amp_ca: amp(faults.ca_hz)?,
        amp_re: amp(faults.re_hz)?,
    })
}
