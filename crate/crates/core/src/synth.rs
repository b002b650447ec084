//! Synthetic bearing-vibration generator.
//!
//! A healthy signal is the sum of shaft harmonics, torque-scaled broadband
//! noise, two converter carriers amplitude-modulated at twice the pole-pair
//! frequency, and sporadic low-frequency structural shocks. A faulty bearing
//! adds an impulse train at the fault's characteristic frequency; every
//! impulse rings a lightly damped high-frequency resonance. Impulse spacing
//! jitters by about one percent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::features::envelope::{fault_frequencies, BearingGeometry};
use crate::signal::Signal;

/// Speed levels of the reference test rig.
pub const SPEED_LEVELS_RPM: [f64; 8] = [500.0, 750.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 3500.0];
pub const MIN_RPM: f64 = 500.0;
pub const MAX_RPM: f64 = 3500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum TorqueLevel {
    Zero,
    Third,
    TwoThirds,
    Full,
}

impl TorqueLevel {
    pub const ALL: [TorqueLevel; 4] = [TorqueLevel::Zero, TorqueLevel::Third, TorqueLevel::TwoThirds, TorqueLevel::Full];

    pub fn percent(self) -> u32 {
        match self {
            TorqueLevel::Zero => 0,
            TorqueLevel::Third => 33,
            TorqueLevel::TwoThirds => 66,
            TorqueLevel::Full => 100,
        }
    }

    pub fn fraction(self) -> f64 {
        self.percent() as f64 / 100.0
    }

    pub fn from_percent(p: u32) -> Result<Self> {
        match p {
            0 => Ok(TorqueLevel::Zero),
            33 => Ok(TorqueLevel::Third),
            66 => Ok(TorqueLevel::TwoThirds),
            100 => Ok(TorqueLevel::Full),
            _ => invalid(format!("torque level must be 0, 33, 66 or 100 percent, got {p}")),
        }
    }
}

impl TryFrom<u32> for TorqueLevel {
    type Error = Error;

    fn try_from(p: u32) -> Result<Self> {
        Self::from_percent(p)
    }
}

impl From<TorqueLevel> for u32 {
    fn from(t: TorqueLevel) -> u32 {
        t.percent()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub rotational_speed_rpm: f64,
    pub torque_level: TorqueLevel,
    pub duration_s: f64,
}

impl OperatingPoint {
    pub fn validate(&self) -> Result<()> {
        check_rpm(self.rotational_speed_rpm)?;
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return invalid(format!("duration must be positive, got {}", self.duration_s));
        }
        Ok(())
    }
}

fn check_rpm(rpm: f64) -> Result<()> {
    if !(MIN_RPM..=MAX_RPM).contains(&rpm) {
        return invalid(format!("speed {rpm} rpm outside [{MIN_RPM}, {MAX_RPM}]"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    None,
    OuterRace,
    InnerRace,
    Cage,
    RollingElement,
    /// Damage spread over several components.
    Distributed,
}

impl FaultKind {
    pub fn name(self) -> &'static str {
        match self {
            FaultKind::None => "none",
            FaultKind::OuterRace => "outer_race",
            FaultKind::InnerRace => "inner_race",
            FaultKind::Cage => "cage",
            FaultKind::RollingElement => "rolling_element",
            FaultKind::Distributed => "distributed",
        }
    }
}

impl std::str::FromStr for FaultKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" | "healthy" => FaultKind::None,
            "outer_race" => FaultKind::OuterRace,
            "inner_race" => FaultKind::InnerRace,
            "cage" => FaultKind::Cage,
            "rolling_element" => FaultKind::RollingElement,
            "distributed" => FaultKind::Distributed,
            _ => return Err(Error::Parse(format!("unknown fault kind {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub kind: FaultKind,
    pub severity: f64,
    #[serde(default = "default_resonance")]
    pub resonance_hz: f64,
}

fn default_resonance() -> f64 {
    21_000.0
}

impl FaultSpec {
    pub fn healthy() -> Self {
        Self {
            kind: FaultKind::None,
            severity: 0.0,
            resonance_hz: default_resonance(),
        }
    }

    pub fn new(kind: FaultKind, severity: f64) -> Result<Self> {
        let spec = Self {
            kind,
            severity,
            resonance_hz: default_resonance(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.severity) {
            return invalid(format!("severity must lie in [0, 1], got {}", self.severity));
        }
        if (self.severity == 0.0) != (self.kind == FaultKind::None) {
            return invalid("severity is zero exactly when the fault kind is none");
        }
        if !(self.resonance_hz > 0.0) {
            return invalid("resonance frequency must be positive");
        }
        Ok(())
    }
}

/// Amplitudes and frequencies of the rig model. Accelerations are in g.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RigModel {
    pub sample_rate_hz: f64,
    /// Amplitude of the first shaft harmonic.
    pub shaft_amplitude: f64,
    /// Broadband noise standard deviation at zero torque.
    pub noise_std: f64,
    /// Noise gain added at full torque.
    pub noise_torque_gain: f64,
    /// Log-normal spread of a per-signal gain on the whole signal (sensor
    /// mounting and coupling).
    pub gain_spread: f64,
    /// Range of the per-signal spectral tilt of the noise: the noise is
    /// `e[k] + w (e[k] - e[k-1])` with `w` uniform in this range.
    pub noise_tilt: [f64; 2],
    pub carrier_hz: [f64; 2],
    pub carrier_amplitude: f64,
    /// Depth of the carriers' modulation at twice the pole-pair frequency.
    pub sideband_depth: f64,
    pub pole_pairs: u32,
    /// Mean number of structural shocks per second.
    pub shock_rate_hz: f64,
    pub shock_amplitude: f64,
    pub shock_mode_hz: f64,
    pub shock_damping: f64,
    /// Burst amplitude at severity 1.
    pub fault_amplitude: f64,
    pub fault_damping: f64,
    /// Relative spread of impulse spacing.
    pub jitter: f64,
    /// Upper bound of the per-signal rolling slip; fault impulses repeat at
    /// the kinematic rate times `1 - slip`.
    pub slip_max: f64,
}

impl Default for RigModel {
    fn default() -> Self {
        Self {
            sample_rate_hz: 51_200.0,
            shaft_amplitude: 0.05,
            noise_std: 0.03,
            noise_torque_gain: 0.5,
            gain_spread: 0.3,
            noise_tilt: [-0.3, 0.5],
            carrier_hz: [3_150.0, 6_300.0],
            carrier_amplitude: 0.1,
            sideband_depth: 0.2,
            pole_pairs: 2,
            shock_rate_hz: 3.0,
            shock_amplitude: 0.4,
            shock_mode_hz: 2_600.0,
            shock_damping: 0.03,
            fault_amplitude: 3.0,
            fault_damping: 0.03,
            jitter: 0.01,
            slip_max: 0.015,
        }
    }
}

/// Piecewise-linear speed profile over time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile {
    points: Vec<(f64, f64)>,
}

impl SpeedProfile {
    pub fn constant(rpm: f64) -> Self {
        Self {
            points: vec![(0.0, rpm)],
        }
    }

    /// `(time_s, rpm)` knots with strictly increasing times.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return invalid("speed profile has no points");
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return invalid("speed profile times must increase strictly");
        }
        for &(t, rpm) in &points {
            if !t.is_finite() {
                return invalid("non-finite time in speed profile");
            }
            check_rpm(rpm)?;
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Speed at `t`, held constant outside the knots.
    pub fn rpm_at(&self, t: f64) -> f64 {
        interpolate(&self.points, t)
    }
}

/// Linear interpolation of `(x, y)` knots sorted by `x`, clamped at the ends.
pub fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let i = points.partition_point(|p| p.0 <= x);
    if i == 0 {
        return points[0].1;
    }
    if i == points.len() {
        return points[i - 1].1;
    }
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Signal at a constant operating point with the default rig model.
pub fn generate(
    op: &OperatingPoint,
    fault: &FaultSpec,
    geometry: &BearingGeometry<f64>,
    seed: u64,
) -> Result<Signal<f64>> {
    op.validate()?;
    generate_profile(
        &RigModel::default(),
        &SpeedProfile::constant(op.rotational_speed_rpm),
        op.torque_level,
        op.duration_s,
        fault,
        geometry,
        seed,
    )
}

/// Damped sinusoid `amp * exp(-t / tau) * sin(2 pi f t)` started at the
/// fractional time `t0` (seconds), added to `out`.
fn add_burst(out: &mut [f64], fs: f64, t0: f64, amp: f64, freq_hz: f64, damping: f64) {
    let omega = TAU * freq_hz;
    let decay = damping * omega;
    let first = (t0 * fs).ceil().max(0.0) as usize;
    if first >= out.len() {
        return;
    }
    // ring down to about 1e-4 of the initial amplitude
    let len = ((9.2 / decay) * fs).ceil() as usize;
    let dt0 = first as f64 / fs - t0;
    let start = amp * (-decay * dt0).exp();
    let (mut re, mut im) = ((omega * dt0).cos() * start, (omega * dt0).sin() * start);
    let r = (-decay / fs).exp();
    let (c, s) = ((omega / fs).cos() * r, (omega / fs).sin() * r);
    for v in out[first..].iter_mut().take(len) {
        *v += im;
        let re2 = re * c - im * s;
        im = re * s + im * c;
        re = re2;
    }
}

/// One impulse source: events whenever the integral of `ratio * f_r` passes
/// the next jittered threshold.
struct ImpulseSource {
    ratio: f64,
    amplitude: f64,
    /// Modulation depth by shaft angle (inner-race faults pass through the
    /// load zone once per revolution).
    shaft_modulation: f64,
}

/// Signal under a time-varying speed profile.
pub fn generate_profile(
    rig: &RigModel,
    profile: &SpeedProfile,
    torque: TorqueLevel,
    duration_s: f64,
    fault: &FaultSpec,
    geometry: &BearingGeometry<f64>,
    seed: u64,
) -> Result<Signal<f64>> {
    fault.validate()?;
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return invalid(format!("duration must be positive, got {duration_s}"));
    }
    let fs = rig.sample_rate_hz;
    let mut highest = rig.carrier_hz[0].max(rig.carrier_hz[1]).max(rig.shock_mode_hz);
    if fault.kind != FaultKind::None {
        highest = highest.max(fault.resonance_hz);
    }
    if !(fs > 2.0 * highest) {
        return invalid(format!("sample rate {fs} Hz cannot represent the rig's tones"));
    }
    let n = (duration_s * fs).round() as usize;
    if n == 0 {
        return invalid("duration shorter than one sample");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tq = torque.fraction();

    // shaft angle integrated over the profile
    let mut theta = vec![0.0; n];
    let mut fr = vec![0.0; n];
    let mut acc = 0.0;
    for k in 0..n {
        let f = profile.rpm_at(k as f64 / fs) / 60.0;
        fr[k] = f;
        theta[k] = acc;
        acc += TAU * f / fs;
    }

    let gain = (rng.sample::<f64, _>(rand_distr::StandardNormal) * rig.gain_spread).exp();
    let noise = Normal::new(0.0, rig.noise_std * (1.0 + rig.noise_torque_gain * tq))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let w = rig.noise_tilt[0] + (rig.noise_tilt[1] - rig.noise_tilt[0]) * rng.random::<f64>();
    let mut prev = 0.0;
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            let e = noise.sample(&mut rng);
            let v = e + w * (e - prev);
            prev = e;
            v
        })
        .collect();

    let phases: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>() * TAU);
    let harmonics = [1.0, 0.5, 0.3];
    let carrier_amp = rig.carrier_amplitude * (0.5 + tq);
    let pp = 2.0 * rig.pole_pairs as f64;
    for k in 0..n {
        let t = k as f64 / fs;
                let mut v = 0.0;
        for (h, &w) in harmonics.iter().enumerate() {
            v += rig.shaft_amplitude * w * ((h as f64 + 1.0) * theta[k] + phases[h]).sin();
        }
        let m = 1.0 + rig.sideband_depth * (pp * theta[k]).cos();
        v += carrier_amp * m * ((TAU * rig.carrier_hz[0] * t + phases[3]).sin() + 0.6 * (TAU * rig.carrier_hz[1] * t + phases[4]).sin());
        x[k] += v;
    }

    if rig.shock_rate_hz > 0.0 {
        let gaps = Exp::new(rig.shock_rate_hz).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let sizes = Exp::new(1.0).expect("unit rate");
        let mut t = gaps.sample(&mut rng);
        while t < duration_s {
            let amp = rig.shock_amplitude * sizes.sample(&mut rng);
            add_burst(&mut x, fs, t, amp, rig.shock_mode_hz, rig.shock_damping);
            t += gaps.sample(&mut rng);
        }
    }

    if fault.kind != FaultKind::None {
        let ff = fault_frequencies(geometry, 1.0)?;
        let a = rig.fault_amplitude * fault.severity;
        let src = |ratio, amplitude, shaft_modulation| ImpulseSource {
            ratio,
            amplitude,
            shaft_modulation,
        };
        let sources = match fault.kind {
            FaultKind::None => vec![],
            FaultKind::OuterRace => vec![src(ff.bpfo_hz, a, 0.0)],
            FaultKind::InnerRace => vec![src(ff.bpfi_hz, a, 0.5)],
            FaultKind::Cage => vec![src(ff.ca_hz, a, 0.0)],
            FaultKind::RollingElement => vec![src(ff.re_hz, a, 0.3)],
            FaultKind::Distributed => vec![
                src(ff.bpfo_hz, 0.7 * a, 0.0),
                src(ff.bpfi_hz, 0.5 * a, 0.5),
                src(ff.re_hz, 0.5 * a, 0.3),
                src(ff.ca_hz, 0.3 * a, 0.0),
            ],
        };
        let jitter = rig.jitter;
        let slip = 1.0 - rig.slip_max * rng.random::<f64>();
        for s in &sources {
            // fault phase in cycles, tracked on the sample grid and refined
            // to a fractional crossing time
            let mut cycles = 0.0;
            let mut next = rng.random::<f64>();
            for k in 0..n {
                let step = s.ratio * slip * fr[k] / fs;
                if cycles + step >= next {
                    let t0 = (k as f64 + (next - cycles) / step) / fs;
                    let gain = 1.0 + s.shaft_modulation * theta[k].cos();
                    let wobble = 1.0 + 0.1 * (rng.random::<f64>() - 0.5);
                    add_burst(&mut x, fs, t0, s.amplitude * gain * wobble, fault.resonance_hz, rig.fault_damping);
                    next += 1.0 + jitter * (2.0 * rng.random::<f64>() - 1.0);
                }
                cycles += step;
            }
        }
        if fault.kind == FaultKind::Distributed {
            // surface roughness: weak random-time bursts
            let gaps = Exp::new(400.0).expect("positive rate");
            let mut t = gaps.sample(&mut rng);
            while t < duration_s {
                let amp = 0.15 * a * (rng.random::<f64>() - 0.5);
                add_burst(&mut x, fs, t, amp, fault.resonance_hz, rig.fault_damping);
                t += gaps.sample(&mut rng);
            }
        }
    }

    for v in &mut x {
        *v *= gain;
    }
    Signal::new(x, fs)
}
