//! DSP primitives shared by the feature extractors: DFT, STFT, windows,
//! analytic-signal envelope and the cepstral DCT.
//!
//! All transforms are stated against the direct sums
//!
//! ```text
//! X[mu]    = sum_{k=0}^{K-1} x[k] exp(-j 2 pi k mu / M)
//! X[mu, n] = sum_{k=0}^{L-1} x[n*hop + k] w[k] exp(-j 2 pi k mu / M)
//! ```
//!
//! and evaluated with an FFT. Frame phase is referenced to the first sample of
//! each frame, so an STFT column equals the DFT of the windowed frame.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Uniformly sampled real-valued waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<T> {
    samples: Vec<T>,
    sample_rate_hz: T,
}

impl<T: Real> Signal<T> {
    pub fn new(samples: Vec<T>, sample_rate_hz: T) -> Result<Self> {
        if samples.is_empty() {
            return invalid("signal has no samples");
        }
        if !(sample_rate_hz > T::zero()) || !sample_rate_hz.is_finite() {
            return invalid(format!("sample rate must be positive, got {sample_rate_hz}"));
        }
        if let Some(k) = samples.iter().position(|x| !x.is_finite()) {
            return invalid(format!("sample {k} is not finite"));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> T {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> T {
        T::of_usize(self.samples.len()) / self.sample_rate_hz
    }

    /// Copy of `len` samples starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let end = start
            .checked_add(len)
            .filter(|&e| e <= self.samples.len())
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "slice {start}..{start}+{len} outside signal of length {}",
                    self.samples.len()
                ))
            })?;
        Self::new(self.samples[start..end].to_vec(), self.sample_rate_hz)
    }

    /// Returns a copy with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: T) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|&x| x * gain).collect(),
            self.sample_rate_hz,
        )
    }
}

/// DFT bins of a real segment together with their frequency spacing.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    pub bins: Vec<Complex<T>>,
    pub dft_length: usize,
    pub bin_spacing_hz: T,
}

impl<T: Real> Spectrum<T> {
    /// DFT of the whole signal, zero-padded to `dft_length`.
    pub fn of(signal: &Signal<T>, dft_length: usize) -> Result<Self> {
        let bins = dft(signal.samples(), dft_length)?;
        Ok(Self {
            bins,
            dft_length,
            bin_spacing_hz: signal.sample_rate_hz() / T::of_usize(dft_length),
        })
    }

    /// Magnitudes of bins `0..=M/2`.
    pub fn one_sided_magnitudes(&self) -> Vec<T> {
        self.bins[..self.dft_length / 2 + 1]
            .iter()
            .map(|c| c.norm_sqr().sqrt())
            .collect()
    }

    pub fn bin_freq_hz(&self, bin: usize) -> T {
        T::of_usize(bin) * self.bin_spacing_hz
    }
}

type PlanKey = (TypeId, usize, bool);

static PLANS: OnceLock<Mutex<HashMap<PlanKey, Box<dyn Any + Send + Sync>>>> = OnceLock::new();

/// FFT plans are costly to build for long non-power-of-two lengths, so they
/// are cached per scalar type, length and direction.
fn cached_plan<T: Real>(len: usize, forward: bool) -> Arc<dyn Fft<T>> {
    let key = (TypeId::of::<T>(), len, forward);
    let mut plans = PLANS.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    plans
        .entry(key)
        .or_insert_with(|| {
            let mut planner = FftPlanner::<T>::new();
            let plan = if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            };
            Box::new(plan)
        })
        .downcast_ref::<Arc<dyn Fft<T>>>()
        .expect("plan stored under its own scalar type")
        .clone()
}

fn plan_forward<T: Real>(len: usize) -> Arc<dyn Fft<T>> {
    cached_plan(len, true)
}

fn plan_inverse<T: Real>(len: usize) -> Arc<dyn Fft<T>> {
    cached_plan(len, false)
}

/// `dft_length`-point DFT of a real segment of length `K <= dft_length`
/// (zero-padded).
pub fn dft<T: Real>(segment: &[T], dft_length: usize) -> Result<Vec<Complex<T>>> {
    if segment.is_empty() {
        return invalid("cannot transform an empty segment");
    }
    if dft_length < 1 {
        return invalid("dft length must be at least 1");
    }
    if segment.len() > dft_length {
        return invalid(format!(
            "segment length {} exceeds dft length {dft_length}",
            segment.len()
        ));
    }
    let mut buf: Vec<Complex<T>> = segment
        .iter()
        .map(|&x| Complex::new(x, T::zero()))
        .collect();
    buf.resize(dft_length, Complex::new(T::zero(), T::zero()));
    plan_forward::<T>(dft_length).process(&mut buf);
    Ok(buf)
}

/// Inverse DFT including the `1/M` normalisation.
pub fn idft<T: Real>(bins: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    if bins.is_empty() {
        return invalid("cannot invert an empty spectrum");
    }
    let mut buf = bins.to_vec();
    plan_inverse::<T>(buf.len()).process(&mut buf);
    let scale = T::one() / T::of_usize(buf.len());
    for c in &mut buf {
        *c = c.scale(scale);
    }
    Ok(buf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Hann,
    Hamming,
    Rectangular,
}

/// Window shape and length. Tapered windows are periodic ("DFT-even").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub length: usize,
}

impl WindowSpec {
    pub fn new(kind: WindowKind, length: usize) -> Result<Self> {
        let spec = Self { kind, length };
        spec.validate()?;
        Ok(spec)
    }

    pub fn hann(length: usize) -> Result<Self> {
        Self::new(WindowKind::Hann, length)
    }

    pub fn validate(&self) -> Result<()> {
        let min = match self.kind {
            WindowKind::Rectangular => 1,
            WindowKind::Hann | WindowKind::Hamming => 2,
        };
        if self.length < min {
            return invalid(format!(
                "{:?} window needs length >= {min}, got {}",
                self.kind, self.length
            ));
        }
        Ok(())
    }

    pub fn coefficients<T: Real>(&self) -> Vec<T> {
        let l = T::of_usize(self.length);
        let two_pi = T::TAU();
        (0..self.length)
            .map(|k| {
                let phase = two_pi * T::of_usize(k) / l;
                match self.kind {
                    WindowKind::Rectangular => T::one(),
                    WindowKind::Hann => T::of(0.5) - T::of(0.5) * phase.cos(),
                    WindowKind::Hamming => T::of(0.54) - T::of(0.46) * phase.cos(),
                }
            })
            .collect()
    }
}

/// Framing parameters of one STFT stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub window: WindowSpec,
    pub hop: usize,
    pub dft_length: usize,
}

impl StftConfig {
    pub fn new(window: WindowSpec, hop: usize, dft_length: usize) -> Result<Self> {
        let cfg = Self {
            window,
            hop,
            dft_length,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if self.hop < 1 {
            return invalid("hop must be at least 1");
        }
        if self.window.length > self.dft_length {
            return invalid(format!(
                "window length {} exceeds dft length {}",
                self.window.length, self.dft_length
            ));
        }
        Ok(())
    }

    /// Number of complete frames in a signal of `len` samples; trailing
    /// partial frames are dropped.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.window.length {
            0
        } else {
            (len - self.window.length) / self.hop + 1
        }
    }

    /// Minimum number of samples producing `frames` frames.
    pub fn samples_for_frames(&self, frames: usize) -> usize {
        if frames == 0 {
            0
        } else {
            self.window.length + (frames - 1) * self.hop
        }
    }
}

/// A planned STFT: window coefficients and FFT plan reused across frames
/// and across calls.
pub struct StftPlan<T: Real> {
    config: StftConfig,
    window: Vec<T>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> StftPlan<T> {
    pub fn new(config: StftConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            window: config.window.coefficients(),
            fft: plan_forward(config.dft_length),
            config,
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    /// Calls `visit(frame_index, bins)` for every complete frame, where
    /// `bins` holds all `dft_length` DFT bins of the windowed frame.
    pub fn for_each_frame(
        &self,
        samples: &[T],
        mut visit: impl FnMut(usize, &[Complex<T>]),
    ) -> Result<usize> {
        let n_frames = self.config.frame_count(samples.len());
        if n_frames == 0 {
            return invalid(format!(
                "signal of {} samples is shorter than one window of {}",
                samples.len(),
                self.config.window.length
            ));
        }
        let m = self.config.dft_length;
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; m];
        let mut scratch = vec![zero; self.fft.get_inplace_scratch_len()];
        for n in 0..n_frames {
            let start = n * self.config.hop;
            let frame = &samples[start..start + self.window.len()];
            for (slot, (&x, &w)) in buf.iter_mut().zip(frame.iter().zip(&self.window)) {
                *slot = Complex::new(x * w, T::zero());
            }
            for slot in &mut buf[self.window.len()..] {
                *slot = zero;
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            visit(n, &buf);
        }
        Ok(n_frames)
    }

    /// Squared magnitudes of bins `0..=M/2`, one row per frame.
    pub fn power_frames(&self, samples: &[T]) -> Result<Vec<Vec<T>>> {
        let half = self.config.dft_length / 2 + 1;
        let mut out = Vec::with_capacity(self.config.frame_count(samples.len()));
        self.for_each_frame(samples, |_, bins| {
            out.push(bins[..half].iter().map(|c| c.norm_sqr()).collect());
        })?;
        Ok(out)
    }

    /// Magnitudes of bins `0..=M/2`, one row per frame.
    pub fn magnitude_frames(&self, samples: &[T]) -> Result<Vec<Vec<T>>> {
        let half = self.config.dft_length / 2 + 1;
        let mut out = Vec::with_capacity(self.config.frame_count(samples.len()));
        self.for_each_frame(samples, |_, bins| {
            out.push(bins[..half].iter().map(|c| c.norm_sqr().sqrt()).collect());
        })?;
        Ok(out)
    }
}

/// Complex time-frequency grid produced by [`stft`].
#[derive(Debug, Clone)]
pub struct StftGrid<T> {
    /// `frames[n][mu]`: bin `mu` of frame `n`, all `dft_length` bins.
    pub frames: Vec<Vec<Complex<T>>>,
    pub window_len: usize,
    pub hop: usize,
    pub dft_length: usize,
    pub frame_rate_hz: T,
}

impl<T: Real> StftGrid<T> {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn value(&self, bin: usize, frame: usize) -> Complex<T> {
        self.frames[frame][bin]
    }
}

/// Short-time Fourier transform with frames starting at `n * hop`.
pub fn stft<T: Real>(
    signal: &Signal<T>,
    window: WindowSpec,
    hop: usize,
    dft_length: usize,
) -> Result<StftGrid<T>> {
    let plan = StftPlan::new(StftConfig::new(window, hop, dft_length)?)?;
    let mut frames = Vec::with_capacity(plan.config.frame_count(signal.len()));
    plan.for_each_frame(signal.samples(), |_, bins| frames.push(bins.to_vec()))?;
    Ok(StftGrid {
        frames,
        window_len: window.length,
        hop,
        dft_length,
        frame_rate_hz: signal.sample_rate_hz() / T::of_usize(hop),
    })
}

/// Magnitude of the analytic signal `x + j H{x}`, built in the frequency
/// domain over the whole signal: negative frequencies zeroed, positive
/// frequencies doubled, DC and Nyquist kept.
pub fn analytic_envelope<T: Real>(signal: &Signal<T>) -> Result<Vec<T>> {
    let n = signal.len();
    if n < 4 {
        return invalid(format!("envelope needs at least 4 samples, got {n}"));
    }
    let mut bins = dft(signal.samples(), n)?;
    let two = T::of(2.0);
    let half = n / 2;
    for (mu, b) in bins.iter_mut().enumerate() {
        if mu == 0 || (n % 2 == 0 && mu == half) {
            continue;
        }
        if mu < n.div_ceil(2) {
            *b = b.scale(two);
        } else {
            *b = Complex::new(T::zero(), T::zero());
        }
    }
    Ok(idft(&bins)?.into_iter().map(|c| c.norm_sqr().sqrt()).collect())
}

/// Type-II DCT with one-based output indexing:
/// `out[mu-1] = sum_{i=1}^{K} v[i] cos(pi (2i-1) mu / (2K))` for `mu = 1..=K`.
///
/// The `mu = 0` term (the plain sum) is not produced and the `mu = K` term is
/// identically zero.
pub fn dct_ii<T: Real>(values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return invalid("dct of an empty sequence");
    }
    let k = values.len();
    let denom = T::of_usize(2 * k);
    Ok((1..=k)
        .map(|mu| {
            values
                .iter()
                .enumerate()
                .map(|(i0, &v)| {
                    let odd = T::of_usize(2 * i0 + 1);
                    v * (T::PI() * odd * T::of_usize(mu) / denom).cos()
                })
                .sum()
        })
        .collect())
}

/// Precomputed cosine table for repeated [`dct_ii`] calls of one length.
#[derive(Debug, Clone)]
pub struct DctTable<T> {
    size: usize,
    // row mu-1, column i-1
    table: Vec<T>,
}

impl<T: Real> DctTable<T> {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return invalid("dct table of size 0");
        }
        let denom = T::of_usize(2 * size);
        let mut table = Vec::with_capacity(size * size);
        for mu in 1..=size {
            for i0 in 0..size {
                let odd = T::of_usize(2 * i0 + 1);
                table.push((T::PI() * odd * T::of_usize(mu) / denom).cos());
            }
        }
        Ok(Self { size, table })
    }

    /// First `n_out` coefficients (`mu = 1..=n_out`).
    pub fn apply(&self, values: &[T], n_out: usize) -> Result<Vec<T>> {
        if values.len() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                got: values.len(),
            });
        }
        Ok(self
            .table
            .chunks_exact(self.size)
            .take(n_out)
            .map(|row| row.iter().zip(values).map(|(&c, &v)| c * v).sum())
            .collect())
    }
}

pub fn next_power_of_two(n: usize) -> usize {
    n.max(1).next_power_of_two()
}
