//! Direct-sum reference implementations, written from the textbook
//! definitions without touching the library's DSP code.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;

pub type Cx = (f64, f64);

pub fn abs(c: Cx) -> f64 {
    c.0.hypot(c.1)
}

fn twiddles(m: usize, sign: f64) -> Vec<Cx> {
    (0..m)
        .map(|k| {
            let a = sign * TAU * k as f64 / m as f64;
            (a.cos(), a.sin())
        })
        .collect()
}

/// `X[mu] = sum_k x[k] exp(-j 2 pi k mu / m)`, zero-padding `x` to `m`.
pub fn dft(x: &[f64], m: usize) -> Vec<Cx> {
    let w = twiddles(m, -1.0);
    (0..m)
        .map(|mu| {
            let (mut re, mut im) = (0.0, 0.0);
            let mut idx = 0;
            for &v in x {
                re += v * w[idx].0;
                im += v * w[idx].1;
                idx += mu;
                if idx >= m {
                    idx -= m;
                }
            }
            (re, im)
        })
        .collect()
}

/// `x[k] = 1/m sum_mu X[mu] exp(+j 2 pi k mu / m)`.
pub fn idft(bins: &[Cx]) -> Vec<Cx> {
    let m = bins.len();
    let w = twiddles(m, 1.0);
    (0..m)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            let mut idx = 0;
            for &(a, b) in bins {
                let (c, s) = w[idx];
                re += a * c - b * s;
                im += a * s + b * c;
                idx += k;
                if idx >= m {
                    idx -= m;
                }
            }
            (re / m as f64, im / m as f64)
        })
        .collect()
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|k| 0.5 - 0.5 * (TAU * k as f64 / n as f64).cos()).collect()
}

/// average, variance, rms, kurtosis, skewness, range, peak-to-rms.
pub fn time_features(x: &[f64]) -> [f64; 7] {
    let k = x.len() as f64;
    let mean = x.iter().sum::<f64>() / k;
    let moment = |p: i32| x.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / (k - 1.0);
    let var = moment(2);
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / (k - 1.0)).sqrt();
    let max = x.iter().cloned().fold(f64::MIN, f64::max);
    let min = x.iter().cloned().fold(f64::MAX, f64::min);
    [mean, var, rms, moment(4) / (var * var), moment(3) / var.powf(1.5), max - min, max / rms]
}

/// centroid, spread, kurtosis, entropy, crest, roll-off of the Hann-windowed
/// one-sided segment spectrum.
pub fn spectral_features(x: &[f64], fs: f64, kappa: f64) -> [f64; 6] {
    let n = x.len();
    let w = hann(n);
    let xw: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a * b).collect();
    let mags: Vec<f64> = dft(&xw, n)[..n / 2 + 1].iter().map(|&c| abs(c)).collect();
    let f: Vec<f64> = (0..mags.len()).map(|mu| mu as f64 * fs / n as f64).collect();
    let total: f64 = mags.iter().sum();
    let centroid = f.iter().zip(&mags).map(|(f, m)| f * m).sum::<f64>() / total;
    let spread = (f.iter().zip(&mags).map(|(f, m)| (f - centroid).powi(2) * m).sum::<f64>() / total).sqrt();
    let kurt = f.iter().zip(&mags).map(|(f, m)| (f - centroid).powi(4) * m).sum::<f64>() / total / spread.powi(4);
    let mu2 = mags.len() - 1;
    let entropy = -mags
        .iter()
        .map(|m| m / total)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
        / (mu2 as f64).ln();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    let crest = max / (total / mags.len() as f64);
    let mut acc = 0.0;
    let mut roll = mu2;
    for (i, m) in mags.iter().enumerate() {
        acc += m;
        if acc >= kappa * total {
            roll = i;
            break;
        }
    }
    [centroid, spread, kurt, entropy, crest, f[roll]]
}

/// BPFO, BPFI, cage and rolling-element frequencies.
pub fn fault_frequencies(n: usize, d: f64, pitch: f64, phi: f64, fr: f64) -> [f64; 4] {
    let r = d / pitch * phi.cos();
    let n = n as f64;
    [
        n / 2.0 * fr * (1.0 - r),
        n / 2.0 * fr * (1.0 + r),
        fr / 2.0 * (1.0 - r),
        pitch / (2.0 * d) * fr * (1.0 - r * r),
    ]
}

/// Nearest bin with exact midpoints resolved downwards.
pub fn nearest(f: f64, df: f64) -> usize {
    let r = f / df;
    let lo = r.floor();
    if r - lo > 0.5 {
        lo as usize + 1
    } else {
        lo as usize
    }
}

/// Envelope spectrum magnitude summed over harmonics 1..=3 of each frequency.
pub fn envelope_amplitudes(x: &[f64], fs: f64, faults: [f64; 4]) -> [f64; 4] {
    let n = x.len();
    let spec = dft(x, n);
    let analytic: Vec<Cx> = spec
        .iter()
        .enumerate()
        .map(|(mu, &(a, b))| {
            let h = if mu == 0 || (n % 2 == 0 && mu == n / 2) {
                1.0
            } else if mu < (n + 1) / 2 {
                2.0
            } else {
                0.0
            };
            (h * a, h * b)
        })
        .collect();
    let mut env: Vec<f64> = idft(&analytic).into_iter().map(abs).collect();
    let mean = env.iter().sum::<f64>() / n as f64;
    env.iter_mut().for_each(|v| *v -= mean);
    let mags: Vec<f64> = dft(&env, n)[..n / 2 + 1].iter().map(|&c| abs(c)).collect();
    let df = fs / n as f64;
    faults.map(|f| (1..=3).map(|h| mags[nearest(h as f64 * f, df)]).sum())
}

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

pub struct MfccParams {
    pub n_filters: usize,
    pub n_kept: usize,
    pub window: usize,
    pub hop: usize,
    pub nfft: usize,
}

/// Triangle weight of filter `i` at `f` for Mel-spaced edges up to `fs/2`.
pub fn triangle(i: usize, f: f64, n_filters: usize, fs: f64) -> f64 {
    let top = hz_to_mel(fs / 2.0);
    let edge = |j: usize| mel_to_hz(top * j as f64 / (n_filters + 1) as f64);
    let (lo, mid, hi) = (edge(i), edge(i + 1), edge(i + 2));
    if f <= lo || f >= hi {
        0.0
    } else if f <= mid {
        (f - lo) / (mid - lo)
    } else {
        (hi - f) / (hi - mid)
    }
}

/// Cepstrum `c[1..=n_kept]` of log energies: `sum_i L_i cos(pi (2i-1) mu / 2N)`.
pub fn dct(logs: &[f64], n_kept: usize) -> Vec<f64> {
    let n = logs.len() as f64;
    (1..=n_kept)
        .map(|mu| {
            logs.iter()
                .enumerate()
                .map(|(i0, l)| l * (PI * (2 * i0 + 1) as f64 * mu as f64 / (2.0 * n)).cos())
                .sum()
        })
        .collect()
}

/// Per-frame cepstra of `x`.
pub fn frame_cepstra(x: &[f64], fs: f64, p: &MfccParams) -> Vec<Vec<f64>> {
    let w = hann(p.window);
    let half = p.nfft / 2 + 1;
    let weights: Vec<Vec<f64>> = (0..p.n_filters)
        .map(|i| (0..half).map(|nu| triangle(i, nu as f64 * fs / p.nfft as f64, p.n_filters, fs)).collect())
        .collect();
    let frames = (x.len() - p.window) / p.hop + 1;
    (0..frames)
        .map(|f| {
            let start = f * p.hop;
            let seg: Vec<f64> = x[start..start + p.window].iter().zip(&w).map(|(a, b)| a * b).collect();
            let power: Vec<f64> = dft(&seg, p.nfft)[..half].iter().map(|&c| abs(c).powi(2)).collect();
            let logs: Vec<f64> = weights
                .iter()
                .map(|g| g.iter().zip(&power).map(|(a, b)| a * b).sum::<f64>().max(1e-12).ln())
                .collect();
            dct(&logs, p.n_kept)
        })
        .collect()
}

/// Frame-averaged cepstrum.
pub fn mfcc(x: &[f64], fs: f64, p: &MfccParams) -> Vec<f64> {
    let frames = frame_cepstra(x, fs, p);
    let n = frames.len() as f64;
    (0..p.n_kept).map(|j| frames.iter().map(|c| c[j]).sum::<f64>() / n).collect()
}

/// Noise with an offset, a few tones and an amplitude-modulated burst
/// component, all with random parameters.
pub fn random_segment(rng: &mut impl Rng, n: usize, fs: f64) -> Vec<f64> {
    let sigma = rng.random_range(0.05..1.0);
    let offset = rng.random_range(-0.3..0.3);
    let tones: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.random_range(0.05..1.0), rng.random_range(5.0..0.45 * fs), rng.random_range(0.0..TAU)))
        .collect();
    let carrier = rng.random_range(0.1 * fs..0.4 * fs);
    let rate = rng.random_range(5.0..80.0);
    let depth = rng.random_range(0.0..1.0);
    (0..n)
        .map(|k| {
            let t = k as f64 / fs;
            let noise: f64 = rng.sample(StandardNormal);
            let tonal: f64 = tones.iter().map(|(a, f, p)| a * (TAU * f * t + p).sin()).sum();
            let am = (1.0 + depth * (TAU * rate * t).sin()) * (TAU * carrier * t).sin();
            offset + sigma * noise + tonal + 0.5 * am
        })
        .collect()
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
