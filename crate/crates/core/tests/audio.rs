use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use railvib::features::ams::{ams, ams_scalar, AmsMatrix, AmsSettings};
use railvib::features::mfcc::{cepstrum_from_energies, mfcc, MfccSettings};
use railvib::signal::StftPlan;
use railvib::Signal64;

const FS: f64 = 51_200.0;

fn am_tone(carrier: f64, rate: f64, depth: f64, secs: f64) -> Signal64 {
    let n = (secs * FS) as usize;
    let x = (0..n)
        .map(|k| {
            let t = k as f64 / FS;
            (1.0 + depth * (TAU * rate * t).sin()) * (TAU * carrier * t).sin()
        })
        .collect();
    Signal64::new(x, FS).unwrap()
}

fn white_noise(seed: u64, secs: f64) -> Signal64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = (0..(secs * FS) as usize).map(|_| rng.sample(StandardNormal)).collect();
    Signal64::new(x, FS).unwrap()
}

fn matrix(s: &Signal64) -> AmsMatrix<f64> {
    ams(s, &AmsSettings::default().resolve(FS).unwrap()).unwrap()
}

// the Hann main lobe of the 128-frame window spans four 256-point bins
const FIRST_OFF_DC_BIN: usize = 4;

#[test]
fn am_tone_peaks_at_its_modulation_rate() {
    let m = matrix(&am_tone(21_000.0, 50.0, 0.8, 2.0));
    let row = &m.values[m.nearest_subband(21_000.0)];
    let peak = (FIRST_OFF_DC_BIN..m.n_mod_bins()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
    let expected = 50.0 / m.mod_bin_spacing_hz();
    assert!((peak as f64 - expected).abs() <= 1.0, "peak bin {peak}, expected {expected:.2}");
}

#[test]
fn plain_tone_has_no_off_dc_modulation() {
    let m = matrix(&am_tone(21_000.0, 50.0, 0.0, 2.0));
    let row = &m.values[m.nearest_subband(21_000.0)];
    let dc = (2.0 * row[0]).exp();
    let off: f64 = row[FIRST_OFF_DC_BIN..].iter().map(|v| (2.0 * v).exp()).sum();
    let db = 10.0 * (off / dc).log10();
    assert!(db <= -30.0, "off-DC energy at {db:.1} dB");
}

#[test]
fn modulation_axis_spacing() {
    let m = matrix(&white_noise(1, 1.0));
    let frame_rate = FS / 205.0;
    assert!((m.mod_bin_spacing_hz() - frame_rate / 256.0).abs() < 1e-12);
    assert_eq!(m.n_subbands(), 1025);
    assert!(m.values.iter().flatten().all(|v| v.is_finite()));
}

#[test]
fn hop_shift_barely_changes_ams() {
    let s = am_tone(21_000.0, 37.0, 0.5, 2.2);
    let a = matrix(&s.slice(0, 2 * FS as usize).unwrap());
    let b = matrix(&s.slice(205, 2 * FS as usize).unwrap());
    let (mut diff, mut norm) = (0.0, 0.0);
    for (ra, rb) in a.values.iter().zip(&b.values) {
        for (x, y) in ra.iter().zip(rb) {
            diff += (x - y).powi(2);
            norm += x * x;
        }
    }
    let rel = (diff / norm).sqrt();
    assert!(rel < 0.01, "relative change {rel}");
}

#[test]
fn scalar_grows_with_high_band_modulation() {
    let settings = AmsSettings::default();
    let cfg = settings.resolve(FS).unwrap();
    let scalar = |s: &Signal64| ams_scalar(&ams(s, &cfg).unwrap(), settings.min_center_hz, settings.max_mod_hz).unwrap();
    let noise = white_noise(2, 2.0);
    let tone = am_tone(22_000.0, 30.0, 0.9, 2.0);
    let mixed = Signal64::new(
        noise.samples().iter().zip(tone.samples()).map(|(a, b)| 0.1 * a + b).collect(),
        FS,
    )
    .unwrap();
    let quiet = noise.scaled(0.1).unwrap();
    assert!(scalar(&mixed) > scalar(&quiet));
}

#[test]
fn mfcc_is_level_invariant_and_deterministic() {
    let (bank, cfg) = MfccSettings::default().resolve::<f64>(FS).unwrap();
    let s = am_tone(3000.0, 20.0, 0.5, 0.5);
    let noise = white_noise(3, 0.5);
    let s = Signal64::new(s.samples().iter().zip(noise.samples()).map(|(a, b)| a + 0.1 * b).collect(), FS).unwrap();
    let a = mfcc(&s, &bank, &cfg).unwrap();
    let b = mfcc(&s.scaled(7.5).unwrap(), &bank, &cfg).unwrap();
    for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
    assert_eq!(mfcc(&s, &bank, &cfg).unwrap(), a);
}

#[test]
fn white_noise_cepstrum_is_flat_per_filter_area() {
    // unit-peak triangles widen with frequency, so raw noise energies rise
    // with the filter index; dividing by each filter's area flattens them
    let (bank, cfg) = MfccSettings::default().resolve::<f64>(FS).unwrap();
    let areas: Vec<f64> = bank.weights().iter().map(|row| row.iter().sum()).collect();
    let frames = StftPlan::new(cfg.frame).unwrap().power_frames(white_noise(4, 2.0).samples()).unwrap();
    // averaging energies before the log avoids the downward bias of the log
    // of a few-bin estimate
    let mut mean = vec![0.0; bank.n_filters()];
    for p in &frames {
        for ((m, e), a) in mean.iter_mut().zip(bank.energies(p).unwrap()).zip(&areas) {
            *m += e / a / frames.len() as f64;
        }
    }
    let c = cepstrum_from_energies(&mean, 13).unwrap();
    assert!(c.iter().all(|v| v.abs() < 0.5), "{c:?}");

    let raw = mfcc(&white_noise(4, 2.0), &bank, &cfg).unwrap().coefficients;
    assert!(raw[0] < -5.0, "c1 {}", raw[0]);
}
