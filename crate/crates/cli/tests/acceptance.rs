//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS or FAIL line, even when others fail.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::TAU;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use railvib::features::ams::{ams, ams_scalar, AmsSettings};
use railvib::features::mfcc::cepstrum_from_energies;
use railvib::metrics::{confusion, report, Label};
use railvib::ocsvm::{solve_nu_dual, train, KernelKind, KernelMatrix, OcSvmHyperParams, OcSvmModel, SolverOptions, TrainOptions};
use railvib::pipeline::{
    corpus_features, feature_names, run_experiment, ClassSpec, CorpusSpec, ExperimentConfig, FeatureConfig,
    FeatureExtractor, FeatureSetId, FeatureTable,
};
use railvib::signal::dft;
use railvib::synth::{generate, FaultKind, FaultSpec, OperatingPoint, TorqueLevel, SPEED_LEVELS_RPM};
use railvib::Signal64;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

fn dsp_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst, mut worst_parseval) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(16..=1024);
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let fast = dft(&x, n).map_err(|e| e.to_string())?;
        for (a, b) in fast.iter().zip(common::dft(&x, n)) {
            worst = worst.max((a.re - b.0).hypot(a.im - b.1));
        }
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = fast.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
        worst_parseval = worst_parseval.max((time - freq).abs() / time);
    }
    ensure(worst < 1e-9, || format!("max DFT error {worst:e}"))?;
    ensure(worst_parseval < 1e-9, || format!("Parseval relative error {worst_parseval:e}"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("max error {worst:.1e}, Parseval {worst_parseval:.1e}"))
}

fn feature_oracle() -> Outcome {
    const FS: f64 = 4096.0;
    let start = Instant::now();
    let cfg = FeatureConfig::default();
    let g = &cfg.geometry;
    let ex = FeatureExtractor::<f64>::new(&cfg, FS).map_err(|e| e.to_string())?;
    let mfcc = common::MfccParams { n_filters: 26, n_kept: 13, window: 102, hop: 16, nfft: 128 };
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let x = common::random_segment(&mut rng, 2 * FS as usize, FS);
        let fr = SPEED_LEVELS_RPM[i % SPEED_LEVELS_RPM.len()] / 60.0;
        let s = Signal64::new(x.clone(), FS).unwrap();
        let faults = common::fault_frequencies(g.n_rolling_elements, g.ball_diameter_mm, g.pitch_diameter_mm, g.contact_angle_rad, fr);
        let cases: [(FeatureSetId, Vec<f64>); 4] = [
            (FeatureSetId::Td, common::time_features(&x).to_vec()),
            (FeatureSetId::Sd, common::spectral_features(&x, FS, cfg.spectral.kappa).to_vec()),
            (FeatureSetId::EnvAmp, common::envelope_amplitudes(&x, FS, faults).to_vec()),
            (FeatureSetId::Mfcc, common::mfcc(&x, FS, &mfcc)),
        ];
        for (set, want) in cases {
            let got = ex.extract_set(set, &s, fr).map_err(|e| e.to_string())?;
            ensure(got.len() == want.len(), || format!("{set}: {} values, oracle {}", got.len(), want.len()))?;
            for (j, (a, b)) in got.iter().zip(&want).enumerate() {
                let err = (a - b).abs() / b.abs().max(1.0);
                worst = worst.max(err);
                ensure(err <= 1e-9, || format!("{set} segment {i} value {j}: {a} vs oracle {b}"))?;
            }
        }
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!("TD, SD, ENV_AMP, MFCC on 20 segments, max error {worst:.1e}"))
}

fn mfcc_identity() -> Outcome {
    let mut worst = 0.0f64;
    for level in [1e-9, 1e-3, 1.0, 42.0, 1e6] {
        for n_filters in [13, 26, 40] {
            let c = cepstrum_from_energies(&vec![level; n_filters], 13).map_err(|e| e.to_string())?;
            worst = c.iter().fold(worst, |w, v: &f64| w.max(v.abs()));
        }
    }
    ensure(worst <= 1e-9, || format!("max |c| {worst:e}"))?;
    Ok(format!("max |c| {worst:.1e}"))
}

fn ams_localization() -> Outcome {
    const FS: f64 = 51_200.0;
    let tone = |depth: f64| {
        let x = (0..2 * FS as usize)
            .map(|k| {
                let t = k as f64 / FS;
                (1.0 + depth * (TAU * 50.0 * t).sin()) * (TAU * 21_000.0 * t).sin()
            })
            .collect();
        Signal64::new(x, FS).unwrap()
    };
    let cfg = AmsSettings::default().resolve(FS).map_err(|e| e.to_string())?;
    let first_off_dc = 4;

    let m = ams(&tone(0.8), &cfg).map_err(|e| e.to_string())?;
    let row = &m.values[m.nearest_subband(21_000.0)];
    let peak = (first_off_dc..m.n_mod_bins()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
    let expected = 50.0 / m.mod_bin_spacing_hz();
    ensure((peak as f64 - expected).abs() <= 1.0, || format!("peak bin {peak}, 50 Hz is bin {expected:.2}"))?;

    let m = ams(&tone(0.0), &cfg).map_err(|e| e.to_string())?;
    let row = &m.values[m.nearest_subband(21_000.0)];
    let dc = (2.0 * row[0]).exp();
    let off: f64 = row[first_off_dc..].iter().map(|v| (2.0 * v).exp()).sum();
    let db = 10.0 * (off / dc).log10();
    ensure(db <= -30.0, || format!("unmodulated off-DC energy {db:.1} dB"))?;
    Ok(format!("peak bin {peak} (50 Hz = {expected:.2}), unmodulated off-DC {db:.1} dB"))
}

fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..2).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

/// Exact minimiser of the small dual by enumerating which coefficients sit
/// at 0, at the upper bound, or strictly between.
fn brute_force_dual(q: &[Vec<f64>], upper: f64) -> Option<Vec<f64>> {
    let n = q.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut state = vec![0u8; n];
    for _ in 0..3usize.pow(n as u32) {
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let fixed = state.iter().filter(|&&s| s == 1).count() as f64 * upper;
        let mut a: Vec<f64> = state.iter().map(|&s| if s == 1 { upper } else { 0.0 }).collect();
        let feasible = if free.is_empty() {
            (fixed - 1.0).abs() < 1e-12
        } else if fixed < 1.0 {
            let k = free.len();
            let mut m = vec![vec![0.0; k + 2]; k + 1];
            for (r, &i) in free.iter().enumerate() {
                for (c, &j) in free.iter().enumerate() {
                    m[r][c] = q[i][j];
                }
                m[r][k] = -1.0;
                m[k][r] = 1.0;
                m[r][k + 1] = -(0..n).filter(|&j| state[j] == 1).map(|j| q[i][j] * upper).sum::<f64>();
            }
            m[k][k + 1] = 1.0 - fixed;
            match gauss(m) {
                Some(z) if z[..k].iter().all(|&v| (-1e-12..=upper + 1e-12).contains(&v)) => {
                    for (r, &i) in free.iter().enumerate() {
                        a[i] = z[r];
                    }
                    true
                }
                _ => false,
            }
        } else {
            false
        };
        if feasible {
            let obj: f64 = (0..n).map(|i| (0..n).map(|j| a[i] * q[i][j] * a[j]).sum::<f64>()).sum();
            if best.as_ref().is_none_or(|b| obj < b.0) {
                best = Some((obj, a));
            }
        }
        for s in state.iter_mut() {
            *s += 1;
            if *s < 3 {
                break;
            }
            *s = 0;
        }
    }
    best.map(|b| b.1)
}

/// Solves an augmented system `[A | b]` by Gaussian elimination.
fn gauss(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[p][c].abs() < 1e-14 {
            return None;
        }
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut z = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * z[k]).sum();
        z[r] = (m[r][n] - s) / m[r][r];
    }
    Some(z)
}

fn nu_property() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let rows = gaussian_rows(&mut rng, 500);
    let mut notes = Vec::new();
    for nu in [0.05, 0.1, 0.2] {
        let model = train(&rows, &OcSvmHyperParams { nu, gamma: 0.5 }, &TrainOptions::default()).map_err(|e| e.to_string())?;
        let scores = model.score_all(&rows).map_err(|e| e.to_string())?;
        let outliers = scores.iter().filter(|s| !s.is_inlier).count() as f64 / 500.0;
        let sv = model.n_support() as f64 / 500.0;
        ensure(outliers <= nu + 0.02, || format!("nu={nu}: outlier fraction {outliers}"))?;
        ensure(sv >= nu - 0.02, || format!("nu={nu}: support-vector fraction {sv}"))?;
        notes.push(format!("nu={nu}: out {outliers:.3} sv {sv:.3}"));
    }
    let mut worst = 0.0f64;
    for (n, nu) in [(6, 0.5), (9, 0.3), (12, 0.2), (12, 0.5)] {
        let pts = gaussian_rows(&mut rng, n);
        let km = KernelMatrix::new(&pts, KernelKind::Gaussian, 0.5);
        let q: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| pts.iter().map(|b| (-0.5 * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))).exp()).collect())
            .collect();
        let sol = solve_nu_dual(&km, nu, &SolverOptions::default()).map_err(|e| e.to_string())?;
        let want = brute_force_dual(&q, 1.0 / (nu * n as f64)).ok_or("brute force found no feasible point")?;
        for (a, b) in sol.alpha.iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-4, || format!("dual coefficients differ from brute force by {worst:e}"))?;
    within(start.elapsed(), 30.0)?;
    Ok(format!("{}; brute-force dual max diff {worst:.1e}", notes.join(", ")))
}

fn benchmark() -> Outcome {
    let start = Instant::now();
    let cfg = FeatureConfig::default();
    let spec = CorpusSpec::default();
    let table = corpus_features(&spec, &cfg, &FeatureSetId::ALL).map_err(|e| e.to_string())?;
    let exp = ExperimentConfig::default();
    let labels = table.labels();
    let mut ba = Vec::new();
    for with_fr in [false, true] {
        for set in FeatureSetId::ALL {
            let rows = table.select(&feature_names(set, &cfg, with_fr)).map_err(|e| e.to_string())?;
            let out = run_experiment(&exp, &rows, &labels).map_err(|e| e.to_string())?;
            ba.push((set, with_fr, out.mean.ba));
        }
    }
    let summary = ba
        .iter()
        .map(|(s, fr, b)| format!("{s}{} {:.4}", if *fr { "+f_r" } else { "" }, b))
        .collect::<Vec<_>>()
        .join(", ");
    let mfcc_fr = ba.iter().find(|(s, fr, _)| *s == FeatureSetId::Mfcc && *fr).unwrap().2;
    ensure(mfcc_fr >= 0.95, || format!("MFCC+f_r mean BA {mfcc_fr:.4} < 0.95 ({summary})"))?;
    for with_fr in [false, true] {
        let mfcc = ba.iter().find(|(s, fr, _)| *s == FeatureSetId::Mfcc && *fr == with_fr).unwrap().2;
        for (s, _, b) in ba.iter().filter(|(s, fr, _)| *fr == with_fr && *s != FeatureSetId::Mfcc) {
            ensure(mfcc >= *b, || format!("{s} beats MFCC with_fr={with_fr}: {b:.4} vs {mfcc:.4} ({summary})"))?;
        }
    }
    within(start.elapsed(), 600.0)?;
    Ok(format!("{} segments, {:.0} s: {summary}", table.rows.len(), start.elapsed().as_secs_f64()))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn ams_separation() -> Outcome {
    let settings = AmsSettings::default();
    let cfg = settings.resolve(51_200.0).map_err(|e| e.to_string())?;
    let g = FeatureConfig::default().geometry;
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut scalars = |fault: &dyn Fn(&mut ChaCha8Rng) -> FaultSpec| -> Result<Vec<f64>, String> {
        let mut out = Vec::new();
        for torque in TorqueLevel::ALL {
            for _ in 0..4 {
                let op = OperatingPoint { rotational_speed_rpm: 500.0, torque_level: torque, duration_s: 2.0 };
                let f = fault(&mut rng);
                let s = generate(&op, &f, &g, rng.random()).map_err(|e| e.to_string())?;
                let m = ams(&s, &cfg).map_err(|e| e.to_string())?;
                out.push(ams_scalar(&m, settings.min_center_hz, settings.max_mod_hz).map_err(|e| e.to_string())?);
            }
        }
        Ok(out)
    };
    let healthy = median(scalars(&|_| FaultSpec::healthy())?);
    let faulty = median(scalars(&|r| FaultSpec::new(FaultKind::OuterRace, r.random_range(0.3..1.0)).unwrap())?);
    ensure(faulty >= 2.0 * healthy, || format!("outer race median {faulty:.4e} vs healthy {healthy:.4e}"))?;
    Ok(format!("outer race / healthy median ratio {:.2}", faulty / healthy))
}

fn metrics_regression() -> Outcome {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/reported_results.csv");
    let mut reader = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let mut rows = 0;
    let mut worst = 0.0f64;
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let (tpr, tnr, ba): (f64, f64, f64) = (rec[2].parse().unwrap(), rec[3].parse().unwrap(), rec[4].parse().unwrap());
        // 10 000 labels per class realise percentages with two decimals
        let (tp, tn) = ((tpr * 100.0).round() as usize, (tnr * 100.0).round() as usize);
        let mut truth = vec![Label::Healthy; 10_000];
        truth.extend(vec![Label::Damaged; 10_000]);
        let mut pred = vec![Label::Healthy; tp];
        pred.extend(vec![Label::Damaged; 10_000 - tp + tn]);
        pred.extend(vec![Label::Healthy; 10_000 - tn]);
        let r = report(&confusion(&truth, &pred).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let diff = (100.0 * r.ba - ba).abs();
        worst = worst.max(diff);
        ensure(diff <= 0.01 + 1e-9, || format!("{} {}: BA {:.4} vs reported {ba}", &rec[0], &rec[1], 100.0 * r.ba))?;
        rows += 1;
    }
    ensure(rows == 20, || format!("{rows} fixture rows"))?;
    Ok(format!("{rows} rows, max BA difference {worst:.4} pp"))
}

const SMALL_CONFIG: &str = r#"
[experiment]
repetitions = 2
train_size = 40
eval_size = 10
seed = 9
sweep_counts = [1, 5, 13]

[data.synthetic]
seed = 4
segment_s = 1.0
classes = [{ kind = "none", segments = 60 }, { kind = "outer_race", segments = 20 }, { kind = "distributed", segments = 20 }]
"#;

fn railvib(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_railvib"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("railvib {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn run_all_commands(dir: &Path) -> Result<(), String> {
    std::fs::write(dir.join("cfg.toml"), SMALL_CONFIG).map_err(|e| e.to_string())?;
    let steps: &[&[&str]] = &[
        &["synth", "-c", "cfg.toml", "-o", "rec", "--format", "csv", "--seed", "3", "--kinds", "none,outer_race", "--torques", "0", "--speeds", "500,1500", "--hold-s", "4", "--ramp-s", "1"],
        &["extract", "-c", "cfg.toml", "-o", "rec_features.csv", "--manifest", "rec/manifest.csv", "--sets", "TD,AMS", "--ams-dir", "ams"],
        &["extract", "-c", "cfg.toml", "-o", "features.csv", "--synthetic"],
        &["gridsearch", "-c", "cfg.toml", "-f", "features.csv", "--set", "MFCC", "--with-fr", "-o", "grid.csv"],
        &["train", "-c", "cfg.toml", "-f", "features.csv", "--set", "MFCC", "--with-fr", "-o", "model.json"],
        &["classify", "-m", "model.json", "-f", "features.csv", "-o", "scores.csv"],
        &["evaluate", "-s", "scores.csv", "-o", "report.csv"],
        &["sweep", "-c", "cfg.toml", "-f", "features.csv", "--with-fr", "-o", "sweep.csv"],
        &["run", "-c", "cfg.toml", "-o", "run", "--sweep"],
    ];
    for args in steps {
        railvib(dir, args)?;
    }
    Ok(())
}

fn files(root: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_all_commands(a.path())?;
    run_all_commands(b.path())?;
    let (fa, fb) = (files(a.path()), files(b.path()));
    ensure(fa == fb, || format!("different file sets: {fa:?} vs {fb:?}"))?;
    let mut csvs = 0;
    for f in &fa {
        let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        ensure(x == y, || format!("{} differs between runs", f.display()))?;
        csvs += usize::from(f.extension().is_some_and(|e| e == "csv"));
    }
    Ok(format!("{} files ({csvs} CSV) identical across two runs of every command", fa.len()))
}

fn model_round_trip() -> Outcome {
    let cfg = FeatureConfig::default();
    let spec = CorpusSpec {
        classes: vec![
            ClassSpec { kind: FaultKind::None, segments: 80 },
            ClassSpec { kind: FaultKind::OuterRace, segments: 40 },
        ],
        segment_s: 1.0,
        seed: 11,
        ..Default::default()
    };
    let table: FeatureTable = corpus_features(&spec, &cfg, &[FeatureSetId::Mfcc]).map_err(|e| e.to_string())?;
    let rows = table.select(&feature_names(FeatureSetId::Mfcc, &cfg, true)).map_err(|e| e.to_string())?;
    let labels = table.labels();
    let train_rows: Vec<Vec<f64>> = rows.iter().zip(&labels).filter(|(_, l)| **l == Label::Healthy).take(50).map(|(r, _)| r.clone()).collect();
    let model = train(&train_rows, &OcSvmHyperParams { nu: 0.1, gamma: 0.05 }, &TrainOptions::default()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.json");
    model.save(&path).map_err(|e| e.to_string())?;
    let back = OcSvmModel::<f64>::load(&path).map_err(|e| e.to_string())?;
    let test = &rows[50..];
    let mut worst = 0.0f64;
    for (a, b) in model.score_all(test).unwrap().iter().zip(back.score_all(test).unwrap()) {
        worst = worst.max((a.value - b.value).abs());
        ensure(a.is_inlier == b.is_inlier, || "decision changed after reload".into())?;
    }
    ensure(worst <= 1e-12, || format!("scores differ by {worst:e}"))?;
    Ok(format!("{} test scores, max difference {worst:e}", test.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("DSP oracle equivalence", dsp_oracle),
        ("feature oracle equivalence", feature_oracle),
        ("MFCC identity", mfcc_identity),
        ("AMS modulation localization", ams_localization),
        ("One-Class SVM nu-property and dual oracle", nu_property),
        ("end-to-end synthetic benchmark", benchmark),
        ("AMS scalar separation at 500 rpm", ams_separation),
        ("metrics regression", metrics_regression),
        ("CLI determinism", determinism),
        ("model persistence round trip", model_round_trip),
    ];
    let only: Vec<usize> = std::env::var("ACCEPTANCE_ONLY")
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        match check() {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
