//! Evaluation protocol: repeated random healthy-only training/evaluation
//! draws, grid search, training and scoring of everything else.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{invalid, Error, Result};
use crate::metrics::{confusion, report, ConfusionMatrix, EvalReport, Label};
use crate::ocsvm::{grid_search, train, GridSearchOutcome, OcSvmHyperParams};
use crate::scalar::Real;

/// Indices drawn for one repetition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub eval: Vec<usize>,
    pub test: Vec<usize>,
}

/// Draws training and evaluation indices from the healthy rows only; the
/// test set is every remaining row.
pub fn draw_split(labels: &[Label], train_size: usize, eval_size: usize, rng: &mut ChaCha8Rng) -> Result<Split> {
    let healthy: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == Label::Healthy).collect();
    check_pool(healthy.len(), train_size, eval_size)?;
    let picked = sample(rng, healthy.len(), train_size + eval_size).into_vec();
    let train: Vec<usize> = picked[..train_size].iter().map(|&p| healthy[p]).collect();
    let eval: Vec<usize> = picked[train_size..].iter().map(|&p| healthy[p]).collect();
    let mut used = vec![false; labels.len()];
    for &i in train.iter().chain(&eval) {
        used[i] = true;
    }
    let test = (0..labels.len()).filter(|&i| !used[i]).collect();
    Ok(Split { train, eval, test })
}

fn check_pool(healthy: usize, train_size: usize, eval_size: usize) -> Result<()> {
    if healthy < train_size + eval_size {
        return Err(Error::InsufficientData(format!(
            "healthy pool of {healthy} is smaller than train ({train_size}) + eval ({eval_size})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub params: OcSvmHyperParams,
    pub confusion: ConfusionMatrix,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub mean: EvalReport,
    pub repetitions: Vec<RepetitionResult>,
}

fn rows_of<T: Clone>(rows: &[Vec<T>], idx: &[usize]) -> Vec<Vec<T>> {
    idx.iter().map(|&i| rows[i].clone()).collect()
}

/// Split of repetition `rep`, drawn from stream `rep` of a generator seeded
/// with `cfg.seed`, and the grid search on it.
pub fn search_split<T: Real>(
    cfg: &ExperimentConfig,
    rows: &[Vec<T>],
    labels: &[Label],
    rep: usize,
) -> Result<(Split, GridSearchOutcome)> {
    if rows.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: rows.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep as u64);
    let split = draw_split(labels, cfg.train_size, cfg.eval_size, &mut rng)?;
    let search = grid_search(
        &rows_of(rows, &split.train),
        &rows_of(rows, &split.eval),
        &cfg.nu_grid,
        &cfg.gamma_grid,
        &cfg.train_options(),
    )?;
    Ok((split, search))
}

/// Runs one repetition: split, grid search, train, score the test set.
fn repetition<T: Real>(cfg: &ExperimentConfig, rows: &[Vec<T>], labels: &[Label], rep: usize) -> Result<RepetitionResult> {
    let (split, search) = search_split(cfg, rows, labels, rep)?;
    let model = train(&rows_of(rows, &split.train), &search.best, &cfg.train_options())?;
    let truth: Vec<Label> = split.test.iter().map(|&i| labels[i]).collect();
    let pred = split
        .test
        .iter()
        .map(|&i| model.score(&rows[i]).map(|s| Label::from_inlier(s.is_inlier)))
        .collect::<Result<Vec<_>>>()?;
    let cm = confusion(&truth, &pred)?;
    Ok(RepetitionResult {
        repetition: rep,
        params: search.best,
        confusion: cm,
        report: report(&cm)?,
    })
}

/// Repeated training and testing on one feature matrix. Repetition `r`
/// draws from stream `r` of a generator seeded with `cfg.seed`, so the
/// outcome does not depend on how repetitions are scheduled.
pub fn run_experiment<T: Real>(cfg: &ExperimentConfig, rows: &[Vec<T>], labels: &[Label]) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    if rows.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: rows.len(),
        });
    }
    let healthy = labels.iter().filter(|&&l| l == Label::Healthy).count();
    check_pool(healthy, cfg.train_size, cfg.eval_size)?;
    if healthy == labels.len() {
        return Err(Error::InsufficientData("no damaged samples to test against".into()));
    }
    if healthy == cfg.train_size + cfg.eval_size {
        return Err(Error::InsufficientData("no healthy samples left for testing".into()));
    }
    crate::ocsvm::scaler::check_matrix(rows)?;

    let reps = (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| repetition(cfg, rows, labels, r))
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<EvalReport> = reps.iter().map(|r| r.report).collect();
    Ok(ExperimentOutcome {
        mean: EvalReport::mean(&reports)?,
        repetitions: reps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub count: usize,
    pub accuracy: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub ba: f64,
}

/// One experiment per MFCC count. `mfcc_rows` hold at least `max(counts)`
/// coefficients; each run keeps the leading `count` of them, followed by
/// `fr` when given.
pub fn mfcc_sweep<T: Real>(
    cfg: &ExperimentConfig,
    mfcc_rows: &[Vec<T>],
    fr: Option<&[T]>,
    labels: &[Label],
    counts: &[usize],
) -> Result<Vec<SweepRow>> {
    if counts.is_empty() {
        return invalid("no MFCC counts to sweep");
    }
    let available = mfcc_rows.iter().map(Vec::len).min().unwrap_or(0);
    for &c in counts {
        if c == 0 {
            return invalid("MFCC count must be at least 1");
        }
        if c > available {
            return invalid(format!("MFCC count {c} exceeds the {available} extracted coefficients"));
        }
    }
    if let Some(fr) = fr {
        if fr.len() != mfcc_rows.len() {
            return Err(Error::DimensionMismatch {
                expected: mfcc_rows.len(),
                got: fr.len(),
            });
        }
    }
    counts
        .iter()
        .map(|&c| {
            let rows: Vec<Vec<T>> = mfcc_rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut v = r[..c].to_vec();
                    if let Some(fr) = fr {
                        v.push(fr[i]);
                    }
                    v
                })
                .collect();
            let m = run_experiment(cfg, &rows, labels)?.mean;
            Ok(SweepRow {
                count: c,
                accuracy: m.accuracy,
                fpr: m.fpr,
                fnr: m.fnr,
                ba: m.ba,
            })
        })
        .collect()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return invalid("rank correlation needs at least 2 points");
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("rank correlation of a constant sequence".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}
