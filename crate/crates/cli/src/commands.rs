use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use railvib::features::ams::ams;
use railvib::features::mfcc::MfccVector;
use railvib::metrics::{confusion, format_reports_table, report, write_reports_csv, EvalReport, Label};
use railvib::ocsvm::{train as fit, OcSvmHyperParams, OcSvmModel};
use railvib::pipeline::io::{
    read_manifest, read_scores, read_signal, read_speed_track, resolve_relative, write_manifest, write_scores,
    write_signal, write_speed_track,
};
use railvib::pipeline::synthetic::feature_row;
use railvib::pipeline::{
    corpus_features, feature_names, manifest_features, mfcc_sweep, recording_features, run_experiment, search_split,
    segment, ExperimentConfig, ExperimentOutcome, FeatureConfig, FeatureExtractor, FeatureRow, FeatureSetId,
    FeatureTable, ManifestEntry, PipelineConfig, ScoreRow, SegmentationConfig,
};
use railvib::synth::{FaultKind, TorqueLevel};
use railvib::Error;

use crate::{ClassifyArgs, ConfigArg, EvaluateArgs, ExtractArgs, GridArgs, RunArgs, SelectArgs, SweepArgs, SynthArgs, TrainArgs};

pub enum Failure {
    Usage(String),
    Data(Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(Error::NonConvergence { .. }) => 3,
            Failure::Data(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Data(e) => e.fmt(f),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Failure::Usage(msg.into()))
}

struct Loaded {
    cfg: PipelineConfig,
    path: Option<PathBuf>,
}

impl Loaded {
    /// Resolves a path from the configuration against the file's directory.
    fn resolve(&self, rel: &str) -> PathBuf {
        match &self.path {
            Some(p) => resolve_relative(p, rel),
            None => PathBuf::from(rel),
        }
    }
}

fn load_config(arg: &ConfigArg) -> Result<Loaded> {
    match &arg.config {
        None => Ok(Loaded {
            cfg: PipelineConfig::default(),
            path: None,
        }),
        Some(p) => match PipelineConfig::load(p) {
            Ok(cfg) => Ok(Loaded {
                cfg,
                path: Some(p.clone()),
            }),
            Err(e) => usage(format!("configuration {}: {e}", p.display())),
        },
    }
}

fn parse_set(s: &str) -> Result<FeatureSetId> {
    s.parse().or_else(|e: Error| usage(e.to_string()))
}

fn parse_sets(list: Option<&[String]>) -> Result<Vec<FeatureSetId>> {
    match list {
        None => Ok(FeatureSetId::ALL.to_vec()),
        Some(l) => l.iter().map(|s| parse_set(s)).collect(),
    }
}

fn parse_counts(s: &str) -> Result<Vec<usize>> {
    let bad = || Failure::Usage(format!("cannot read MFCC counts {s:?}; use 1,2,5 or 1-40"));
    if let Some((a, b)) = s.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a == 0 || a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|c| c.trim().parse().map_err(|_| bad())).collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn set_label(set: FeatureSetId, with_fr: bool) -> String {
    if with_fr {
        format!("{set}+f_r")
    } else {
        set.to_string()
    }
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let loaded = load_config(&a.config)?;
    let mut spec = loaded.cfg.data.recordings.clone().unwrap_or_default();
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if let Some(kinds) = &a.kinds {
        spec.kinds = kinds
            .iter()
            .map(|k| k.parse::<FaultKind>())
            .collect::<std::result::Result<_, _>>()
            .or_else(|e| usage(e.to_string()))?;
    }
    if let Some(s) = a.severity {
        spec.severity = s;
    }
    if let Some(t) = &a.torques {
        spec.torques = t
            .iter()
            .map(|&p| TorqueLevel::from_percent(p))
            .collect::<std::result::Result<_, _>>()
            .or_else(|e| usage(e.to_string()))?;
    }
    if let Some(s) = &a.speeds {
        spec.speeds_rpm = s.clone();
    }
    if let Some(h) = a.hold_s {
        spec.hold_s = h;
    }
    if let Some(r) = a.ramp_s {
        spec.ramp_s = r;
    }
    let plans = spec.plan().or_else(|e| usage(e.to_string()))?;
    std::fs::create_dir_all(&a.out)?;
    let mut entries = Vec::with_capacity(plans.len());
    for p in &plans {
        let signal = spec.render(p, &loaded.cfg.features.geometry)?;
        let file = format!("{}.{}", p.source_id, a.format);
        let track = format!("{}_speed.csv", p.source_id);
        write_signal(a.out.join(&file), &signal)?;
        write_speed_track(a.out.join(&track), p.profile.points())?;
        entries.push(ManifestEntry {
            path: file,
            speed_track: track,
            label: Label::from_inlier(p.fault.kind == FaultKind::None),
            source_id: p.source_id.clone(),
            fault_kind: p.fault.kind.name().to_string(),
            severity: p.fault.severity,
            torque_percent: p.torque.percent(),
        });
    }
    write_manifest(a.out.join("manifest.csv"), &entries)?;
    eprintln!("wrote {} recordings and manifest.csv to {}", entries.len(), a.out.display());
    Ok(())
}

/// Feature rows of one recording, optionally writing each kept segment's
/// AMS matrix.
fn recording_rows(
    signal: &railvib::Signal64,
    track: &[(f64, f64)],
    label: Label,
    source_id: &str,
    seg: &SegmentationConfig,
    cfg: &FeatureConfig,
    sets: &[FeatureSetId],
    ams_dir: Option<&Path>,
) -> Result<Vec<FeatureRow>> {
    let Some(dir) = ams_dir else {
        return Ok(recording_features(signal, track, label, source_id, seg, cfg, sets)?);
    };
    let fs = signal.sample_rate_hz();
    let s = segment(signal, track, label, source_id, seg)?;
    let ex = FeatureExtractor::<f64>::new(cfg, fs)?;
    let ams_cfg = cfg.ams.resolve(fs)?;
    std::fs::create_dir_all(dir)?;
    let mut rows = Vec::with_capacity(s.kept.len());
    for r in &s.kept {
        rows.push(feature_row(&ex, sets, r)?);
        let name = r.source_id.replace(['/', '\\'], "_");
        ams(&r.segment, &ams_cfg)?.write_csv(create(&dir.join(format!("{name}_ams.csv")))?)?;
    }
    Ok(rows)
}

pub fn extract(a: ExtractArgs) -> Result<()> {
    let loaded = load_config(&a.config)?;
    let cfg = &loaded.cfg;
    let features = match a.mfcc_count {
        Some(0) => return usage("--mfcc-count must be at least 1"),
        Some(n) => cfg.features.with_mfcc_count(n),
        None => cfg.features.clone(),
    };
    let sets = parse_sets(a.sets.as_deref())?;
    let names = railvib::pipeline::synthetic::table_names(&sets, &features);
    let ams_dir = a.ams_dir.as_deref();

    let rows = if a.synthetic {
        if ams_dir.is_some() {
            return usage("--ams-dir needs recordings (--manifest or --signal)");
        }
        let spec = cfg.data.synthetic.clone().unwrap_or_default();
        corpus_features(&spec, &features, &sets)?.rows
    } else if let Some(manifest) = &a.manifest {
        if ams_dir.is_none() {
            manifest_features(manifest, &cfg.segmentation, &features, &sets)?.rows
        } else {
            let mut rows = Vec::new();
            for e in read_manifest(manifest)? {
                let signal = read_signal(resolve_relative(manifest, &e.path))?;
                let track = read_speed_track(resolve_relative(manifest, &e.speed_track))?;
                rows.extend(recording_rows(
                    &signal,
                    &track,
                    e.label,
                    &e.source_id,
                    &cfg.segmentation,
                    &features,
                    &sets,
                    ams_dir,
                )?);
            }
            rows
        }
    } else if let Some(path) = &a.signal {
        let label: Label = a.label.parse().or_else(|e: Error| usage(e.to_string()))?;
        let signal = read_signal(path)?;
        let track = match (&a.speed_track, a.rpm) {
            (Some(t), _) => read_speed_track(t)?,
            (None, Some(rpm)) => vec![(0.0, rpm), (signal.duration_s(), rpm)],
            (None, None) => return usage("--signal needs --speed-track or --rpm"),
        };
        let id = match &a.source_id {
            Some(id) => id.clone(),
            None => path.file_stem().map_or("signal".into(), |s| s.to_string_lossy().into_owned()),
        };
        recording_rows(&signal, &track, label, &id, &cfg.segmentation, &features, &sets, ams_dir)?
    } else {
        return usage("give one of --manifest, --signal or --synthetic");
    };
    let n = rows.len();
    FeatureTable { names, rows }.write(&a.out)?;
    eprintln!("wrote {n} feature rows to {}", a.out.display());
    Ok(())
}

struct Selection {
    set: FeatureSetId,
    names: Vec<String>,
    table: FeatureTable,
    rows: Vec<Vec<f64>>,
}

fn select(s: &SelectArgs, cfg: &FeatureConfig) -> Result<Selection> {
    let set = parse_set(&s.set)?;
    let names = feature_names(set, cfg, s.with_fr);
    let table = FeatureTable::read(&s.features)?;
    let rows = table.select(&names)?;
    Ok(Selection {
        set,
        names,
        table,
        rows,
    })
}

fn experiment_config(loaded: &Loaded, seed: Option<u64>) -> ExperimentConfig {
    let mut exp = loaded.cfg.experiment.clone();
    if let Some(s) = seed {
        exp.seed = s;
    }
    exp
}

pub fn train(a: TrainArgs) -> Result<()> {
    let loaded = load_config(&a.config)?;
    let exp = experiment_config(&loaded, a.seed);
    let sel = select(&a.select, &loaded.cfg.features)?;
    let labels = sel.table.labels();
    let (train_rows, params): (Vec<Vec<f64>>, OcSvmHyperParams) = match (a.nu, a.gamma) {
        (Some(nu), Some(gamma)) => {
            if !(nu > 0.0 && nu <= 1.0) || !(gamma > 0.0 && gamma.is_finite()) {
                return usage(format!("need 0 < nu <= 1 and gamma > 0, got nu={nu} gamma={gamma}"));
            }
            let healthy = sel
                .rows
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == Label::Healthy)
                .map(|(r, _)| r.clone())
                .collect();
            (healthy, OcSvmHyperParams { nu, gamma })
        }
        _ => {
            let (split, search) = search_split(&exp, &sel.rows, &labels, 0)?;
            let rows = split.train.iter().map(|&i| sel.rows[i].clone()).collect();
            (rows, search.best)
        }
    };
    let mut model = fit(&train_rows, &params, &exp.train_options())?;
    model.feature_set = Some(set_label(sel.set, a.select.with_fr));
    model.feature_names = sel.names;
    model.save(&a.out)?;
    eprintln!(
        "trained on {} rows with nu={} gamma={}; {} support vectors",
        train_rows.len(),
        params.nu,
        params.gamma,
        model.n_support()
    );
    Ok(())
}

pub fn gridsearch(a: GridArgs) -> Result<()> {
    let loaded = load_config(&a.config)?;
    let exp = experiment_config(&loaded, a.seed);
    let sel = select(&a.select, &loaded.cfg.features)?;
    let (_, search) = search_split(&exp, &sel.rows, &sel.table.labels(), 0)?;
    if let Some(out) = &a.out {
        let mut w = csv::Writer::from_writer(create(out)?);
        w.write_record(["nu", "gamma", "eval_inliers", "eval_total", "inlier_rate"])?;
        for c in &search.cells {
            w.write_record([
                c.nu.to_string(),
                c.gamma.to_string(),
                c.eval_inliers.to_string(),
                c.eval_total.to_string(),
                format!("{:.6}", c.inlier_rate()),
            ])?;
        }
        w.flush()?;
    }
    println!("nu={} gamma={}", search.best.nu, search.best.gamma);
    Ok(())
}

pub fn classify(a: ClassifyArgs) -> Result<()> {
    let model = OcSvmModel::<f64>::load(&a.model)?;
    if model.feature_names.is_empty() {
        return Err(Error::Parse(format!("{} lists no feature columns", a.model.display())).into());
    }
    let table = FeatureTable::read(&a.features)?;
    let rows = table.select(&model.feature_names)?;
    let scores = model.score_all(&rows)?;
    let out: Vec<ScoreRow> = table
        .rows
        .iter()
        .zip(scores)
        .map(|(r, s)| ScoreRow {
            source_id: r.source_id.clone(),
            label: r.label,
            score: s.value,
            predicted: Label::from_inlier(s.is_inlier),
        })
        .collect();
    write_scores(&a.out, &out)?;
    let inliers = out.iter().filter(|r| r.predicted == Label::Healthy).count();
    eprintln!("{inliers} of {} rows classified healthy", out.len());
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let rows = read_scores(&a.scores)?;
    let truth: Vec<Label> = rows.iter().map(|r| r.label).collect();
    let pred: Vec<Label> = rows.iter().map(|r| r.predicted).collect();
    let cm = confusion(&truth, &pred)?;
    let rep = report(&cm)?;
    let name = a.scores.file_stem().map_or("scores".into(), |s| s.to_string_lossy().into_owned());
    println!("TP {}  FN {}  FP {}  TN {}", cm.tp, cm.fn_, cm.fp, cm.tn);
    print!("{}", format_reports_table(&[(name.clone(), rep)]));
    if let Some(out) = &a.out {
        write_reports_csv(create(out)?, &[(name, rep)])?;
    }
    Ok(())
}

fn sweep_rows(
    exp: &ExperimentConfig,
    table: &FeatureTable,
    counts: &[usize],
    with_fr: &[bool],
) -> Result<Vec<(bool, railvib::pipeline::SweepRow)>> {
    let Some(&max) = counts.iter().max() else {
        return usage("no MFCC counts to sweep");
    };
    let mfcc = table.select(&MfccVector::<f64>::names(max))?;
    let fr: Vec<f64> = table.rows.iter().map(|r| r.f_r_hz).collect();
    let labels = table.labels();
    let mut out = Vec::new();
    for &w in with_fr {
        let rows = mfcc_sweep(exp, &mfcc, w.then_some(fr.as_slice()), &labels, counts)?;
        out.extend(rows.into_iter().map(|r| (w, r)));
    }
    Ok(out)
}

fn write_sweep(path: &Path, rows: &[(bool, railvib::pipeline::SweepRow)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["with_fr", "count", "accuracy", "fpr", "fnr", "ba"])?;
    for (fr, r) in rows {
        w.write_record([
            fr.to_string(),
            r.count.to_string(),
            format!("{:.6}", r.accuracy),
            format!("{:.6}", r.fpr),
            format!("{:.6}", r.fnr),
            format!("{:.6}", r.ba),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn print_sweep(rows: &[(bool, railvib::pipeline::SweepRow)]) {
    println!("{:>7} {:>5} {:>9} {:>8} {:>8} {:>8}", "f_r", "count", "accuracy", "FPR", "FNR", "BA");
    for (fr, r) in rows {
        println!(
            "{:>7} {:>5} {:>8.2}% {:>7.2}% {:>7.2}% {:>7.2}%",
            fr,
            r.count,
            100.0 * r.accuracy,
            100.0 * r.fpr,
            100.0 * r.fnr,
            100.0 * r.ba
        );
    }
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let loaded = load_config(&a.config)?;
    let exp = &loaded.cfg.experiment;
    let counts = match &a.counts {
        Some(c) => parse_counts(c)?,
        None => exp.sweep_counts.clone(),
    };
    let table = FeatureTable::read(&a.features)?;
    let rows = sweep_rows(exp, &table, &counts, &[a.with_fr])?;
    write_sweep(&a.out, &rows)?;
    print_sweep(&rows);
    Ok(())
}

/// Feature table of the configured data source.
fn load_table(loaded: &Loaded, features: &FeatureConfig, sets: &[FeatureSetId]) -> Result<FeatureTable> {
    let data = &loaded.cfg.data;
    if let Some(f) = &data.features {
        return Ok(FeatureTable::read(loaded.resolve(f))?);
    }
    if let Some(m) = &data.manifest {
        return Ok(manifest_features(&loaded.resolve(m), &loaded.cfg.segmentation, features, sets)?);
    }
    let spec = data.synthetic.clone().unwrap_or_default();
    Ok(corpus_features(&spec, features, sets)?)
}

fn write_repetitions(path: &Path, results: &[(String, ExperimentOutcome)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["name", "repetition", "nu", "gamma", "tp", "fn", "fp", "tn"];
    header.extend(EvalReport::CSV_HEADER);
    w.write_record(&header)?;
    for (name, o) in results {
        for r in &o.repetitions {
            let c = r.confusion;
            let mut rec = vec![
                name.clone(),
                r.repetition.to_string(),
                r.params.nu.to_string(),
                r.params.gamma.to_string(),
                c.tp.to_string(),
                c.fn_.to_string(),
                c.fp.to_string(),
                c.tn.to_string(),
            ];
            rec.extend(r.report.csv_fields());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run(a: RunArgs) -> Result<()> {
    let loaded = load_config(&a.config)?;
    let cfg = &loaded.cfg;
    let exp = &cfg.experiment;
    if exp.feature_sets.is_empty() || exp.append_fr.is_empty() {
        return usage("experiment.feature_sets and experiment.append_fr must not be empty");
    }
    let table = load_table(&loaded, &cfg.features, &exp.feature_sets)?;
    std::fs::create_dir_all(&a.out)?;
    table.write(a.out.join("features.csv"))?;

    let labels = table.labels();
    let mut results = Vec::new();
    for &set in &exp.feature_sets {
        for &with_fr in &exp.append_fr {
            let rows = table.select(&feature_names(set, &cfg.features, with_fr))?;
            let outcome = run_experiment(exp, &rows, &labels)?;
            results.push((set_label(set, with_fr), outcome));
        }
    }
    let means: Vec<(String, EvalReport)> = results.iter().map(|(n, o)| (n.clone(), o.mean)).collect();
    write_reports_csv(create(&a.out.join("results.csv"))?, &means)?;
    write_repetitions(&a.out.join("repetitions.csv"), &results)?;
    print!("{}", format_reports_table(&means));

    if a.sweep {
        let Some(&max) = exp.sweep_counts.iter().max() else {
            return usage("experiment.sweep_counts is empty");
        };
        let sweep_table = if cfg.data.features.is_some() {
            table
        } else {
            load_table(&loaded, &cfg.features.with_mfcc_count(max), &[FeatureSetId::Mfcc])?
        };
        let rows = sweep_rows(exp, &sweep_table, &exp.sweep_counts, &exp.append_fr)?;
        write_sweep(&a.out.join("sweep.csv"), &rows)?;
        print_sweep(&rows);
    }
    Ok(())
}
