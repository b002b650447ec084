//! File formats.
//!
//! * Signal CSV: first line `sample_rate_hz=<fs>`, then one sample per line.
//! * Signal WAV: mono 32-bit float; integer WAVs are read and scaled to
//!   [-1, 1). Only the first channel of multi-channel files is used.
//! * Speed track CSV: header `time_s,rpm`.
//! * Feature CSV: `source_id,label,f_r_hz` followed by named feature columns.
//! * Scores CSV: `source_id,label,score,predicted`.
//! * Manifest CSV: `path,speed_track,label,source_id,fault_kind,severity,torque_percent`,
//!   paths relative to the manifest.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::extract::FR_NAME;
use crate::error::{invalid, Error, Result};
use crate::metrics::Label;
use crate::signal::Signal;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn is_wav(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

/// Reads a WAV or CSV signal, chosen by file extension.
pub fn read_signal(path: impl AsRef<Path>) -> Result<Signal<f64>> {
    let path = path.as_ref();
    if is_wav(path) {
        read_wav(path)
    } else {
        read_signal_csv(path)
    }
}

/// Writes a WAV or CSV signal, chosen by file extension.
pub fn write_signal(path: impl AsRef<Path>, signal: &Signal<f64>) -> Result<()> {
    let path = path.as_ref();
    if is_wav(path) {
        write_wav(path, signal)
    } else {
        write_signal_csv(path, signal)
    }
}

pub fn read_wav(path: &Path) -> Result<Signal<f64>> {
    let mut reader = hound::WavReader::new(BufReader::new(open(path)?))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    let samples: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => reader
            .samples::<f32>()
            .step_by(channels)
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        hound::SampleFormat::Int => {
            let scale = 2f64.powi(spec.bits_per_sample as i32 - 1);
            reader
                .samples::<i32>()
                .step_by(channels)
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()?
        }
    };
    Signal::new(samples, spec.sample_rate as f64)
}

pub fn write_wav(path: &Path, signal: &Signal<f64>) -> Result<()> {
    let fs = signal.sample_rate_hz();
    if fs.fract() != 0.0 || fs > u32::MAX as f64 {
        return invalid(format!("WAV needs an integer sample rate, got {fs}"));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: fs as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::new(create(path)?, spec)?;
    for &v in signal.samples() {
        w.write_sample(v as f32)?;
    }
    w.finalize()?;
    Ok(())
}

pub fn read_signal_csv(path: &Path) -> Result<Signal<f64>> {
    let mut lines = BufReader::new(open(path)?).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let fs: f64 = header
        .trim()
        .strip_prefix("sample_rate_hz=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("{}: first line must be sample_rate_hz=<Hz>", path.display())))?;
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        samples.push(
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("{}: line {}: bad sample {t:?}", path.display(), i + 2)))?,
        );
    }
    Signal::new(samples, fs)
}

pub fn write_signal_csv(path: &Path, signal: &Signal<f64>) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "sample_rate_hz={}", signal.sample_rate_hz())?;
    for v in signal.samples() {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct TrackRow {
    time_s: f64,
    rpm: f64,
}

pub fn read_speed_track(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_reader(open(path.as_ref())?);
    r.deserialize::<TrackRow>()
        .map(|row| row.map(|t| (t.time_s, t.rpm)).map_err(Error::from))
        .collect()
}

pub fn write_speed_track(path: impl AsRef<Path>, track: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path.as_ref())?);
    for &(time_s, rpm) in track {
        w.serialize(TrackRow { time_s, rpm })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub source_id: String,
    pub label: Label,
    pub f_r_hz: f64,
    pub values: Vec<f64>,
}

/// A feature CSV held in memory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_reader(open(path)?);
        let header = r.headers()?.clone();
        if header.len() < 3 || &header[0] != "source_id" || &header[1] != "label" || &header[2] != FR_NAME {
            return Err(Error::Parse(format!(
                "{}: feature CSV must start with source_id,label,{FR_NAME}",
                path.display()
            )));
        }
        let names: Vec<String> = header.iter().skip(3).map(String::from).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let num = |j: usize| -> Result<f64> {
                rec[j].trim().parse().map_err(|_| {
                    Error::Parse(format!("{}: row {}: column {} is not a number", path.display(), i + 2, &header[j]))
                })
            };
            rows.push(FeatureRow {
                source_id: rec[0].to_string(),
                label: rec[1].parse()?,
                f_r_hz: num(2)?,
                values: (3..rec.len()).map(num).collect::<Result<_>>()?,
            });
        }
        Ok(Self { names, rows })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_writer(create(path.as_ref())?);
        let mut header = vec!["source_id".to_string(), "label".into(), FR_NAME.into()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.source_id.clone(), row.label.to_string(), row.f_r_hz.to_string()];
            rec.extend(row.values.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Matrix of the named columns; `f_r_hz` selects the rotational
    /// frequency.
    pub fn select(&self, columns: &[String]) -> Result<Vec<Vec<f64>>> {
        let idx: Vec<Option<usize>> = columns
            .iter()
            .map(|c| {
                if c == FR_NAME {
                    Ok(None)
                } else {
                    self.names
                        .iter()
                        .position(|n| n == c)
                        .map(Some)
                        .ok_or_else(|| Error::InvalidInput(format!("feature column {c:?} not found")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(self
            .rows
            .iter()
            .map(|r| idx.iter().map(|i| i.map_or(r.f_r_hz, |i| r.values[i])).collect())
            .collect())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub source_id: String,
    pub label: Label,
    pub score: f64,
    pub predicted: Label,
}

pub fn write_scores(path: impl AsRef<Path>, rows: &[ScoreRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path.as_ref())?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRow>> {
    let mut r = csv::Reader::from_reader(open(path.as_ref())?);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub speed_track: String,
    pub label: Label,
    pub source_id: String,
    pub fault_kind: String,
    pub severity: f64,
    pub torque_percent: u32,
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path.as_ref())?);
    for e in entries {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let mut r = csv::Reader::from_reader(open(path.as_ref())?);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Resolves `rel` against the directory containing `base`.
pub fn resolve_relative(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new("")).join(p)
    }
}
