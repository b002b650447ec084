//! End-to-end orchestration: segmentation, feature extraction, the
//! repeated train/test protocol and the MFCC-count sweep.

pub mod config;
pub mod experiment;
pub mod extract;
pub mod io;
pub mod segment;
pub mod synthetic;

use std::path::Path;

use rayon::prelude::*;

pub use config::{DataConfig, ExperimentConfig, FeatureConfig, PipelineConfig};
pub use experiment::{draw_split, mfcc_sweep, run_experiment, search_split, spearman, ExperimentOutcome, RepetitionResult, Split, SweepRow};
pub use extract::{extract, feature_names, FeatureExtractor, FeatureSetId, FeatureVector, FR_NAME};
pub use io::{FeatureRow, FeatureTable, ManifestEntry, ScoreRow};
pub use segment::{segment, SegmentRecord, Segmentation, SegmentationConfig};
pub use synthetic::{corpus_features, ClassSpec, CorpusSpec, RecordingSpec};

use crate::error::{invalid, Result};

/// Segments every recording of a manifest and extracts the requested sets.
pub fn manifest_features(
    manifest: &Path,
    seg: &SegmentationConfig,
    cfg: &FeatureConfig,
    sets: &[FeatureSetId],
) -> Result<FeatureTable> {
    let entries = io::read_manifest(manifest)?;
    if entries.is_empty() {
        return invalid(format!("manifest {} lists no recordings", manifest.display()));
    }
    let mut rows = Vec::new();
    for e in &entries {
        let signal = io::read_signal(io::resolve_relative(manifest, &e.path))?;
        let track = io::read_speed_track(io::resolve_relative(manifest, &e.speed_track))?;
        rows.extend(recording_features(&signal, &track, e.label, &e.source_id, seg, cfg, sets)?);
    }
    Ok(FeatureTable {
        names: synthetic::table_names(sets, cfg),
        rows,
    })
}

/// Feature rows of the kept segments of one recording.
pub fn recording_features(
    signal: &crate::signal::Signal<f64>,
    track: &[(f64, f64)],
    label: crate::metrics::Label,
    source_id: &str,
    seg: &SegmentationConfig,
    cfg: &FeatureConfig,
    sets: &[FeatureSetId],
) -> Result<Vec<FeatureRow>> {
    let s = segment(signal, track, label, source_id, seg)?;
    let ex = FeatureExtractor::<f64>::new(cfg, signal.sample_rate_hz())?;
    s.kept
        .par_iter()
        .map(|r| synthetic::feature_row(&ex, sets, r))
        .collect()
}
