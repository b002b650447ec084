use std::path::Path;

use serde::{Deserialize, Serialize};

use super::extract::FeatureSetId;
use super::segment::SegmentationConfig;
use super::synthetic::{CorpusSpec, RecordingSpec};
use crate::error::{invalid, Error, Result};
use crate::features::ams::AmsSettings;
use crate::features::envelope::{BearingGeometry, EnvelopeConfig};
use crate::features::mfcc::MfccSettings;
use crate::features::spectral::SpectralConfig;
use crate::features::time::TimeFeatureConfig;
use crate::ocsvm::{default_gamma_grid, default_nu_grid, KernelKind, SolverOptions, TrainOptions};

/// Parameters of every feature extractor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub time: TimeFeatureConfig,
    pub spectral: SpectralConfig,
    pub envelope: EnvelopeConfig,
    pub geometry: BearingGeometry<f64>,
    pub mfcc: MfccSettings,
    pub ams: AmsSettings,
}

impl FeatureConfig {
    /// Copy keeping `count` cepstral coefficients, with at least as many
    /// Mel filters.
    pub fn with_mfcc_count(&self, count: usize) -> Self {
        let mut cfg = self.clone();
        cfg.mfcc.n_kept = count;
        cfg.mfcc.n_filters = cfg.mfcc.n_filters.max(count);
        cfg
    }
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            time: TimeFeatureConfig::default(),
            spectral: SpectralConfig::default(),
            envelope: EnvelopeConfig::default(),
            geometry: BearingGeometry::generic_deep_groove(),
            mfcc: MfccSettings::default(),
            ams: AmsSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub feature_sets: Vec<FeatureSetId>,
    /// Evaluate each set without (`false`) and/or with (`true`) the
    /// rotational frequency appended.
    pub append_fr: Vec<bool>,
    pub repetitions: usize,
    pub train_size: usize,
    pub eval_size: usize,
    pub seed: u64,
    pub nu_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub kernel: KernelKind,
    pub solver_tol: f64,
    pub solver_max_iter: u64,
    /// MFCC counts for the sweep.
    pub sweep_counts: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let solver = SolverOptions::default();
        Self {
            feature_sets: FeatureSetId::ALL.to_vec(),
            append_fr: vec![false, true],
            repetitions: 10,
            train_size: 500,
            eval_size: 50,
            seed: 0,
            nu_grid: default_nu_grid(),
            gamma_grid: default_gamma_grid(),
            kernel: KernelKind::Gaussian,
            solver_tol: solver.tol,
            solver_max_iter: solver.max_iter,
            sweep_counts: (1..=40).collect(),
        }
    }
}

impl ExperimentConfig {
    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            kernel: self.kernel,
            solver: SolverOptions {
                tol: self.solver_tol,
                max_iter: self.solver_max_iter,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return invalid("repetitions must be at least 1");
        }
        if self.train_size < 2 {
            return invalid("train size must be at least 2");
        }
        if self.eval_size == 0 {
            return invalid("eval size must be at least 1");
        }
        if self.nu_grid.is_empty() || self.gamma_grid.is_empty() {
            return invalid("hyper-parameter grids must not be empty");
        }
        if self.nu_grid.iter().any(|&nu| !(nu > 0.0 && nu <= 1.0)) {
            return invalid("every nu must lie in (0, 1]");
        }
        if self.gamma_grid.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return invalid("every gamma must be positive");
        }
        if !(self.solver_tol > 0.0) {
            return invalid("solver tolerance must be positive");
        }
        Ok(())
    }
}

/// Where `run` and `sweep` take their data from. Relative paths are
/// resolved against the configuration file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct DataConfig {
    /// Recording manifest as written by `synth`.
    pub manifest: Option<String>,
    /// Feature CSV as written by `extract`.
    pub features: Option<String>,
    /// Generate segments in memory instead of reading files.
    pub synthetic: Option<CorpusSpec>,
    /// Recordings written by `synth`.
    pub recordings: Option<RecordingSpec>,
}

/// Top-level configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct PipelineConfig {
    pub segmentation: SegmentationConfig,
    pub features: FeatureConfig,
    pub experiment: ExperimentConfig,
    pub data: DataConfig,
}

impl PipelineConfig {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)?
        } else {
            toml::from_str(text)?
        };
        cfg.experiment.validate()?;
        cfg.segmentation.validate()?;
        cfg.features.geometry.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }
}
