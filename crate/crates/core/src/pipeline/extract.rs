//! Feature-set dispatch: one vector per segment for each of TD, SD,
//! ENV_AMP, AMS and MFCC, optionally followed by the rotational frequency.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::FeatureConfig;
use super::segment::SegmentRecord;
use crate::error::{invalid, Error, Result};
use crate::features::ams::{ams, ams_scalar, AmsConfig};
use crate::features::envelope::{envelope_fault_amplitudes, fault_frequencies, BearingGeometry, EnvAmpFeatures};
use crate::features::mfcc::{mfcc, MelFilterbank, MfccConfig, MfccVector};
use crate::features::spectral::{spectral_features_of, SpectralFeatures};
use crate::features::time::{extract_time_features, TimeFeatures};
use crate::metrics::Label;
use crate::scalar::Real;
use crate::signal::Signal;

/// Name of the rotational-frequency column and appended feature.
pub const FR_NAME: &str = "f_r_hz";
pub const AMS_NAME: &str = "ams_scalar";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureSetId {
    #[serde(rename = "TD")]
    Td,
    #[serde(rename = "SD")]
    Sd,
    #[serde(rename = "ENV_AMP")]
    EnvAmp,
    #[serde(rename = "AMS")]
    Ams,
    #[serde(rename = "MFCC")]
    Mfcc,
}

impl FeatureSetId {
    pub const ALL: [FeatureSetId; 5] = [
        FeatureSetId::Td,
        FeatureSetId::Sd,
        FeatureSetId::EnvAmp,
        FeatureSetId::Ams,
        FeatureSetId::Mfcc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSetId::Td => "TD",
            FeatureSetId::Sd => "SD",
            FeatureSetId::EnvAmp => "ENV_AMP",
            FeatureSetId::Ams => "AMS",
            FeatureSetId::Mfcc => "MFCC",
        }
    }
}

impl fmt::Display for FeatureSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "TD" => Ok(FeatureSetId::Td),
            "SD" => Ok(FeatureSetId::Sd),
            "ENV_AMP" | "ENVAMP" => Ok(FeatureSetId::EnvAmp),
            "AMS" => Ok(FeatureSetId::Ams),
            "MFCC" => Ok(FeatureSetId::Mfcc),
            _ => Err(Error::InvalidInput(format!("unknown feature set {s:?}"))),
        }
    }
}

/// Column names of a feature set, with `f_r_hz` last when `with_fr`.
pub fn feature_names(set: FeatureSetId, cfg: &FeatureConfig, with_fr: bool) -> Vec<String> {
    let mut names: Vec<String> = match set {
        FeatureSetId::Td => TimeFeatures::<f64>::NAMES.iter().map(|s| s.to_string()).collect(),
        FeatureSetId::Sd => SpectralFeatures::<f64>::NAMES.iter().map(|s| s.to_string()).collect(),
        FeatureSetId::EnvAmp => EnvAmpFeatures::<f64>::NAMES.iter().map(|s| s.to_string()).collect(),
        FeatureSetId::Ams => vec![AMS_NAME.to_string()],
        FeatureSetId::Mfcc => MfccVector::<f64>::names(cfg.mfcc.n_kept),
    };
    if with_fr {
        names.push(FR_NAME.to_string());
    }
    names
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub feature_set_id: FeatureSetId,
    pub values: Vec<T>,
    pub with_fr: bool,
    pub label: Label,
    pub source_id: String,
}

/// Extractors prepared for one sample rate.
#[derive(Debug, Clone)]
pub struct FeatureExtractor<T: Real> {
    cfg: FeatureConfig,
    sample_rate_hz: f64,
    geometry: BearingGeometry<T>,
    mfcc_bank: MelFilterbank<T>,
    mfcc_cfg: MfccConfig,
    ams_cfg: AmsConfig,
}

impl<T: Real> FeatureExtractor<T> {
    pub fn new(cfg: &FeatureConfig, sample_rate_hz: f64) -> Result<Self> {
        let g = &cfg.geometry;
        g.validate()?;
        let (mfcc_bank, mfcc_cfg) = cfg.mfcc.resolve::<T>(sample_rate_hz)?;
        if mfcc_cfg.n_kept < 1 || mfcc_cfg.n_kept > mfcc_bank.n_filters() {
            return invalid(format!(
                "MFCC count {} must lie in 1..={}",
                mfcc_cfg.n_kept,
                mfcc_bank.n_filters()
            ));
        }
        Ok(Self {
            cfg: cfg.clone(),
            sample_rate_hz,
            geometry: BearingGeometry {
                n_rolling_elements: g.n_rolling_elements,
                ball_diameter_mm: T::of(g.ball_diameter_mm),
                pitch_diameter_mm: T::of(g.pitch_diameter_mm),
                contact_angle_rad: T::of(g.contact_angle_rad),
            },
            mfcc_bank,
            mfcc_cfg,
            ams_cfg: cfg.ams.resolve(sample_rate_hz)?,
        })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.cfg
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Feature values of one segment, without the rotational frequency.
    pub fn extract_set(&self, set: FeatureSetId, segment: &Signal<T>, rotational_freq_hz: T) -> Result<Vec<T>> {
        if segment.sample_rate_hz().as_f64() != self.sample_rate_hz {
            return invalid(format!(
                "segment sampled at {} Hz but extractor prepared for {} Hz",
                segment.sample_rate_hz(),
                self.sample_rate_hz
            ));
        }
        let values = match set {
            FeatureSetId::Td => extract_time_features(segment.samples(), &self.cfg.time)?.to_vec(),
            FeatureSetId::Sd => spectral_features_of(segment, &self.cfg.spectral)?.to_vec(),
            FeatureSetId::EnvAmp => {
                let faults = fault_frequencies(&self.geometry, rotational_freq_hz)?;
                envelope_fault_amplitudes(segment, &faults, &self.cfg.envelope)?.to_vec()
            }
            FeatureSetId::Ams => {
                let m = ams(segment, &self.ams_cfg)?;
                vec![ams_scalar(&m, T::of(self.cfg.ams.min_center_hz), T::of(self.cfg.ams.max_mod_hz))?]
            }
            FeatureSetId::Mfcc => mfcc(segment, &self.mfcc_bank, &self.mfcc_cfg)?.coefficients,
        };
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!("{set} feature {i} is not finite")));
        }
        Ok(values)
    }

    pub fn feature_vector(&self, set: FeatureSetId, record: &SegmentRecord<T>, with_fr: bool) -> Result<FeatureVector<T>> {
        let mut values = self.extract_set(set, &record.segment, record.rotational_freq_hz)?;
        if with_fr {
            values.push(record.rotational_freq_hz);
        }
        Ok(FeatureVector {
            feature_set_id: set,
            values,
            with_fr,
            label: record.label,
            source_id: record.source_id.clone(),
        })
    }
}

/// Feature vectors of every record, computed in parallel.
pub fn extract<T: Real>(
    records: &[SegmentRecord<T>],
    set: FeatureSetId,
    with_fr: bool,
    cfg: &FeatureConfig,
) -> Result<Vec<FeatureVector<T>>> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let ex = FeatureExtractor::new(cfg, first.segment.sample_rate_hz().as_f64())?;
    records
        .par_iter()
        .map(|r| ex.feature_vector(set, r, with_fr))
        .collect()
}
