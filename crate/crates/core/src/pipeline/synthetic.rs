//! Labelled synthetic data: independent segments generated in memory, or
//! longer recordings that step through the speed levels with ramps in
//! between.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::FeatureConfig;
use super::extract::{feature_names, FeatureExtractor, FeatureSetId};
use super::io::{FeatureRow, FeatureTable};
use super::segment::SegmentRecord;
use crate::error::{invalid, Result};
use crate::features::envelope::BearingGeometry;
use crate::metrics::Label;
use crate::synth::{generate_profile, FaultKind, FaultSpec, RigModel, SpeedProfile, TorqueLevel, SPEED_LEVELS_RPM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub kind: FaultKind,
    pub segments: usize,
}

/// Independent segments at randomly drawn speed levels, torque levels and
/// severities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub classes: Vec<ClassSpec>,
    pub severity_min: f64,
    pub severity_max: f64,
    pub speeds_rpm: Vec<f64>,
    pub segment_s: f64,
    pub seed: u64,
    pub rig: RigModel,
}

impl Default for CorpusSpec {
    /// Half the reference dataset size, large enough for the 500 + 50
    /// healthy training and eval draws.
    fn default() -> Self {
        Self {
            classes: vec![
                ClassSpec { kind: FaultKind::None, segments: 779 },
                ClassSpec { kind: FaultKind::OuterRace, segments: 1256 },
                ClassSpec { kind: FaultKind::Distributed, segments: 1364 },
            ],
            severity_min: 0.3,
            severity_max: 1.0,
            speeds_rpm: SPEED_LEVELS_RPM.to_vec(),
            segment_s: 2.0,
            seed: 1,
            rig: RigModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPlan {
    pub source_id: String,
    pub rpm: f64,
    pub torque: TorqueLevel,
    pub fault: FaultSpec,
    pub seed: u64,
}

impl SegmentPlan {
    pub fn label(&self) -> Label {
        Label::from_inlier(self.fault.kind == FaultKind::None)
    }
}

impl CorpusSpec {
    fn validate(&self) -> Result<()> {
        if self.speeds_rpm.is_empty() {
            return invalid("corpus needs at least one speed level");
        }
        if !(0.0 < self.severity_min && self.severity_min <= self.severity_max && self.severity_max <= 1.0) {
            return invalid("need 0 < severity_min <= severity_max <= 1");
        }
        Ok(())
    }

    /// Deterministic list of segments; class `c` draws from stream `c`.
    pub fn plan(&self) -> Result<Vec<SegmentPlan>> {
        self.validate()?;
        let mut out = Vec::new();
        for (c, class) in self.classes.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(c as u64);
            for i in 0..class.segments {
                let rpm = self.speeds_rpm[rng.random_range(0..self.speeds_rpm.len())];
                let torque = TorqueLevel::ALL[rng.random_range(0..4)];
                let fault = if class.kind == FaultKind::None {
                    FaultSpec::healthy()
                } else {
                    FaultSpec::new(class.kind, rng.random_range(self.severity_min..=self.severity_max))?
                };
                out.push(SegmentPlan {
                    source_id: format!("{}-{c}/{i:05}", class.kind.name()),
                    rpm,
                    torque,
                    fault,
                    seed: rng.next_u64(),
                });
            }
        }
        Ok(out)
    }

    pub fn render(&self, plan: &SegmentPlan, geometry: &BearingGeometry<f64>) -> Result<SegmentRecord<f64>> {
        let segment = generate_profile(
            &self.rig,
            &SpeedProfile::constant(plan.rpm),
            plan.torque,
            self.segment_s,
            &plan.fault,
            geometry,
            plan.seed,
        )?;
        Ok(SegmentRecord {
            segment,
            rotational_freq_hz: plan.rpm / 60.0,
            label: plan.label(),
            source_id: plan.source_id.clone(),
        })
    }
}

/// Column names of several feature sets side by side.
pub fn table_names(sets: &[FeatureSetId], cfg: &FeatureConfig) -> Vec<String> {
    sets.iter().flat_map(|&s| feature_names(s, cfg, false)).collect()
}

/// Feature row of one record for several sets.
pub fn feature_row(ex: &FeatureExtractor<f64>, sets: &[FeatureSetId], record: &SegmentRecord<f64>) -> Result<FeatureRow> {
    let mut values = Vec::new();
    for &s in sets {
        values.extend(ex.extract_set(s, &record.segment, record.rotational_freq_hz)?);
    }
    Ok(FeatureRow {
        source_id: record.source_id.clone(),
        label: record.label,
        f_r_hz: record.rotational_freq_hz,
        values,
    })
}

/// Generates every planned segment and keeps only its features.
pub fn corpus_features(spec: &CorpusSpec, cfg: &FeatureConfig, sets: &[FeatureSetId]) -> Result<FeatureTable> {
    let plans = spec.plan()?;
    let ex = FeatureExtractor::<f64>::new(cfg, spec.rig.sample_rate_hz)?;
    let rows = plans
        .par_iter()
        .map(|p| feature_row(&ex, sets, &spec.render(p, &cfg.geometry)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable {
        names: table_names(sets, cfg),
        rows,
    })
}

/// Recordings holding each speed level for `hold_s` and ramping linearly
/// to the next one over `ramp_s`; one recording per class and torque level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecordingSpec {
    pub kinds: Vec<FaultKind>,
    pub severity: f64,
    pub torques: Vec<TorqueLevel>,
    pub speeds_rpm: Vec<f64>,
    pub hold_s: f64,
    pub ramp_s: f64,
    pub seed: u64,
    pub rig: RigModel,
}

impl Default for RecordingSpec {
    fn default() -> Self {
        Self {
            kinds: vec![FaultKind::None, FaultKind::OuterRace, FaultKind::Distributed],
            severity: 0.7,
            torques: TorqueLevel::ALL.to_vec(),
            speeds_rpm: SPEED_LEVELS_RPM.to_vec(),
            hold_s: 10.0,
            ramp_s: 1.0,
            seed: 1,
            rig: RigModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordingPlan {
    pub source_id: String,
    pub profile: SpeedProfile,
    pub duration_s: f64,
    pub torque: TorqueLevel,
    pub fault: FaultSpec,
    pub seed: u64,
}

impl RecordingSpec {
    pub fn speed_track(&self) -> Result<(SpeedProfile, f64)> {
        if self.speeds_rpm.is_empty() || !(self.hold_s > 0.0) || !(self.ramp_s > 0.0) {
            return invalid("recordings need speed levels and positive hold and ramp times");
        }
        let mut pts = Vec::new();
        let mut t = 0.0;
        for (i, &rpm) in self.speeds_rpm.iter().enumerate() {
            if i > 0 {
                t += self.ramp_s;
            }
            pts.push((t, rpm));
            t += self.hold_s;
            pts.push((t, rpm));
        }
        Ok((SpeedProfile::new(pts)?, t))
    }

    pub fn plan(&self) -> Result<Vec<RecordingPlan>> {
        let (profile, duration_s) = self.speed_track()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::new();
        for &kind in &self.kinds {
            let fault = if kind == FaultKind::None {
                FaultSpec::healthy()
            } else {
                FaultSpec::new(kind, self.severity)?
            };
            for &torque in &self.torques {
                out.push(RecordingPlan {
                    source_id: format!("{}_tq{:03}", kind.name(), torque.percent()),
                    profile: profile.clone(),
                    duration_s,
                    torque,
                    fault,
                    seed: rng.next_u64(),
                });
            }
        }
        Ok(out)
    }

    pub fn render(&self, plan: &RecordingPlan, geometry: &BearingGeometry<f64>) -> Result<crate::signal::Signal<f64>> {
        generate_profile(&self.rig, &plan.profile, plan.torque, plan.duration_s, &plan.fault, geometry, plan.seed)
    }
}
