//! Vibration-based condition monitoring for rolling-element bearings.
//!
//! Signal primitives, time/spectral/envelope/audio features, a one-class
//! SVM trained on healthy data only, evaluation metrics, a synthetic test
//! rig and an end-to-end experiment pipeline.

pub mod error;
pub mod features;
pub mod metrics;
pub mod ocsvm;
pub mod pipeline;
pub mod scalar;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Signal64 = signal::Signal<f64>;
pub type Signal32 = signal::Signal<f32>;
pub type OcSvmModel64 = ocsvm::OcSvmModel<f64>;
pub type OcSvmModel32 = ocsvm::OcSvmModel<f32>;
pub type AmsMatrix64 = features::ams::AmsMatrix<f64>;
