//! One-Class SVM with a Gaussian kernel, trained on healthy data only.
//!
//! Features are standardised with statistics of the training set, the
//! nu-form dual is solved with SMO, and a point is an inlier when its
//! decision value `sum_i a_i K(sv_i, x) - rho` is non-negative.

pub mod grid;
pub mod kernel;
pub mod scaler;
pub mod solver;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use grid::{default_gamma_grid, default_nu_grid, grid_search, GridCell, GridSearchOutcome};
pub use kernel::{gaussian_kernel, KernelKind, KernelMatrix};
pub use scaler::{fit_scaler, StandardScaler};
pub use solver::{solve_nu_dual, DualSolution, SolverOptions};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcSvmHyperParams {
    /// Upper bound on the training outlier fraction, lower bound on the
    /// support-vector fraction.
    pub nu: f64,
    /// Kernel width.
    pub gamma: f64,
}

impl OcSvmHyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return invalid(format!("nu must lie in (0, 1], got {}", self.nu));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return invalid(format!("gamma must be positive, got {}", self.gamma));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrainOptions {
    pub kernel: KernelKind,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score<T> {
    pub value: T,
    pub is_inlier: bool,
}

/// A trained model. Support vectors are stored in standardised coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcSvmModel<T> {
    pub format_version: u32,
    #[serde(default)]
    pub feature_set: Option<String>,
    #[serde(default)]
    pub feature_names: Vec<String>,
    pub kernel: KernelKind,
    pub nu: f64,
    pub gamma: T,
    pub rho: T,
    pub dual_coeffs: Vec<T>,
    pub support_vectors: Vec<Vec<T>>,
    pub scaler: StandardScaler<T>,
}

/// Fits the scaler, solves the dual and keeps the rows with non-zero
/// coefficients.
pub fn train<T: Real>(
    features: &[Vec<T>],
    params: &OcSvmHyperParams,
    opts: &TrainOptions,
) -> Result<OcSvmModel<T>> {
    train_with_solution(features, params, opts).map(|(m, _)| m)
}

/// Like [`train`], also returning the full dual solution over all training
/// rows.
pub fn train_with_solution<T: Real>(
    features: &[Vec<T>],
    params: &OcSvmHyperParams,
    opts: &TrainOptions,
) -> Result<(OcSvmModel<T>, DualSolution<T>)> {
    params.validate()?;
    if features.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 training vectors, got {}",
            features.len()
        )));
    }
    let scaler = StandardScaler::fit(features)?;
    let scaled = scaler.transform_all(features)?;
    let gamma = T::of(params.gamma);
    let q = KernelMatrix::new(&scaled, opts.kernel, gamma);
    let sol = solve_nu_dual(&q, params.nu, &opts.solver)?;

    let (dual_coeffs, support_vectors) = sol
        .alpha
        .iter()
        .zip(scaled)
        .filter(|(&a, _)| a > T::zero())
        .map(|(&a, row)| (a, row))
        .unzip();
    let model = OcSvmModel {
        format_version: MODEL_FORMAT_VERSION,
        feature_set: None,
        feature_names: Vec::new(),
        kernel: opts.kernel,
        nu: params.nu,
        gamma,
        rho: sol.rho,
        dual_coeffs,
        support_vectors,
        scaler,
    };
    Ok((model, sol))
}

impl<T: Real> OcSvmModel<T> {
    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    pub fn n_support(&self) -> usize {
        self.support_vectors.len()
    }

    /// Decision value for an already standardised vector.
    pub fn decision_scaled(&self, z: &[T]) -> T {
        self.dual_coeffs
            .iter()
            .zip(&self.support_vectors)
            .map(|(&a, sv)| a * self.kernel.eval(sv, z, self.gamma))
            .sum::<T>()
            - self.rho
    }

    pub fn score(&self, feature: &[T]) -> Result<Score<T>> {
        if feature.iter().any(|v| !v.is_finite()) {
            return invalid("feature vector contains a non-finite value");
        }
        let value = self.decision_scaled(&self.scaler.transform(feature)?);
        Ok(Score {
            value,
            is_inlier: value >= T::zero(),
        })
    }

    pub fn score_all(&self, features: &[Vec<T>]) -> Result<Vec<Score<T>>> {
        features.iter().map(|f| self.score(f)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| with_path(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| with_path(path, e))?)
    }

    fn check(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        let d = self.scaler.dim();
        if self.scaler.std.len() != d
            || self.dual_coeffs.len() != self.support_vectors.len()
            || self.support_vectors.iter().any(|sv| sv.len() != d)
        {
            return Err(Error::Parse("inconsistent model dimensions".into()));
        }
        Ok(())
    }
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}
