use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train, OcSvmHyperParams, TrainOptions};
use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub nu: f64,
    pub gamma: f64,
    pub eval_inliers: usize,
    pub eval_total: usize,
}

impl GridCell {
    pub fn inlier_rate(&self) -> f64 {
        self.eval_inliers as f64 / self.eval_total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchOutcome {
    pub best: OcSvmHyperParams,
    /// Every cell in `nu`-major order.
    pub cells: Vec<GridCell>,
}

/// Default `nu` grid.
pub fn default_nu_grid() -> Vec<f64> {
    vec![0.01, 0.02, 0.05, 0.1, 0.2]
}

/// Default `gamma` grid: `2^-10 ..= 2^4`.
pub fn default_gamma_grid() -> Vec<f64> {
    (-10..=4).map(|e| 2f64.powi(e)).collect()
}

/// Exhaustive search maximising the inlier rate on a healthy-only
/// evaluation set. Ties prefer the larger `nu`, then the smaller `gamma`.
/// Cells are trained in parallel; the result equals a sequential scan.
pub fn grid_search<T: Real>(
    train_set: &[Vec<T>],
    eval_set: &[Vec<T>],
    nu_grid: &[f64],
    gamma_grid: &[f64],
    opts: &TrainOptions,
) -> Result<GridSearchOutcome> {
    if nu_grid.is_empty() || gamma_grid.is_empty() {
        return invalid("grid search needs at least one nu and one gamma");
    }
    if eval_set.is_empty() {
        return invalid("grid search needs a non-empty evaluation set");
    }
    let pairs: Vec<(f64, f64)> = nu_grid
        .iter()
        .flat_map(|&nu| gamma_grid.iter().map(move |&gamma| (nu, gamma)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(nu, gamma)| {
            let model = train(train_set, &OcSvmHyperParams { nu, gamma }, opts)?;
            let inliers = model
                .score_all(eval_set)?
                .iter()
                .filter(|s| s.is_inlier)
                .count();
            Ok(GridCell {
                nu,
                gamma,
                eval_inliers: inliers,
                eval_total: eval_set.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = cells
        .iter()
        .copied()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("non-empty grid");
    Ok(GridSearchOutcome {
        best: OcSvmHyperParams {
            nu: best.nu,
            gamma: best.gamma,
        },
        cells,
    })
}

fn better(a: &GridCell, b: &GridCell) -> bool {
    use std::cmp::Ordering::*;
    match a.eval_inliers.cmp(&b.eval_inliers) {
        Greater => true,
        Less => false,
        Equal => match a.nu.total_cmp(&b.nu) {
            Greater => true,
            Less => false,
            Equal => a.gamma < b.gamma,
        },
    }
}
