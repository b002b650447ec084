use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Smallest standard deviation used for scaling.
pub const STD_FLOOR: f64 = 1e-12;

/// Per-dimension standardisation fitted on training data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardScaler<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

pub(crate) fn check_matrix<T: Real>(rows: &[Vec<T>]) -> Result<usize> {
    let Some(first) = rows.first() else {
        return invalid("empty feature matrix");
    };
    let d = first.len();
    if d == 0 {
        return invalid("feature vectors have no components");
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return invalid(format!("row {i} contains a non-finite value"));
        }
    }
    Ok(d)
}

impl<T: Real> StandardScaler<T> {
    /// Mean and population standard deviation of every column.
    pub fn fit(rows: &[Vec<T>]) -> Result<Self> {
        let d = check_matrix(rows)?;
        if rows.len() < 2 {
            return invalid("scaler needs at least 2 rows");
        }
        let n = T::of_usize(rows.len());
        let mut mean = vec![T::zero(); d];
        for r in rows {
            for (m, &v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![T::zero(); d];
        for r in rows {
            for ((s, &v), &m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let floor = T::of(STD_FLOOR);
        let std = var.into_iter().map(|s| (s / n).sqrt().max(floor)).collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect())
    }

    pub fn transform_all(&self, rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

/// Fits a scaler on `train_set`; see [`StandardScaler::fit`].
pub fn fit_scaler<T: Real>(train_set: &[Vec<T>]) -> Result<StandardScaler<T>> {
    StandardScaler::fit(train_set)
}
