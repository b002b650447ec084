use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `exp(-gamma ||x - y||^2)`
    #[default]
    Gaussian,
    /// `exp(-gamma ||x - y||)`
    Unsquared,
}

impl KernelKind {
    #[inline]
    pub fn eval<T: Real>(self, x: &[T], y: &[T], gamma: T) -> T {
        let d2: T = x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum();
        match self {
            KernelKind::Gaussian => (-gamma * d2).exp(),
            KernelKind::Unsquared => (-gamma * d2.sqrt()).exp(),
        }
    }
}

/// Gaussian kernel `exp(-gamma ||x - y||^2)`.
pub fn gaussian_kernel<T: Real>(x: &[T], y: &[T], gamma: T) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if !(gamma > T::zero()) {
        return invalid(format!("gamma must be positive, got {gamma}"));
    }
    Ok(KernelKind::Gaussian.eval(x, y, gamma))
}

/// Dense symmetric Gram matrix.
#[derive(Debug, Clone)]
pub struct KernelMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> KernelMatrix<T> {
    pub fn new(rows: &[Vec<T>], kind: KernelKind, gamma: T) -> Self {
        let n = rows.len();
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
            for j in 0..i {
                let k = kind.eval(&rows[i], &rows[j], gamma);
                data[i * n + j] = k;
                data[j * n + i] = k;
            }
        }
        Self { n, data }
    }

    /// Wraps a precomputed row-major `n x n` matrix.
    pub fn from_dense(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }
}
