//! SMO solver for the nu-one-class dual
//!
//! ```text
//! minimise   1/2 a^T Q a
//! subject to 0 <= a_i <= 1/(nu N),  sum_i a_i = 1
//! ```
//!
//! Each step moves mass between two coordinates. The first index is the
//! increasable coordinate with the smallest gradient; the second is the
//! decreasable coordinate maximising the second-order gain `b^2 / eta`.

use super::kernel::KernelMatrix;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct DualSolution<T> {
    pub alpha: Vec<T>,
    /// Offset: the decision value is `sum_j a_j K(x_j, x) - rho`.
    pub rho: T,
    /// `Q a`, i.e. the kernel expansion evaluated at each training point.
    pub gradient: Vec<T>,
    /// Box bound `1/(nu N)`.
    pub upper: T,
    pub iterations: u64,
    pub max_violation: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 10_000_000,
        }
    }
}

const TAU: f64 = 1e-12;

pub fn solve_nu_dual<T: Real>(
    q: &KernelMatrix<T>,
    nu: f64,
    opts: &SolverOptions,
) -> Result<DualSolution<T>> {
    let n = q.size();
    if n < 1 {
        return invalid("no training points");
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return invalid(format!("nu must lie in (0, 1], got {nu}"));
    }
    let upper = T::one() / (T::of(nu) * T::of_usize(n));

    let mut alpha = vec![T::zero(); n];
    let mut remaining = T::one();
    for a in alpha.iter_mut() {
        if remaining <= T::zero() {
            break;
        }
        *a = upper.min(remaining);
        remaining -= *a;
    }

    let mut grad = vec![T::zero(); n];
    for (j, &a) in alpha.iter().enumerate() {
        if a > T::zero() {
            for (g, &k) in grad.iter_mut().zip(q.row(j)) {
                *g += a * k;
            }
        }
    }

    // never ask for more than the scalar type can resolve
    let tol = T::of(opts.tol).max(T::epsilon() * T::of(64.0));
    let tau = T::of(TAU);
    let mut iterations = 0u64;
    let violation = loop {
        let mut i = usize::MAX;
        let mut gmin = T::infinity();
        let mut gmax = T::neg_infinity();
        for t in 0..n {
            if alpha[t] < upper && grad[t] < gmin {
                gmin = grad[t];
                i = t;
            }
            if alpha[t] > T::zero() && grad[t] > gmax {
                gmax = grad[t];
            }
        }
        if i == usize::MAX || gmax - gmin < tol {
            break if i == usize::MAX { T::zero() } else { gmax - gmin };
        }
        if iterations >= opts.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                violation: (gmax - gmin).as_f64(),
            });
        }

        let qi = q.row(i);
        let qii = qi[i];
        let mut j = usize::MAX;
        let mut best = T::neg_infinity();
        let mut eta_j = tau;
        for t in 0..n {
            if alpha[t] > T::zero() && grad[t] > gmin {
                let b = grad[t] - gmin;
                let mut eta = qii + q.get(t, t) - T::of(2.0) * qi[t];
                if eta <= T::zero() {
                    eta = tau;
                }
                let gain = b * b / eta;
                if gain > best {
                    best = gain;
                    j = t;
                    eta_j = eta;
                }
            }
        }

        let room_i = upper - alpha[i];
        let room_j = alpha[j];
        let delta = ((grad[j] - grad[i]) / eta_j).min(room_i).min(room_j);
        if delta == room_i {
            alpha[i] = upper;
        } else {
            alpha[i] += delta;
        }
        if delta == room_j {
            alpha[j] = T::zero();
        } else {
            alpha[j] -= delta;
        }

        let qj = q.row(j);
        for ((g, &ki), &kj) in grad.iter_mut().zip(qi).zip(qj) {
            *g += delta * (ki - kj);
        }
        iterations += 1;
    };

    let rho = offset(&alpha, &grad, upper);
    Ok(DualSolution {
        alpha,
        rho,
        gradient: grad,
        upper,
        iterations,
        max_violation: violation,
    })
}

/// Mean gradient over free coefficients; without free coefficients, the
/// midpoint of the feasible interval bounded by the at-bound sets.
fn offset<T: Real>(alpha: &[T], grad: &[T], upper: T) -> T {
    let mut free_sum = T::zero();
    let mut free_n = 0usize;
    let mut at_upper_max = T::neg_infinity();
    let mut at_zero_min = T::infinity();
    for (&a, &g) in alpha.iter().zip(grad) {
        if a >= upper {
            at_upper_max = at_upper_max.max(g);
        } else if a <= T::zero() {
            at_zero_min = at_zero_min.min(g);
        } else {
            free_sum += g;
            free_n += 1;
        }
    }
    if free_n > 0 {
        free_sum / T::of_usize(free_n)
    } else if at_upper_max.is_finite() && at_zero_min.is_finite() {
        (at_upper_max + at_zero_min) / T::of(2.0)
    } else if at_upper_max.is_finite() {
        at_upper_max
    } else {
        at_zero_min
    }
}
