//! Online per-feature statistics and the feature scaling functions.

use crate::error::{Error, Result};

/// Running per-feature mean and sum of squared deviations (Welford's update).
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: Vec<f64>,
    sq_dev_sum: Vec<f64>,
}

impl RunningStats {
    pub fn new(dim: usize) -> Self {
        RunningStats {
            count: 0,
            mean: vec![0.0; dim],
            sq_dev_sum: vec![0.0; dim],
        }
    }

    /// Rebuilds statistics from stored parts, e.g. a model snapshot.
    pub fn from_parts(count: u64, mean: Vec<f64>, sq_dev_sum: Vec<f64>) -> Result<Self> {
        if mean.len() != sq_dev_sum.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                got: sq_dev_sum.len(),
            });
        }
        if sq_dev_sum.iter().any(|s| *s < 0.0 || !s.is_finite())
            || mean.iter().any(|m| !m.is_finite())
        {
            return Err(Error::invalid("statistics must be finite with sq_dev_sum >= 0"));
        }
        if count == 0 && (mean.iter().any(|&m| m != 0.0) || sq_dev_sum.iter().any(|&s| s != 0.0)) {
            return Err(Error::invalid("empty statistics must be zero"));
        }
        Ok(RunningStats {
            count,
            mean,
            sq_dev_sum,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sq_dev_sum(&self) -> &[f64] {
        &self.sq_dev_sum
    }

    /// Sample standard deviation `sqrt(s / (k - 1))`; zero before two observations.
    pub fn std_dev(&self, j: usize) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.sq_dev_sum[j] / (self.count - 1) as f64).sqrt()
        }
    }

    /// Divisor used by [`standardize`](Self::standardize): the standard
    /// deviation, or 1 while it is undefined or zero.
    pub fn scale(&self, j: usize) -> f64 {
        if self.count < 2 || self.sq_dev_sum[j] == 0.0 {
            1.0
        } else {
            self.std_dev(j)
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Folds one observation into the statistics.
    pub fn update(&mut self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
        self.count += 1;
        let k = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.sq_dev_sum).zip(x) {
            let prev = *m;
            *m = prev + (v - prev) / k;
            *s += (v - prev) * (v - *m);
            // rounding can push a zero-variance sum a hair below zero
            if *s < 0.0 {
                *s = 0.0;
            }
        }
        Ok(())
    }

    /// `(x_j - mean_j) / scale_j` for every feature.
    pub fn standardize(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(self.standardize_unchecked(x))
    }

    pub(crate) fn standardize_unchecked(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| (v - self.mean[j]) / self.scale(j))
            .collect()
    }

    /// Inverse of [`standardize`](Self::standardize).
    pub fn destandardize(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(z)?;
        Ok(z.iter()
            .enumerate()
            .map(|(j, &v)| v * self.scale(j) + self.mean[j])
            .collect())
    }
}

/// Logistic function `1 / (1 + exp(-z))`, evaluated without overflow for any
/// finite `z`.
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Sigmoid feature scaling `1 / (1 + exp(-alpha * x + beta))`.
pub fn sigmoid_scale(alpha: f64, beta: f64, x: f64) -> f64 {
    logistic(alpha * x - beta)
}

/// Affine feature scaling `alpha * x + beta`.
pub fn linear_scale(alpha: f64, beta: f64, x: f64) -> f64 {
    alpha * x + beta
}
