use super::Variant;
use crate::error::{Error, Result};

/// Parameters of a linear model. Which scale vectors exist depends on the
/// variant: FS and FS-2 carry both, FS-1 only `beta` (its slope is fixed at
/// 1), FS-3 both with `w` pinned to 1, and the remaining variants neither.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub variant: Variant,
    pub w: Vec<f64>,
    pub b: f64,
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
}

impl ModelParams {
    /// Initial parameters: `w = 0` (`1` for FS-3), `b = 0`, `alpha = 1`, `beta = 0`.
    pub fn new(variant: Variant, dim: usize) -> Self {
        let w_init = if variant.trains_w() { 0.0 } else { 1.0 };
        ModelParams {
            variant,
            w: vec![w_init; dim],
            b: 0.0,
            alpha: variant.has_alpha().then(|| vec![1.0; dim]),
            beta: variant.has_beta().then(|| vec![0.0; dim]),
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// Slope of feature `j`; 1 when the variant has no slope vector.
    pub fn alpha_at(&self, j: usize) -> f64 {
        self.alpha.as_ref().map_or(1.0, |a| a[j])
    }

    pub fn beta_at(&self, j: usize) -> f64 {
        self.beta.as_ref().map_or(0.0, |b| b[j])
    }

    /// Checks the shape matches the variant and dimension.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        let check = |name: &str, v: &Option<Vec<f64>>, expected: bool| -> Result<()> {
            match (v, expected) {
                (Some(v), true) if v.len() == dim => Ok(()),
                (None, false) => Ok(()),
                _ => Err(Error::invalid(format!(
                    "{name} shape does not match variant {}",
                    self.variant.name()
                ))),
            }
        };
        check("alpha", &self.alpha, self.variant.has_alpha())?;
        check("beta", &self.beta, self.variant.has_beta())?;
        Ok(())
    }

    /// Returns a numeric-failure error naming the first non-finite entry.
    pub fn ensure_finite(&self) -> Result<()> {
        let fail = |param: String| {
            Err(Error::NumericFailure {
                param,
                instance: None,
                context: None,
            })
        };
        if let Some(j) = self.w.iter().position(|v| !v.is_finite()) {
            return fail(format!("w[{j}]"));
        }
        if !self.b.is_finite() {
            return fail("b".into());
        }
        for (name, v) in [("alpha", &self.alpha), ("beta", &self.beta)] {
            if let Some(j) = v.as_ref().and_then(|v| v.iter().position(|x| !x.is_finite())) {
                return fail(format!("{name}[{j}]"));
            }
        }
        Ok(())
    }

    /// Flattened `w, b, alpha, beta` (present parts only).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = self.w.clone();
        out.push(self.b);
        for v in [&self.alpha, &self.beta].into_iter().flatten() {
            out.extend_from_slice(v);
        }
        out
    }

    /// Inverse of [`to_flat`](Self::to_flat) for the shape of `self`.
    pub fn with_flat(&self, flat: &[f64]) -> Self {
        let dim = self.dim();
        let mut p = self.clone();
        p.w.copy_from_slice(&flat[..dim]);
        p.b = flat[dim];
        let mut at = dim + 1;
        for v in [&mut p.alpha, &mut p.beta].into_iter().flatten() {
            v.copy_from_slice(&flat[at..at + dim]);
            at += dim;
        }
        p
    }

    /// Names of the flattened coordinates, matching [`to_flat`](Self::to_flat).
    pub fn flat_names(&self) -> Vec<String> {
        let dim = self.dim();
        let mut names: Vec<String> = (0..dim).map(|j| format!("w[{j}]")).collect();
        names.push("b".into());
        if self.alpha.is_some() {
            names.extend((0..dim).map(|j| format!("alpha[{j}]")));
        }
        if self.beta.is_some() {
            names.extend((0..dim).map(|j| format!("beta[{j}]")));
        }
        names
    }
}
