use super::{Hyperparams, ModelParams, Variant};
use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::scaling::{linear_scale, logistic, sigmoid_scale};

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside logarithms.
pub const PROB_CLAMP: f64 = 1e-12;

/// Scaled value of feature `j` as seen by the weight vector.
fn scaled_feature(p: &ModelParams, j: usize, x: f64) -> f64 {
    match p.variant {
        Variant::Fs | Variant::Fs1 => sigmoid_scale(p.alpha_at(j), p.beta_at(j), x),
        Variant::Fs2 | Variant::Fs3 => linear_scale(p.alpha_at(j), p.beta_at(j), x),
        _ => x,
    }
}

/// Linear score of `x` (already standardized for GN). For FS-3 the weights
/// are absorbed into the scale parameters.
pub fn score(p: &ModelParams, x: &[f64]) -> f64 {
    let sum: f64 = match p.variant {
        Variant::Fs3 => x
            .iter()
            .enumerate()
            .map(|(j, &v)| scaled_feature(p, j, v))
            .sum(),
        _ => x
            .iter()
            .enumerate()
            .map(|(j, &v)| p.w[j] * scaled_feature(p, j, v))
            .sum(),
    };
    sum + p.b
}

/// Probability of the positive class under the logistic model.
pub fn logistic_prob(p: &ModelParams, x: &[f64]) -> f64 {
    logistic(score(p, x))
}

/// One stochastic gradient step of the regularized cross-entropy objective
/// for the logistic variants (SGD, GN, FS, FS-1, FS-2, FS-3).
///
/// All factors are computed from the pre-update parameters; `params` is left
/// untouched if any updated value is non-finite.
pub fn logistic_step(
    params: &mut ModelParams,
    x: &[f64],
    label: Label,
    eta: f64,
    h: &Hyperparams,
) -> Result<()> {
    let variant = params.variant;
    if variant.is_passive_aggressive() {
        return Err(Error::invalid(format!(
            "{} is not a logistic learner",
            variant.name()
        )));
    }
    let old = &*params;
    let err = label.target() - logistic_prob(old, x);
    let w_decay = 1.0 - 2.0 * h.lambda_per_instance() * eta;
    let a_decay = 1.0 - 2.0 * h.mu_per_instance() * eta;
    let b_decay = 1.0 - 2.0 * h.nu_per_instance() * eta;

    let mut next = old.clone();
    next.b = old.b + eta * err;

    for (j, &xj) in x.iter().enumerate() {
        let wj = old.w[j];
        match variant {
            Variant::Sgd | Variant::Gn => {
                next.w[j] = wj * w_decay + eta * err * xj;
            }
            Variant::Fs | Variant::Fs1 => {
                let s = scaled_feature(old, j, xj);
                let slope = s * (1.0 - s);
                next.w[j] = wj * w_decay + eta * err * s;
                if let Some(alpha) = &mut next.alpha {
                    alpha[j] = old.alpha_at(j) * a_decay + eta * xj * wj * slope * err;
                }
                if let Some(beta) = &mut next.beta {
                    beta[j] = old.beta_at(j) * b_decay - eta * err * wj * slope;
                }
            }
            Variant::Fs2 => {
                let s = scaled_feature(old, j, xj);
                next.w[j] = wj * w_decay + eta * err * s;
                if let Some(alpha) = &mut next.alpha {
                    alpha[j] = old.alpha_at(j) * a_decay + eta * err * wj * xj;
                }
                if let Some(beta) = &mut next.beta {
                    beta[j] = old.beta_at(j) * b_decay + eta * err * wj;
                }
            }
            Variant::Fs3 => {
                if let Some(alpha) = &mut next.alpha {
                    alpha[j] = old.alpha_at(j) * a_decay + eta * err * xj;
                }
                if let Some(beta) = &mut next.beta {
                    beta[j] = old.beta_at(j) * b_decay + eta * err;
                }
            }
            Variant::Pa | Variant::Pa1 | Variant::Pa2 => unreachable!(),
        }
    }

    next.ensure_finite()?;
    *params = next;
    Ok(())
}

/// Per-instance regularized cross-entropy `E` with the `{0, 1}` target coding
/// and regularizers divided by `n_train`.
pub fn cross_entropy_objective(p: &ModelParams, x: &[f64], label: Label, h: &Hyperparams) -> f64 {
    let y = logistic_prob(p, x).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    let t = label.target();
    let loss = -t * y.ln() - (1.0 - t) * (1.0 - y).ln();
    let sq = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
    let mut reg = 0.0;
    if p.variant.trains_w() {
        reg += h.lambda_per_instance() * sq(&p.w);
    }
    if let Some(alpha) = &p.alpha {
        reg += h.mu_per_instance() * sq(alpha);
    }
    if let Some(beta) = &p.beta {
        reg += h.nu_per_instance() * sq(beta);
    }
    loss + reg
}

/// `d²E/dw_j² = s_j² y (1 - y) + 2 lambda'`, where `s_j` is the scaled feature.
pub fn w_curvature(p: &ModelParams, x: &[f64], j: usize, h: &Hyperparams) -> f64 {
    let y = logistic_prob(p, x);
    let s = scaled_feature(p, j, x[j]);
    s * s * y * (1.0 - y) + 2.0 * h.lambda_per_instance()
}

/// Diagonal second derivatives of the FS-2 objective for coordinate `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fs2Curvature {
    pub w: f64,
    pub alpha: f64,
    pub beta: f64,
    pub b: f64,
}

impl Fs2Curvature {
    pub fn all_positive(&self) -> bool {
        self.w > 0.0 && self.alpha > 0.0 && self.beta > 0.0 && self.b > 0.0
    }
}

pub fn fs2_curvature(p: &ModelParams, x: &[f64], j: usize, h: &Hyperparams) -> Fs2Curvature {
    let y = logistic_prob(p, x);
    let v = y * (1.0 - y);
    let s = linear_scale(p.alpha_at(j), p.beta_at(j), x[j]);
    let wj = p.w[j];
    Fs2Curvature {
        w: v * s * s + 2.0 * h.lambda_per_instance(),
        alpha: v * wj * wj * x[j] * x[j] + 2.0 * h.mu_per_instance(),
        beta: v * wj * wj + 2.0 * h.nu_per_instance(),
        b: v,
    }
}
