use super::{ModelParams, Variant};
use crate::dataset::Label;
use crate::error::{Error, Result};

/// Outcome of a Passive-Aggressive step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PaUpdate {
    /// Margin was at least 1; nothing changed.
    Passive,
    /// Hinge loss `loss` was positive and the weights moved by step size `tau`.
    Aggressive { loss: f64, tau: f64 },
    /// Positive loss on a zero-norm input; update skipped.
    Degenerate,
}

/// Passive-Aggressive update on the input augmented with a constant 1
/// (whose weight is the bias `b`).
///
/// With hinge loss `l = max(0, 1 - t (w.x + b))` and `q = |x|^2 + 1`:
/// PA uses `tau = l / q`, PA-1 `min(c, l / q)`, PA-2 `l / (q + 1 / (2c))`.
pub fn pa_step(params: &mut ModelParams, x: &[f64], label: Label, c: f64) -> Result<PaUpdate> {
    let t = label.sign();
    let margin = t * (params.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + params.b);
    let loss = (1.0 - margin).max(0.0);
    if loss == 0.0 {
        return Ok(PaUpdate::Passive);
    }
    let sq_norm = x.iter().map(|v| v * v).sum::<f64>() + 1.0;
    if sq_norm == 0.0 {
        return Ok(PaUpdate::Degenerate);
    }
    let tau = match params.variant {
        Variant::Pa => loss / sq_norm,
        Variant::Pa1 => c.min(loss / sq_norm),
        Variant::Pa2 => loss / (sq_norm + 1.0 / (2.0 * c)),
        other => {
            return Err(Error::invalid(format!(
                "{} is not a passive-aggressive learner",
                other.name()
            )))
        }
    };
    let mut next = params.clone();
    for (w, v) in next.w.iter_mut().zip(x) {
        *w += tau * t * v;
    }
    next.b += tau * t;
    next.ensure_finite()?;
    *params = next;
    Ok(PaUpdate::Aggressive { loss, tau })
}
