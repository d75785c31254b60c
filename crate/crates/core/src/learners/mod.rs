//! Online linear learners sharing one predict-then-learn contract.
//!
//! Nine base variants are provided: plain logistic SGD, SGD on running
//! standardized features (GN), four jointly learned feature-scaling models
//! (FS, FS-1, FS-2, FS-3) and three Passive-Aggressive classifiers. Each can
//! be wrapped in parameter averaging, giving the eighteen-method roster.

mod averaged;
mod logistic;
mod pa;
mod params;
mod snapshot;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Instance, Label};
use crate::error::{Error, Result};
use crate::scaling::RunningStats;

pub use averaged::AveragedParams;
pub use logistic::{
    cross_entropy_objective, fs2_curvature, logistic_prob, logistic_step, score, w_curvature,
    Fs2Curvature, PROB_CLAMP,
};
pub use pa::{pa_step, PaUpdate};
pub use params::ModelParams;

/// Base learner variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Sgd,
    Gn,
    Fs,
    Fs1,
    Fs2,
    Fs3,
    Pa,
    Pa1,
    Pa2,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::Sgd,
        Variant::Gn,
        Variant::Fs,
        Variant::Fs1,
        Variant::Fs2,
        Variant::Fs3,
        Variant::Pa,
        Variant::Pa1,
        Variant::Pa2,
    ];

    /// Compact tag used in model snapshots.
    pub fn tag(self) -> &'static str {
        match self {
            Variant::Sgd => "SGD",
            Variant::Gn => "GN",
            Variant::Fs => "FS",
            Variant::Fs1 => "FS1",
            Variant::Fs2 => "FS2",
            Variant::Fs3 => "FS3",
            Variant::Pa => "PA",
            Variant::Pa1 => "PA1",
            Variant::Pa2 => "PA2",
        }
    }

    /// Display name, e.g. `FS-2`.
    pub fn name(self) -> &'static str {
        match self {
            Variant::Sgd => "SGD",
            Variant::Gn => "GN",
            Variant::Fs => "FS",
            Variant::Fs1 => "FS-1",
            Variant::Fs2 => "FS-2",
            Variant::Fs3 => "FS-3",
            Variant::Pa => "PA",
            Variant::Pa1 => "PA-1",
            Variant::Pa2 => "PA-2",
        }
    }

    pub fn is_passive_aggressive(self) -> bool {
        matches!(self, Variant::Pa | Variant::Pa1 | Variant::Pa2)
    }

    pub fn has_alpha(self) -> bool {
        matches!(self, Variant::Fs | Variant::Fs2 | Variant::Fs3)
    }

    pub fn has_beta(self) -> bool {
        matches!(self, Variant::Fs | Variant::Fs1 | Variant::Fs2 | Variant::Fs3)
    }

    /// Whether `w` is a trained parameter (FS-3 folds it into alpha and beta).
    pub fn trains_w(self) -> bool {
        !matches!(self, Variant::Fs3)
    }

    /// Hyperparameters this variant reads.
    pub fn uses(self) -> HyperUse {
        let pa = self.is_passive_aggressive();
        HyperUse {
            lambda: !pa && self.trains_w(),
            mu: self.has_alpha(),
            nu: self.has_beta(),
            c: pa,
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect::<String>()
            .to_ascii_uppercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.tag() == norm)
            .ok_or_else(|| Error::invalid(format!("unknown method `{s}`")))
    }
}

/// Which hyperparameters a variant depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HyperUse {
    pub lambda: bool,
    pub mu: bool,
    pub nu: bool,
    pub c: bool,
}

/// A roster entry: a base variant, optionally with parameter averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Method {
    pub variant: Variant,
    pub averaged: bool,
}

impl Method {
    pub fn new(variant: Variant, averaged: bool) -> Self {
        Method { variant, averaged }
    }

    /// All eighteen methods, each base variant followed by its averaged form.
    pub fn roster() -> Vec<Method> {
        Variant::ALL
            .into_iter()
            .flat_map(|v| [Method::new(v, false), Method::new(v, true)])
            .collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.variant.name())?;
        if self.averaged {
            f.write_str("+avg")?;
        }
        Ok(())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let lower = trimmed.to_ascii_lowercase();
        match lower.strip_suffix("+avg") {
            Some(base) => Ok(Method::new(base.parse()?, true)),
            None => Ok(Method::new(trimmed.parse()?, false)),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Learner hyperparameters.
///
/// Regularization coefficients are given per dataset and divided by
/// `n_train` inside the updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub c: f64,
    pub eta0: f64,
    pub passes: u32,
    pub n_train: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda: 0.0,
            mu: 0.0,
            nu: 0.0,
            c: 1.0,
            eta0: 0.1,
            passes: 1,
            n_train: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(self.lambda) && ok(self.mu) && ok(self.nu)) {
            return Err(Error::invalid("regularization coefficients must be finite and >= 0"));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::invalid("c must be positive"));
        }
        if !(self.eta0.is_finite() && self.eta0 > 0.0) {
            return Err(Error::invalid("eta0 must be positive"));
        }
        if self.passes == 0 || self.n_train == 0 {
            return Err(Error::invalid("passes and n_train must be at least 1"));
        }
        Ok(())
    }

    pub fn lambda_per_instance(&self) -> f64 {
        self.lambda / self.n_train as f64
    }

    pub fn mu_per_instance(&self) -> f64 {
        self.mu / self.n_train as f64
    }

    pub fn nu_per_instance(&self) -> f64 {
        self.nu / self.n_train as f64
    }

    /// Short rendering of the values `variant` actually uses, e.g. `lambda=0.1 mu=0 nu=10`.
    pub fn describe(&self, variant: Variant) -> String {
        let used = variant.uses();
        let mut parts = Vec::new();
        if used.lambda {
            parts.push(format!("lambda={}", self.lambda));
        }
        if used.mu {
            parts.push(format!("mu={}", self.mu));
        }
        if used.nu {
            parts.push(format!("nu={}", self.nu));
        }
        if used.c {
            parts.push(format!("c={}", self.c));
        }
        parts.join(" ")
    }
}

/// Linearly decaying learning rate `eta0 / (1 + k / (T * N))`.
pub fn learning_rate(k: u64, h: &Hyperparams) -> f64 {
    let horizon = h.passes as f64 * h.n_train as f64;
    h.eta0 / (1.0 + k as f64 / horizon)
}

/// Predict-then-learn interface of a one-pass learner.
pub trait OnlineLearner {
    /// Linear score; non-negative scores classify as positive.
    fn score(&self, x: &[f64]) -> Result<f64>;

    fn classify(&self, x: &[f64]) -> Result<Label> {
        Ok(if self.score(x)? >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        })
    }

    /// Consumes one labelled instance.
    fn learn_one(&mut self, inst: &Instance) -> Result<()>;

    /// Classifies `inst` with the current model, then learns from it.
    /// Returns the prediction made before the label was used.
    fn predict_then_learn(&mut self, inst: &Instance) -> Result<Label> {
        let predicted = self.classify(&inst.features)?;
        self.learn_one(inst)?;
        Ok(predicted)
    }

    /// Lets the learner adapt to an unlabelled instance. No-op by default.
    fn observe_unlabeled(&mut self, _x: &[f64]) -> Result<()> {
        Ok(())
    }

    /// Number of training instances consumed so far.
    fn instances_seen(&self) -> u64;
}

/// Concrete learner for any roster method.
#[derive(Debug, Clone, PartialEq)]
pub struct Learner {
    method: Method,
    params: ModelParams,
    stats: Option<RunningStats>,
    hyper: Hyperparams,
    step: u64,
    average: Option<AveragedParams>,
}

impl Learner {
    pub fn new(method: Method, dim: usize, hyper: Hyperparams) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("feature dimension must be positive"));
        }
        hyper.validate()?;
        let params = ModelParams::new(method.variant, dim);
        let average = method.averaged.then(|| AveragedParams::new(&params));
        Ok(Learner {
            method,
            stats: (method.variant == Variant::Gn).then(|| RunningStats::new(dim)),
            params,
            hyper,
            step: 0,
            average,
        })
    }

    /// Wraps this learner in parameter averaging. Snapshots start with the
    /// next instance.
    pub fn averaged(mut self) -> Self {
        if self.average.is_none() {
            self.method.averaged = true;
            self.average = Some(AveragedParams::new(&self.params));
        }
        self
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn variant(&self) -> Variant {
        self.method.variant
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    /// Most recent (non-averaged) parameters.
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn average(&self) -> Option<&AveragedParams> {
        self.average.as_ref()
    }

    pub fn stats(&self) -> Option<&RunningStats> {
        self.stats.as_ref()
    }

    /// Parameters used for prediction: the running average for averaged
    /// methods once at least one snapshot exists, otherwise the current ones.
    pub fn effective_params(&self) -> std::borrow::Cow<'_, ModelParams> {
        match self.average.as_ref().and_then(AveragedParams::mean) {
            Some(mean) => std::borrow::Cow::Owned(mean),
            None => std::borrow::Cow::Borrowed(&self.params),
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

    fn prepare(&self, x: &[f64]) -> Vec<f64> {
        match &self.stats {
            Some(stats) => stats.standardize_unchecked(x),
            None => x.to_vec(),
        }
    }

    fn update(&mut self, prepared: &[f64], label: Label) -> Result<()> {
        if self.variant().is_passive_aggressive() {
            pa_step(&mut self.params, prepared, label, self.hyper.c)?;
        } else {
            let eta = learning_rate(self.step, &self.hyper);
            logistic_step(&mut self.params, prepared, label, eta, &self.hyper)?;
        }
        self.step += 1;
        if let Some(avg) = &mut self.average {
            avg.accumulate(&self.params);
        }
        Ok(())
    }

    fn classify_prepared(&self, prepared: &[f64]) -> Label {
        if score(&self.effective_params(), prepared) >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// Serializes the model to the flat text snapshot format.
    pub fn to_snapshot(&self) -> String {
        snapshot::write(self)
    }

    /// Restores a model from [`to_snapshot`](Self::to_snapshot) output.
    /// Hyperparameters are not stored and come back as defaults.
    pub fn from_snapshot(text: &str) -> Result<Self> {
        snapshot::read(text)
    }

    pub(crate) fn from_parts(
        method: Method,
        params: ModelParams,
        average: Option<AveragedParams>,
        stats: Option<RunningStats>,
    ) -> Self {
        Learner {
            method,
            params,
            stats,
            hyper: Hyperparams::default(),
            step: 0,
            average,
        }
    }
}

impl OnlineLearner for Learner {
    fn score(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(score(&self.effective_params(), &self.prepare(x)))
    }

    fn learn_one(&mut self, inst: &Instance) -> Result<()> {
        self.predict_then_learn(inst).map(|_| ())
    }

    // GN folds the instance into its statistics before standardizing it,
    // for both the prediction and the update.
    fn predict_then_learn(&mut self, inst: &Instance) -> Result<Label> {
        self.check_dim(&inst.features)?;
        if let Some(stats) = &mut self.stats {
            stats.update(&inst.features)?;
        }
        let prepared = self.prepare(&inst.features);
        let predicted = self.classify_prepared(&prepared);
        self.update(&prepared, inst.label)?;
        Ok(predicted)
    }

    fn observe_unlabeled(&mut self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        if let Some(stats) = &mut self.stats {
            stats.update(x)?;
        }
        Ok(())
    }

    fn instances_seen(&self) -> u64 {
        self.step
    }
}
