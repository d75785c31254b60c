//! One-pass training, accuracy evaluation, validation grid search and
//! multi-seed experiments over the method roster.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::learners::{Hyperparams, Learner, Method, OnlineLearner, Variant};

/// Default values tried for the regularization coefficients.
pub const DEFAULT_REG_GRID: [f64; 6] = [0.0, 0.01, 0.1, 1.0, 10.0, 100.0];
/// Default values tried for the Passive-Aggressive aggressiveness `c`.
pub const DEFAULT_C_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CurvePoint {
    pub instances_seen: u64,
    pub errors: u64,
}

/// Running count of training-time misclassifications.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CumulativeErrorCurve {
    points: Vec<CurvePoint>,
}

impl CumulativeErrorCurve {
    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn final_errors(&self) -> u64 {
        self.points.last().map_or(0, |p| p.errors)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when errors never decrease and never exceed the instances seen.
    pub fn is_well_formed(&self) -> bool {
        let mut prev = 0;
        self.points.iter().all(|p| {
            let ok = p.errors >= prev && p.errors <= p.instances_seen;
            prev = p.errors;
            ok
        })
    }

    /// CSV with header `instances_seen,cumulative_errors`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("instances_seen,cumulative_errors\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.instances_seen, p.errors));
        }
        out
    }
}

/// Streams `train` through `learner` once, classifying each instance before
/// learning from it.
pub fn run_one_pass<L: OnlineLearner + ?Sized>(
    learner: &mut L,
    train: &Dataset,
) -> Result<CumulativeErrorCurve> {
    let start = learner.instances_seen();
    let mut errors = 0;
    let mut points = Vec::with_capacity(train.len());
    for (i, inst) in train.iter().enumerate() {
        let predicted = learner
            .predict_then_learn(inst)
            .map_err(|e| e.at_instance(i))?;
        if predicted != inst.label {
            errors += 1;
        }
        points.push(CurvePoint {
            instances_seen: i as u64 + 1,
            errors,
        });
    }
    assert_eq!(
        learner.instances_seen() - start,
        train.len() as u64,
        "each training instance must be learned exactly once"
    );
    Ok(CumulativeErrorCurve { points })
}

/// Fraction of correctly classified instances; the model is not changed.
pub fn evaluate<L: OnlineLearner + ?Sized>(model: &L, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty dataset"));
    }
    let mut correct = 0usize;
    for inst in data {
        if model.classify(&inst.features)? == inst.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Like [`evaluate`], but lets a copy of the model keep adapting its
/// unsupervised statistics to each (unlabelled) instance before classifying it.
pub fn evaluate_adaptive<L: OnlineLearner + Clone>(model: &L, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty dataset"));
    }
    let mut model = model.clone();
    let mut correct = 0usize;
    for inst in data {
        model.observe_unlabeled(&inst.features)?;
        if model.classify(&inst.features)? == inst.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Candidate values per hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub c: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            lambda: DEFAULT_REG_GRID.to_vec(),
            mu: DEFAULT_REG_GRID.to_vec(),
            nu: DEFAULT_REG_GRID.to_vec(),
            c: DEFAULT_C_GRID.to_vec(),
        }
    }
}

fn sorted_axis(name: &str, values: &[f64], used: bool, fallback: f64) -> Result<Vec<f64>> {
    if !used {
        return Ok(vec![fallback]);
    }
    if values.is_empty() {
        return Err(Error::invalid(format!("empty grid for {name}")));
    }
    let mut v = values.to_vec();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite value in {name} grid")));
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    Ok(v)
}

impl Grid {
    /// Cartesian product over the hyperparameters `variant` uses, in
    /// ascending lexicographic `(lambda, mu, nu, c)` order. Unused values are
    /// taken from `base`.
    pub fn candidates(&self, variant: Variant, base: &Hyperparams) -> Result<Vec<Hyperparams>> {
        let used = variant.uses();
        let lambda = sorted_axis("lambda", &self.lambda, used.lambda, 0.0)?;
        let mu = sorted_axis("mu", &self.mu, used.mu, 0.0)?;
        let nu = sorted_axis("nu", &self.nu, used.nu, 0.0)?;
        let c = sorted_axis("c", &self.c, used.c, base.c)?;
        let mut out = Vec::with_capacity(lambda.len() * mu.len() * nu.len() * c.len());
        for &l in &lambda {
            for &m in &mu {
                for &n in &nu {
                    for &cc in &c {
                        let h = Hyperparams {
                            lambda: l,
                            mu: m,
                            nu: n,
                            c: cc,
                            ..*base
                        };
                        h.validate()?;
                        out.push(h);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Settings shared by grid search and experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub grid: Grid,
    pub eta0: f64,
    pub validation_fraction: f64,
    /// Keep updating GN statistics on evaluation data.
    pub adapt_test_stats: bool,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            grid: Grid::default(),
            eta0: 0.1,
            validation_fraction: 0.2,
            adapt_test_stats: false,
        }
    }
}

impl Protocol {
    fn base_hyper(&self, n_train: usize) -> Hyperparams {
        Hyperparams {
            eta0: self.eta0,
            n_train,
            ..Hyperparams::default()
        }
    }

    fn score(&self, model: &Learner, data: &Dataset) -> Result<f64> {
        if self.adapt_test_stats {
            evaluate_adaptive(model, data)
        } else {
            evaluate(model, data)
        }
    }
}

/// Trains `method` once over `train` with `hyper` (whose `n_train` is set to
/// `train.len()`).
pub fn train_model(
    method: Method,
    train: &Dataset,
    hyper: Hyperparams,
) -> Result<(Learner, CumulativeErrorCurve)> {
    let hyper = Hyperparams {
        n_train: train.len().max(1),
        ..hyper
    };
    let mut learner = Learner::new(method, train.feature_count(), hyper)?;
    let curve = run_one_pass(&mut learner, train)?;
    Ok((learner, curve))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchResult {
    pub best: Hyperparams,
    pub validation_accuracy: f64,
    pub evaluated: usize,
}

/// Well-mixed sub-seed so shuffles, validation splits and train/test splits
/// drawn from one seed are unrelated.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SHUFFLE_STREAM: u64 = 1;
const VALIDATION_STREAM: u64 = 2;

/// Training order used for `seed` by [`run_seed`].
pub fn shuffle_for_seed(train: &Dataset, seed: u64) -> Dataset {
    dataset::shuffle(train, derive_seed(seed, SHUFFLE_STREAM))
}

/// Exhaustive search over the grid cells `method` uses, scoring each cell by
/// accuracy on a held-out validation part of `train`. Ties go to the first
/// cell in ascending grid order.
pub fn grid_search(
    method: Method,
    train: &Dataset,
    protocol: &Protocol,
    seed: u64,
) -> Result<GridSearchResult> {
    let (rest, validation) = dataset::validation_split(
        train,
        protocol.validation_fraction,
        derive_seed(seed, VALIDATION_STREAM),
    )?;
    let candidates = protocol
        .grid
        .candidates(method.variant, &protocol.base_hyper(rest.len()))?;
    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|h| {
            let (model, _) = train_model(method, &rest, *h)?;
            protocol.score(&model, &validation)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(GridSearchResult {
        best: candidates[best],
        validation_accuracy: scores[best],
        evaluated: candidates.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub best_params: Hyperparams,
    pub validation_accuracy: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub final_errors: u64,
}

/// Averaged outcome of one method on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub method: Method,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Most frequent best configuration across seeds.
    pub best_params: Hyperparams,
    pub seeds: usize,
    pub per_seed: Vec<SeedResult>,
    /// Training curve of the first seed's final run.
    #[serde(skip)]
    pub curve: CumulativeErrorCurve,
}

impl ExperimentReport {
    pub fn per_seed_train(&self) -> Vec<f64> {
        self.per_seed.iter().map(|s| s.train_accuracy).collect()
    }

    pub fn per_seed_test(&self) -> Vec<f64> {
        self.per_seed.iter().map(|s| s.test_accuracy).collect()
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn cmp_hyper(a: &Hyperparams, b: &Hyperparams) -> Ordering {
    let key = |h: &Hyperparams| [h.lambda, h.mu, h.nu, h.c];
    key(a)
        .iter()
        .zip(key(b).iter())
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn modal_params(results: &[SeedResult]) -> Hyperparams {
    let mut sorted: Vec<Hyperparams> = results.iter().map(|r| r.best_params).collect();
    sorted.sort_by(cmp_hyper);
    let mut best = sorted[0];
    let mut best_run = 0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && cmp_hyper(&sorted[i], &sorted[j]).is_eq() {
            j += 1;
        }
        if j - i > best_run {
            best_run = j - i;
            best = sorted[i];
        }
        i = j;
    }
    best
}

/// One seed: shuffle, grid search on a validation split, retrain on the full
/// shuffled training set with the winning parameters, then evaluate.
pub fn run_seed(
    method: Method,
    train: &Dataset,
    test: &Dataset,
    protocol: &Protocol,
    seed: u64,
) -> Result<(SeedResult, CumulativeErrorCurve)> {
    seed_run(method, train, test, protocol, seed)
        .map_err(|e| e.with_context(format!("method {method}, seed {seed}")))
}

fn seed_run(
    method: Method,
    train: &Dataset,
    test: &Dataset,
    protocol: &Protocol,
    seed: u64,
) -> Result<(SeedResult, CumulativeErrorCurve)> {
    let shuffled = shuffle_for_seed(train, seed);
    let search = grid_search(method, &shuffled, protocol, seed)?;
    let (model, curve) = train_model(method, &shuffled, search.best)?;
    let result = SeedResult {
        seed,
        best_params: *model.hyper(),
        validation_accuracy: search.validation_accuracy,
        train_accuracy: protocol.score(&model, train)?,
        test_accuracy: protocol.score(&model, test)?,
        final_errors: curve.final_errors(),
    };
    Ok((result, curve))
}

/// Runs `method` for seeds `seed_base, seed_base + 1, ...` and averages.
pub fn run_experiment(
    method: Method,
    train: &Dataset,
    test: &Dataset,
    seeds: usize,
    seed_base: u64,
    protocol: &Protocol,
) -> Result<ExperimentReport> {
    if seeds == 0 {
        return Err(Error::invalid("at least one seed is required"));
    }
    let runs: Vec<(SeedResult, CumulativeErrorCurve)> = (0..seeds as u64)
        .into_par_iter()
        .map(|i| run_seed(method, train, test, protocol, seed_base + i))
        .collect::<Result<_>>()?;
    let mut runs = runs.into_iter();
    let (first, curve) = runs.next().expect("seeds >= 1");
    let per_seed: Vec<SeedResult> = std::iter::once(first).chain(runs.map(|(r, _)| r)).collect();

    let train_acc: Vec<f64> = per_seed.iter().map(|r| r.train_accuracy).collect();
    let test_acc: Vec<f64> = per_seed.iter().map(|r| r.test_accuracy).collect();
    Ok(ExperimentReport {
        dataset: train.name().to_string(),
        method,
        train_accuracy: mean(&train_acc),
        test_accuracy: mean(&test_acc),
        best_params: modal_params(&per_seed),
        seeds,
        per_seed,
        curve,
    })
}

/// Train/test partition of a benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub train: Dataset,
    pub test: Dataset,
}

impl Benchmark {
    pub fn split(d: &Dataset, train_count: usize, seed: u64, stratify: bool) -> Result<Self> {
        let (train, test) = if stratify {
            dataset::split_train_test_stratified(d, train_count, seed)?
        } else {
            dataset::split_train_test(d, train_count, seed)?
        };
        Ok(Benchmark { train, test })
    }

    pub fn from_manifest(
        manifest: &dataset::Manifest,
        name: &str,
        seed: u64,
        stratify: bool,
    ) -> Result<Self> {
        let entry = manifest
            .entry(name)
            .ok_or_else(|| Error::invalid(format!("unknown dataset `{name}`")))?;
        let d = manifest.load(name)?;
        Self::split(&d, entry.train_count, seed, stratify)
    }
}
