//! One-pass online binary classification with dynamic feature scaling.
//!
//! The crate provides:
//!
//! * [`dataset`]: dense CSV loading, seeded train/test and validation splits;
//! * [`scaling`]: running per-feature statistics and scaling functions;
//! * [`learners`]: SGD logistic regression, running standardization (GN),
//!   jointly learned feature scaling (FS, FS-1, FS-2, FS-3) and
//!   Passive-Aggressive classifiers, each optionally parameter-averaged;
//! * [`harness`]: one-pass training with cumulative error curves, grid search
//!   on a validation split and multi-seed experiments.

pub mod dataset;
pub mod error;
pub mod harness;
pub mod learners;
pub mod scaling;

pub use dataset::{Dataset, Instance, Label, Manifest};
pub use error::{Error, Result};
pub use harness::{
    evaluate, grid_search, run_experiment, run_one_pass, Benchmark, CumulativeErrorCurve,
    ExperimentReport, Grid, Protocol,
};
pub use learners::{Hyperparams, Learner, Method, ModelParams, OnlineLearner, Variant};
pub use scaling::RunningStats;
