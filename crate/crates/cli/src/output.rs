//! Text renderings of experiment reports.

use std::fmt::Write;

use featscale::{ExperimentReport, Method};

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Fixed-width results table for one dataset.
pub fn table(dataset: &str, reports: &[ExperimentReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "== {dataset}");
    let _ = writeln!(
        out,
        "{:<10} {:>14} {:>14}  Best Parameters",
        "Algorithm", "Train Accuracy", "Test Accuracy"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<10} {:>14.6} {:>14.6}  {}",
            r.method.to_string(),
            r.train_accuracy,
            r.test_accuracy,
            r.best_params.describe(r.method.variant)
        );
    }
    out
}

pub fn reports_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from(
        "dataset,method,train_accuracy,test_accuracy,best_params,seeds,per_seed_train,per_seed_test\n",
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.dataset,
            r.method,
            r.train_accuracy,
            r.test_accuracy,
            r.best_params.describe(r.method.variant),
            r.seeds,
            join(&r.per_seed_train()),
            join(&r.per_seed_test()),
        );
    }
    out
}

pub fn reports_jsonl(reports: &[ExperimentReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("report serializes"));
        out.push('\n');
    }
    out
}

pub fn curve_file_name(dataset: &str, method: Method) -> String {
    format!("{dataset}_{method}.csv")
}
