//! Flat text model snapshots, one value per line.
//!
//! Layout: method tag (`FS2`, `GN+avg`, ...), feature count `M`, then `w`
//! (M lines), `b`, `alpha` (M lines, if the variant has it) and `beta`
//! (likewise). Averaged methods append the parameter sums in the same layout
//! followed by the snapshot count. GN appends its running statistics:
//! count, mean (M lines), squared-deviation sums (M lines).
//! Reals are written with 17 significant digits.

use std::fmt::Write;

use super::{AveragedParams, Learner, Method, ModelParams, Variant};
use crate::error::{Error, Result};
use crate::scaling::RunningStats;

fn push_real(out: &mut String, v: f64) {
    let _ = writeln!(out, "{v:.16e}");
}

fn push_params(out: &mut String, p: &ModelParams) {
    for &v in &p.w {
        push_real(out, v);
    }
    push_real(out, p.b);
    for v in [&p.alpha, &p.beta].into_iter().flatten() {
        for &x in v {
            push_real(out, x);
        }
    }
}

pub(super) fn write(learner: &Learner) -> String {
    let mut out = String::new();
    let method = learner.method();
    let _ = writeln!(
        out,
        "{}{}",
        method.variant.tag(),
        if method.averaged { "+avg" } else { "" }
    );
    let _ = writeln!(out, "{}", learner.dim());
    push_params(&mut out, learner.params());
    if let Some(avg) = learner.average() {
        push_params(&mut out, avg.sum());
        let _ = writeln!(out, "{}", avg.snapshots());
    }
    if let Some(stats) = learner.stats() {
        let _ = writeln!(out, "{}", stats.count());
        for &v in stats.mean().iter().chain(stats.sq_dev_sum()) {
            push_real(&mut out, v);
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_field(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim()))
            .ok_or_else(|| Error::Snapshot(format!("unexpected end of file reading {what}")))
    }

    fn real(&mut self, what: &str) -> Result<f64> {
        let (line, text) = self.next_field(what)?;
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Snapshot(format!("line {line}: bad {what} `{text}`"))),
        }
    }

    fn reals(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        (0..n).map(|_| self.real(what)).collect()
    }

    fn integer<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let (line, text) = self.next_field(what)?;
        text.parse()
            .map_err(|_| Error::Snapshot(format!("line {line}: bad {what} `{text}`")))
    }

    fn params(&mut self, variant: Variant, dim: usize) -> Result<ModelParams> {
        let w = self.reals(dim, "w")?;
        let b = self.real("b")?;
        let alpha = if variant.has_alpha() {
            Some(self.reals(dim, "alpha")?)
        } else {
            None
        };
        let beta = if variant.has_beta() {
            Some(self.reals(dim, "beta")?)
        } else {
            None
        };
        Ok(ModelParams {
            variant,
            w,
            b,
            alpha,
            beta,
        })
    }
}

pub(super) fn read(text: &str) -> Result<Learner> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, tag) = lines.next_field("method tag")?;
    let (base, averaged) = match tag.strip_suffix("+avg") {
        Some(base) => (base, true),
        None => (tag, false),
    };
    let variant = Variant::ALL
        .into_iter()
        .find(|v| v.tag() == base)
        .ok_or_else(|| Error::Snapshot(format!("unknown method tag `{tag}`")))?;
    let dim: usize = lines.integer("feature count")?;
    if dim == 0 {
        return Err(Error::Snapshot("feature count must be positive".into()));
    }

    let params = lines.params(variant, dim)?;
    let average = if averaged {
        let sum = lines.params(variant, dim)?;
        let snapshots = lines.integer("snapshot count")?;
        Some(AveragedParams::from_parts(sum, snapshots))
    } else {
        None
    };
    let stats = if variant == Variant::Gn {
        let count = lines.integer("statistics count")?;
        let mean = lines.reals(dim, "mean")?;
        let sq = lines.reals(dim, "squared deviation sum")?;
        Some(RunningStats::from_parts(count, mean, sq).map_err(|e| Error::Snapshot(e.to_string()))?)
    } else {
        None
    };
    if let Some((line, extra)) = lines.inner.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::Snapshot(format!(
            "line {}: trailing data `{}`",
            line + 1,
            extra.trim()
        )));
    }
    Ok(Learner::from_parts(
        Method::new(variant, averaged),
        params,
        average,
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Instance, Label};
    use crate::learners::{Hyperparams, OnlineLearner};

    fn trained(method: Method) -> Learner {
        let h = Hyperparams { n_train: 4, lambda: 0.1, c: 0.5, ..Default::default() };
        let mut l = Learner::new(method, 2, h).unwrap();
        for (x, t) in [
            ([1.0, 2.0], Label::Positive),
            ([-0.5, 3.0], Label::Negative),
            ([0.1, -7.0], Label::Positive),
            ([2.0 / 3.0, 1e-3], Label::Negative),
        ] {
            l.learn_one(&Instance::new(x.to_vec(), t)).unwrap();
        }
        l
    }

    #[test]
    fn layout_for_sgd() {
        let text = write(&Learner::new(Method::new(Variant::Sgd, false), 2, Hyperparams::default()).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "SGD");
        assert_eq!(lines[1], "2");
        assert_eq!(lines.len(), 2 + 2 + 1);
    }

    #[test]
    fn every_method_round_trips() {
        for m in Method::roster() {
            let l = trained(m);
            let back = read(&write(&l)).unwrap();
            assert_eq!(back.method(), m);
            assert_eq!(back.params(), l.params());
            assert_eq!(back.average(), l.average());
            assert_eq!(back.stats(), l.stats());
            let x = [0.3, -1.2];
            assert_eq!(back.score(&x).unwrap(), l.score(&x).unwrap());
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(read(""), Err(Error::Snapshot(_))));
        assert!(read("XYZ\n1\n0\n0\n").is_err());
        assert!(read("SGD\n0\n").is_err());
        assert!(read("SGD\n2\n0\n0\n").is_err());
        assert!(read("SGD\n1\n0\nnan\n").is_err());
        assert!(read("SGD\n1\n0\n0\n5\n").is_err());
        assert!(read("SGD\n1\n0\n0\n\n").is_ok());
    }
}
