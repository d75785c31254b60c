use approx::assert_relative_eq;
use featscale::dataset::{self, Dataset, Instance, Label};
use featscale::learners::{
    cross_entropy_objective, fs2_curvature, learning_rate, logistic_step, pa_step, w_curvature,
    AveragedParams, ModelParams, PaUpdate,
};
use featscale::scaling::{sigmoid_scale, RunningStats};
use featscale::{Hyperparams, Learner, Method, OnlineLearner, Variant};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(floor)
}

fn batch_mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::Positive), Just(Label::Negative)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn running_stats_match_two_pass(xs in prop::collection::vec(-1e6f64..1e6, 1..=500)) {
        let mut st = RunningStats::new(1);
        for &x in &xs {
            st.update(&[x]).unwrap();
        }
        let (mean, sd) = batch_mean_sd(&xs);
        prop_assert!(close(st.mean()[0], mean, 1e-9, 1e-6), "{} vs {}", st.mean()[0], mean);
        prop_assert!(close(st.std_dev(0), sd, 1e-9, 1e-6), "{} vs {}", st.std_dev(0), sd);
    }
}

proptest! {
    #[test]
    fn running_stats_order_independent(
        xs in prop::collection::vec(-1e6f64..1e6, 2..200),
        seed in any::<u64>(),
    ) {
        let perm = dataset::permutation(xs.len(), seed);
        let mut a = RunningStats::new(1);
        let mut b = RunningStats::new(1);
        for (i, &x) in xs.iter().enumerate() {
            a.update(&[x]).unwrap();
            b.update(&[xs[perm[i]]]).unwrap();
        }
        prop_assert!(close(a.mean()[0], b.mean()[0], 1e-9, 1e-6));
        prop_assert!(close(a.sq_dev_sum()[0], b.sq_dev_sum()[0], 1e-9, 1e-6));
    }

    #[test]
    fn destandardize_inverts_standardize(
        rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 2..50),
        probe in prop::collection::vec(-1e3f64..1e3, 3),
    ) {
        let mut st = RunningStats::new(3);
        for r in &rows {
            st.update(r).unwrap();
        }
        let back = st.destandardize(&st.standardize(&probe).unwrap()).unwrap();
        for (x, y) in probe.iter().zip(&back) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn sigmoid_scale_monotone_and_bounded(
        alpha in 0.1f64..3.0,
        beta in -5f64..5.0,
        x in -5f64..5.0,
        dx in 0.01f64..1.0,
    ) {
        let lo = sigmoid_scale(alpha, beta, x);
        let hi = sigmoid_scale(alpha, beta, x + dx);
        prop_assert!(lo < hi);
        prop_assert!(lo > 0.0 && hi < 1.0);
    }
}

fn random_params(variant: Variant, dim: usize, vals: &[f64]) -> ModelParams {
    let mut p = ModelParams::new(variant, dim);
    let template = p.to_flat();
    let mut flat: Vec<f64> = vals.iter().copied().cycle().take(template.len()).collect();
    if variant == Variant::Fs3 {
        flat[..dim].fill(1.0);
    }
    p = p.with_flat(&flat);
    p
}

#[derive(Debug, Clone)]
struct GradCase {
    dim: usize,
    vals: Vec<f64>,
    x: Vec<f64>,
    label: Label,
    lambda: f64,
    mu: f64,
    nu: f64,
    n_train: usize,
    eta: f64,
}

fn grad_case() -> impl Strategy<Value = GradCase> {
    (1usize..=4).prop_flat_map(|dim| {
        (
            prop::collection::vec(-1f64..1.0, 4 * dim + 1),
            prop::collection::vec(-2f64..2.0, dim),
            label(),
            (0f64..10.0, 0f64..10.0, 0f64..10.0),
            1usize..500,
            1e-3f64..0.5,
        )
            .prop_map(move |(vals, x, label, (lambda, mu, nu), n_train, eta)| GradCase {
                dim,
                vals,
                x,
                label,
                lambda,
                mu,
                nu,
                n_train,
                eta,
            })
    })
}

fn check_gradient(variant: Variant, c: &GradCase) -> Result<(), TestCaseError> {
    let p = random_params(variant, c.dim, &c.vals);
    let h = Hyperparams {
        lambda: c.lambda,
        mu: c.mu,
        nu: c.nu,
        n_train: c.n_train,
        ..Hyperparams::default()
    };
    let mut next = p.clone();
    logistic_step(&mut next, &c.x, c.label, c.eta, &h).unwrap();
    let before = p.to_flat();
    let after = next.to_flat();
    let names = p.flat_names();
    let step = 1e-6;
    for i in 0..before.len() {
        if variant == Variant::Fs3 && i < c.dim {
            prop_assert_eq!(after[i], 1.0, "FS-3 weights stay fixed");
            continue;
        }
        let mut plus = before.clone();
        let mut minus = before.clone();
        plus[i] += step;
        minus[i] -= step;
        let e_plus = cross_entropy_objective(&p.with_flat(&plus), &c.x, c.label, &h);
        let e_minus = cross_entropy_objective(&p.with_flat(&minus), &c.x, c.label, &h);
        let expected = -c.eta * (e_plus - e_minus) / (2.0 * step);
        let delta = after[i] - before[i];
        prop_assert!(
            close(delta, expected, 1e-4, 1e-6),
            "{} {}: step {delta} vs finite difference {expected}",
            variant.name(),
            names[i]
        );
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sgd_step_is_gradient_step(c in grad_case()) {
        check_gradient(Variant::Sgd, &c)?;
    }

    #[test]
    fn fs_step_is_gradient_step(c in grad_case()) {
        check_gradient(Variant::Fs, &c)?;
    }

    #[test]
    fn fs1_step_is_gradient_step(c in grad_case()) {
        check_gradient(Variant::Fs1, &c)?;
    }

    #[test]
    fn fs2_step_is_gradient_step(c in grad_case()) {
        check_gradient(Variant::Fs2, &c)?;
    }

    #[test]
    fn fs3_step_is_gradient_step(c in grad_case()) {
        check_gradient(Variant::Fs3, &c)?;
    }

    #[test]
    fn fs2_diagonal_curvature_positive(c in grad_case()) {
        let p = random_params(Variant::Fs2, c.dim, &c.vals);
        let h = Hyperparams {
            lambda: c.lambda + 1e-3,
            mu: c.mu + 1e-3,
            nu: c.nu + 1e-3,
            n_train: c.n_train,
            ..Hyperparams::default()
        };
        for j in 0..c.dim {
            prop_assert!(fs2_curvature(&p, &c.x, j, &h).all_positive());
        }
    }

    #[test]
    fn sgd_w_curvature_positive(c in grad_case()) {
        let p = random_params(Variant::Sgd, c.dim, &c.vals);
        let h = Hyperparams { lambda: c.lambda + 1e-3, n_train: c.n_train, ..Hyperparams::default() };
        for j in 0..c.dim {
            prop_assert!(w_curvature(&p, &c.x, j, &h) > 0.0);
        }
    }
}

fn margin(p: &ModelParams, x: &[f64], t: Label) -> f64 {
    t.sign() * (p.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + p.b)
}

#[derive(Debug, Clone)]
struct PaCase {
    w: Vec<f64>,
    b: f64,
    x: Vec<f64>,
    label: Label,
    c: f64,
}

fn pa_case() -> impl Strategy<Value = PaCase> {
    (1usize..=6).prop_flat_map(|dim| {
        (
            prop::collection::vec(-3f64..3.0, dim),
            -3f64..3.0,
            prop::collection::vec(-5f64..5.0, dim),
            label(),
            prop::sample::select(vec![0.01, 0.1, 1.0, 10.0, 100.0]),
        )
            .prop_map(|(w, b, x, label, c)| PaCase { w, b, x, label, c })
    })
}

fn pa_params(variant: Variant, case: &PaCase) -> ModelParams {
    let mut p = ModelParams::new(variant, case.w.len());
    p.w = case.w.clone();
    p.b = case.b;
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn pa_reaches_unit_margin(case in pa_case()) {
        let mut p = pa_params(Variant::Pa, &case);
        let before = margin(&p, &case.x, case.label);
        match pa_step(&mut p, &case.x, case.label, case.c).unwrap() {
            PaUpdate::Aggressive { .. } => {
                prop_assert!(before < 1.0);
                let after = margin(&p, &case.x, case.label);
                prop_assert!((after - 1.0).abs() <= 1e-9, "margin {after}");
            }
            PaUpdate::Passive => prop_assert!(before >= 1.0),
            PaUpdate::Degenerate => prop_assert!(false, "augmented input cannot have zero norm"),
        }
    }

    #[test]
    fn pa_passive_leaves_params(case in pa_case()) {
        for variant in [Variant::Pa, Variant::Pa1, Variant::Pa2] {
            let mut p = pa_params(variant, &case);
            let m = margin(&p, &case.x, case.label);
            if m < 1.5 {
                p.b += case.label.sign() * (1.5 - m);
            }
            let orig = p.clone();
            prop_assert_eq!(pa_step(&mut p, &case.x, case.label, case.c).unwrap(), PaUpdate::Passive);
            prop_assert_eq!(&p, &orig);
        }
    }

    #[test]
    fn pa1_tau_capped_and_pa2_tau_formula(case in pa_case()) {
        let q = case.x.iter().map(|v| v * v).sum::<f64>() + 1.0;
        let mut p1 = pa_params(Variant::Pa1, &case);
        if let PaUpdate::Aggressive { tau, .. } = pa_step(&mut p1, &case.x, case.label, case.c).unwrap() {
            prop_assert!(tau <= case.c);
        }
        let mut p2 = pa_params(Variant::Pa2, &case);
        if let PaUpdate::Aggressive { loss, tau } = pa_step(&mut p2, &case.x, case.label, case.c).unwrap() {
            let expected = loss / (q + 1.0 / (2.0 * case.c));
            prop_assert!((tau - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }
}

fn stream(seed: u64, len: usize, dim: usize) -> Vec<Instance> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| Instance {
            features: (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            label: if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative },
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn averaging_matches_snapshot_mean(seed in any::<u64>(), vi in 0usize..9) {
        let variant = Variant::ALL[vi];
        let data = stream(seed, 200, 3);
        let h = Hyperparams { lambda: 0.1, mu: 0.1, nu: 0.1, n_train: 200, ..Hyperparams::default() };
        let mut plain = Learner::new(Method::new(variant, false), 3, h).unwrap();
        let mut avg = Learner::new(Method::new(variant, true), 3, h).unwrap();
        let mut snapshots: Vec<Vec<f64>> = Vec::new();
        for inst in &data {
            plain.learn_one(inst).unwrap();
            avg.learn_one(inst).unwrap();
            prop_assert_eq!(plain.params(), avg.params());
            snapshots.push(plain.params().to_flat());
        }
        let mean = avg.average().unwrap().mean().unwrap().to_flat();
        for (i, m) in mean.iter().enumerate() {
            let brute = snapshots.iter().map(|s| s[i]).sum::<f64>() / snapshots.len() as f64;
            prop_assert!(close(*m, brute, 1e-10, 1e-12), "{m} vs {brute}");
        }
        prop_assert_eq!(avg.effective_params().to_flat(), mean);
    }

    #[test]
    fn snapshot_round_trip(seed in any::<u64>(), mi in 0usize..18) {
        let method = Method::roster()[mi];
        let data = stream(seed, 30, 4);
        let h = Hyperparams { lambda: 0.01, n_train: 30, ..Hyperparams::default() };
        let mut l = Learner::new(method, 4, h).unwrap();
        for inst in &data {
            l.learn_one(inst).unwrap();
        }
        let back = Learner::from_snapshot(&l.to_snapshot()).unwrap();
        prop_assert_eq!(back.method(), l.method());
        prop_assert_eq!(back.params(), l.params());
        prop_assert_eq!(back.average(), l.average());
        prop_assert_eq!(back.stats(), l.stats());
        for inst in &data {
            prop_assert_eq!(back.score(&inst.features).unwrap(), l.score(&inst.features).unwrap());
        }
    }
}

fn toy(n: usize) -> Dataset {
    let instances = (0..n)
        .map(|i| Instance {
            features: vec![i as f64, (i * i) as f64],
            label: if i % 3 == 0 { Label::Positive } else { Label::Negative },
        })
        .collect();
    Dataset::new("toy", 2, instances).unwrap()
}

fn sorted_keys(d: &Dataset) -> Vec<u64> {
    let mut k: Vec<u64> = d.instances().iter().map(|i| i.features[0] as u64).collect();
    k.sort_unstable();
    k
}

proptest! {
    #[test]
    fn shuffle_is_invertible(n in 0usize..200, seed in any::<u64>()) {
        let d = toy(n);
        let perm = dataset::permutation(n, seed);
        let shuffled = dataset::shuffle(&d, seed);
        let mut inverse = vec![0; n];
        for (pos, &src) in perm.iter().enumerate() {
            inverse[src] = pos;
        }
        let restored = shuffled.reorder(&inverse);
        prop_assert_eq!(restored.instances(), d.instances());
    }

    #[test]
    fn split_preserves_multiset(n in 2usize..200, frac in 0.05f64..0.95, seed in any::<u64>()) {
        let d = toy(n);
        let train_count = ((n as f64 * frac) as usize).clamp(1, n - 1);
        let (train, test) = dataset::split_train_test(&d, train_count, seed).unwrap();
        prop_assert_eq!(train.len(), train_count);
        prop_assert_eq!(train.len() + test.len(), n);
        let joined = train.concat(&test).unwrap();
        prop_assert_eq!(sorted_keys(&joined), sorted_keys(&d));
    }

    #[test]
    fn validation_split_size(n in 5usize..300, seed in any::<u64>()) {
        let d = toy(n);
        let (rest, val) = dataset::validation_split(&d, 0.2, seed).unwrap();
        prop_assert_eq!(val.len(), (0.2 * n as f64).round() as usize);
        prop_assert_eq!(sorted_keys(&rest.concat(&val).unwrap()), sorted_keys(&d));
    }

    #[test]
    fn learning_rate_decreases(k in 0u64..10_000, n in 1usize..1000) {
        let h = Hyperparams { n_train: n, ..Hyperparams::default() };
        prop_assert!(learning_rate(k + 1, &h) < learning_rate(k, &h));
    }
}

#[test]
fn averaged_params_three_snapshots() {
    let mut p = ModelParams::new(Variant::Sgd, 1);
    let mut avg = AveragedParams::new(&p);
    for w in [0.0, 0.1, 0.2] {
        p.w = vec![w];
        avg.accumulate(&p);
    }
    assert_relative_eq!(avg.mean().unwrap().w[0], 0.1, max_relative = 1e-15);
}
