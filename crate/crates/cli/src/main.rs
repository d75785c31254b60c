use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use featscale::harness::{self, Benchmark, ExperimentReport, Grid, Protocol};
use featscale::{dataset, Error, Hyperparams, Learner, Manifest, Method};

mod output;

const DEFAULT_MANIFEST: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/manifest.toml");

/// One-pass online classification benchmarks with dynamic feature scaling.
#[derive(Debug, Parser)]
#[command(name = "featscale", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one method and write a model snapshot.
    Train(TrainArgs),
    /// Print the accuracy of a model snapshot on a dataset split.
    Evaluate(EvaluateArgs),
    /// Print the best hyperparameters found on the validation split.
    GridSearch(CommonArgs),
    /// Produce the full results table for each dataset.
    Reproduce(CommonArgs),
    /// Write cumulative training error curves, one CSV per method.
    Curves(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitPart {
    Train,
    Test,
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    /// Manifest dataset name, `all`, or a path to a delimited data file.
    #[arg(long, default_value = "all")]
    dataset: String,
    /// Method name (e.g. `GN`, `FS-2+avg`) or `all`.
    #[arg(long, default_value = "all")]
    method: String,
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Seed of the train/test partition.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    #[arg(long, default_value_t = 0.1)]
    eta0: f64,
    #[arg(long, value_delimiter = ',')]
    grid_lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    grid_mu: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    grid_nu: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    grid_c: Option<Vec<f64>>,
    /// Output file (reproduce), directory (curves) or snapshot path (train).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads; defaults to the number of available processors.
    #[arg(long)]
    jobs: Option<usize>,
    /// Keep class proportions in the train/test partition.
    #[arg(long)]
    stratify: bool,
    /// Keep updating GN running statistics on evaluation data.
    #[arg(long)]
    adapt_test_stats: bool,
    #[arg(long, default_value = DEFAULT_MANIFEST)]
    manifest: PathBuf,
    /// Label column for file datasets (zero-based); defaults to the last column.
    #[arg(long)]
    label_column: Option<usize>,
    /// Label value treated as the positive class for file datasets.
    #[arg(long, default_value = "1")]
    positive_label: String,
    /// Training instances for file datasets; defaults to 80%.
    #[arg(long)]
    train_count: Option<usize>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Model snapshot written by `train`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    split: SplitPart,
}

/// Failure carrying the process exit status.
#[derive(Debug)]
enum Failure {
    Input(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

impl CommonArgs {
    fn protocol(&self) -> Protocol {
        let defaults = Grid::default();
        Protocol {
            grid: Grid {
                lambda: self.grid_lambda.clone().unwrap_or(defaults.lambda),
                mu: self.grid_mu.clone().unwrap_or(defaults.mu),
                nu: self.grid_nu.clone().unwrap_or(defaults.nu),
                c: self.grid_c.clone().unwrap_or(defaults.c),
            },
            eta0: self.eta0,
            validation_fraction: 0.2,
            adapt_test_stats: self.adapt_test_stats,
        }
    }

    fn methods(&self) -> CliResult<Vec<Method>> {
        if self.method.eq_ignore_ascii_case("all") {
            Ok(Method::roster())
        } else {
            self.method
                .split(',')
                .map(|m| m.parse::<Method>().map_err(Failure::from))
                .collect()
        }
    }

    fn single_method(&self) -> CliResult<Method> {
        match self.methods()?.as_slice() {
            [m] => Ok(*m),
            _ => Err(input("this command needs exactly one --method")),
        }
    }

    fn manifest(&self) -> CliResult<Manifest> {
        Manifest::from_file(&self.manifest).map_err(Failure::from)
    }

    /// Dataset names to run; `all` expands to every manifest entry.
    fn dataset_names(&self) -> CliResult<Vec<String>> {
        if self.dataset.eq_ignore_ascii_case("all") {
            Ok(self.manifest()?.names().map(String::from).collect())
        } else {
            Ok(vec![self.dataset.clone()])
        }
    }

    fn benchmark(&self, name: &str) -> CliResult<Benchmark> {
        let manifest = self.manifest()?;
        if let Some(path) = manifest.data_path(name) {
            if !path.is_file() {
                return Err(input(format!("dataset file not found: {}", path.display())));
            }
            return Ok(Benchmark::from_manifest(
                &manifest,
                name,
                self.split_seed,
                self.stratify,
            )?);
        }
        let path = Path::new(name);
        if !path.is_file() {
            return Err(input(format!(
                "unknown dataset `{name}` (not in {} and not a file)",
                self.manifest.display()
            )));
        }
        let text = std::fs::read_to_string(path)?;
        let label_column = match self.label_column {
            Some(c) => c,
            None => last_column(&text).ok_or(Error::EmptyDataset)?,
        };
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| name.to_string());
        let d = dataset::load_csv(text.as_bytes(), &stem, label_column, &self.positive_label)?;
        let train_count = self
            .train_count
            .unwrap_or_else(|| ((d.len() as f64) * 0.8).round() as usize);
        Ok(Benchmark::split(&d, train_count, self.split_seed, self.stratify)?)
    }
}

fn last_column(text: &str) -> Option<usize> {
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))?;
    let n = if line.contains(',') {
        line.split(',').count()
    } else {
        line.split_whitespace().count()
    };
    n.checked_sub(1)
}

fn setup_threads(jobs: Option<usize>) -> CliResult<()> {
    if let Some(jobs) = jobs {
        if jobs == 0 {
            return Err(input("--jobs must be at least 1"));
        }
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    let common = &args.common;
    let method = common.single_method()?;
    let out = common
        .out
        .as_ref()
        .ok_or_else(|| input("train needs --out for the model snapshot"))?;
    let bench = common.benchmark(&common.dataset)?;
    let hyper = Hyperparams {
        lambda: args.lambda,
        mu: args.mu,
        nu: args.nu,
        c: args.c,
        eta0: common.eta0,
        ..Hyperparams::default()
    };
    let shuffled = harness::shuffle_for_seed(&bench.train, common.seed_base);
    let (model, curve) = harness::train_model(method, &shuffled, hyper)?;
    std::fs::write(out, model.to_snapshot())?;
    let acc = score(common, &model, &bench.train)?;
    println!("method\t{method}");
    println!("train_accuracy\t{acc:.6}");
    println!("cumulative_errors\t{}", curve.final_errors());
    Ok(())
}

fn score(common: &CommonArgs, model: &Learner, data: &dataset::Dataset) -> CliResult<f64> {
    let acc = if common.adapt_test_stats {
        harness::evaluate_adaptive(model, data)?
    } else {
        harness::evaluate(model, data)?
    };
    Ok(acc)
}

fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let common = &args.common;
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| input(format!("{}: {e}", args.model.display())))?;
    let model = Learner::from_snapshot(&text)?;
    let bench = common.benchmark(&common.dataset)?;
    let data = match args.split {
        SplitPart::Train => &bench.train,
        SplitPart::Test => &bench.test,
    };
    if data.feature_count() != model.dim() {
        return Err(input(format!(
            "model expects {} features but {} has {}",
            model.dim(),
            data.name(),
            data.feature_count()
        )));
    }
    println!("{:.6}", score(common, &model, data)?);
    Ok(())
}

fn cmd_grid_search(args: &CommonArgs) -> CliResult<()> {
    let protocol = args.protocol();
    for name in args.dataset_names()? {
        let bench = args.benchmark(&name)?;
        let shuffled = harness::shuffle_for_seed(&bench.train, args.seed_base);
        for method in args.methods()? {
            let found = harness::grid_search(method, &shuffled, &protocol, args.seed_base)
                .map_err(|e| e.with_context(format!("method {method}, seed {}", args.seed_base)))?;
            println!(
                "{name}\t{method}\t{}\tvalidation_accuracy={:.6}\tcandidates={}",
                found.best.describe(method.variant),
                found.validation_accuracy,
                found.evaluated
            );
        }
    }
    Ok(())
}

/// Runs every method; numeric failures are kept per method so the others still report.
fn run_reports(
    args: &CommonArgs,
    name: &str,
    methods: &[Method],
) -> CliResult<Vec<Result<ExperimentReport, Error>>> {
    let bench = args.benchmark(name)?;
    let protocol = args.protocol();
    let mut out = Vec::with_capacity(methods.len());
    for &m in methods {
        match harness::run_experiment(m, &bench.train, &bench.test, args.seeds, args.seed_base, &protocol) {
            Err(e) if !e.is_numeric() => return Err(e.into()),
            r => out.push(r),
        }
    }
    Ok(out)
}

/// Splits results into reports and failure messages, echoing failures to stderr.
fn partition(name: &str, results: Vec<Result<ExperimentReport, Error>>, failures: &mut Vec<String>) -> Vec<ExperimentReport> {
    let mut reports = Vec::new();
    for r in results {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) => {
                let msg = format!("{name}: {e}");
                eprintln!("numeric failure: {msg}");
                failures.push(msg);
            }
        }
    }
    reports
}

fn finish(failures: Vec<String>) -> CliResult<()> {
    match failures.len() {
        0 => Ok(()),
        1 => Err(Failure::Numeric(failures.into_iter().next().unwrap_or_default())),
        n => Err(Failure::Numeric(format!("{n} runs failed"))),
    }
}

fn cmd_reproduce(args: &CommonArgs) -> CliResult<()> {
    if args.seeds == 0 {
        return Err(input("--seeds must be at least 1"));
    }
    let methods = args.methods()?;
    let mut all = Vec::new();
    let mut failures = Vec::new();
    for name in args.dataset_names()? {
        let reports = partition(&name, run_reports(args, &name, &methods)?, &mut failures);
        print!("{}", output::table(&name, &reports));
        all.extend(reports);
    }
    if let Some(path) = &args.out {
        let text = match args.format {
            Format::Csv => output::reports_csv(&all),
            Format::JsonLines => output::reports_jsonl(&all),
        };
        std::fs::write(path, text)?;
    }
    finish(failures)
}

/// Methods plotted by default.
const CURVE_METHODS: [&str; 6] = ["FS-2", "FS-2+avg", "SGD", "SGD+avg", "GN", "GN+avg"];

fn cmd_curves(args: &CommonArgs) -> CliResult<()> {
    let methods: Vec<Method> = if args.method.eq_ignore_ascii_case("all") {
        CURVE_METHODS.iter().map(|m| m.parse().expect("roster name")).collect()
    } else {
        args.methods()?
    };
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("curves"));
    std::fs::create_dir_all(&dir)?;
    let single_seed = CommonArgs { seeds: 1, ..args.clone() };
    let mut failures = Vec::new();
    for name in args.dataset_names()? {
        let results = run_reports(&single_seed, &name, &methods)?;
        for report in partition(&name, results, &mut failures) {
            let file = dir.join(output::curve_file_name(&name, report.method));
            std::fs::write(&file, report.curve.to_csv())?;
            println!(
                "{}\t{}\tfinal_errors={}",
                file.display(),
                report.best_params.describe(report.method.variant),
                report.curve.final_errors()
            );
        }
    }
    finish(failures)
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Train(a) => {
            setup_threads(a.common.jobs)?;
            cmd_train(a)
        }
        Command::Evaluate(a) => {
            setup_threads(a.common.jobs)?;
            cmd_evaluate(a)
        }
        Command::GridSearch(a) => {
            setup_threads(a.jobs)?;
            cmd_grid_search(a)
        }
        Command::Reproduce(a) => {
            setup_threads(a.jobs)?;
            cmd_reproduce(a)
        }
        Command::Curves(a) => {
            setup_threads(a.jobs)?;
            cmd_curves(a)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(3)
        }
    }
}
