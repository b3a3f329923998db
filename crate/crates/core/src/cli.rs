//! Command-line entry point. Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::boosting::Sampling;
use crate::error::{Error, Result};
use crate::evaluation::{benchmark, cross_validate, BenchmarkConfig, DEFAULT_SIZES};
use crate::io::{
    atomic_write, load_model, parse_dataset, parse_features_str, save_model, write_cv_result, write_dataset,
    write_predictions, write_report, ModelFile,
};
use crate::model::{train_model, Method, MethodSpec};
use crate::synth::{generate_synthetic, SynthConfig};
use crate::tree::TreeConfig;

#[derive(Debug, Parser)]
#[command(name = "lrboost", version, about = "Boosting and bagging ensembles for label ranking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct ModelArgs {
    /// Number of trees (boosting rounds for `boost`).
    #[arg(long, default_value_t = 50)]
    n_models: usize,
    /// Fraction of the training set drawn per boosting round.
    #[arg(long, default_value_t = 1.0)]
    sample_ratio: f64,
    #[arg(long, default_value_t = 16)]
    max_depth: usize,
    #[arg(long, default_value_t = 3)]
    min_leaf: usize,
    /// Train every member on the unresampled training set (testing aid).
    #[arg(long, hide = true)]
    identity_sample: bool,
}

impl ModelArgs {
    fn spec(&self, method: Method) -> MethodSpec {
        MethodSpec {
            method,
            n_models: self.n_models,
            sample_ratio: self.sample_ratio,
            tree: TreeConfig { max_depth: self.max_depth, min_leaf: self.min_leaf, ..TreeConfig::default() },
            sampling: if self.identity_sample { Sampling::Identity } else { Sampling::Weighted },
        }
    }
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and save it.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// single, boost, bagging-modal, bagging-borda or rf.
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict rankings for every row of a CSV file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate one method on one dataset.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate several methods on every CSV in a directory.
    Benchmark {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, value_delimiter = ',', value_parser = parse_method,
              default_value = "single,boost,bagging-modal,bagging-borda,rf")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Ensemble sizes for size_curve.csv (capped at --n-models).
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
        sizes: Vec<usize>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "report")]
        out_dir: PathBuf,
    },
    /// Write a synthetic dataset.
    GenSynth {
        #[arg(long, default_value_t = 500)]
        n_instances: usize,
        #[arg(long, default_value_t = 8)]
        n_features: usize,
        #[arg(long, default_value_t = 5)]
        n_labels: usize,
        #[arg(long, default_value_t = 0.5)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidConfig(_) => 1,
                _ => 2,
            }
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => atomic_write(path, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Train { data, method, model, seed, out } => {
            let spec = model.spec(method);
            let dataset = parse_dataset(&data)?;
            let trained = train_model(&dataset, &spec, seed)?;
            save_model(&out, &ModelFile { spec, seed, model: trained })
        }
        Command::Predict { model, data, out } => {
            let file = load_model(&model)?;
            let text = std::fs::read_to_string(&data).map_err(|e| Error::io(&data, e))?;
            let (_, rows) = parse_features_str(&text)?;
            let predictions = rows
                .iter()
                .map(|x| file.model.predict(x))
                .collect::<Result<Vec<_>>>()?;
            emit(out.as_deref(), &write_predictions(file.model.label_set(), &predictions)?)
        }
        Command::Evaluate { data, method, folds, model, seed, out } => {
            let dataset = parse_dataset(&data)?;
            let result = cross_validate(&dataset, &dataset_name(&data), &model.spec(method), folds, seed)?;
            emit(out.as_deref(), &write_cv_result(&result)?)
        }
        Command::Benchmark { data_dir, methods, folds, sizes, model, seed, out_dir } => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&data_dir)
                .map_err(|e| Error::io(&data_dir, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(Error::InvalidConfig(format!("no .csv files in {}", data_dir.display())));
            }
            let datasets = paths
                .iter()
                .map(|p| Ok((dataset_name(p), parse_dataset(p)?)))
                .collect::<Result<Vec<_>>>()?;
            let mut sizes: Vec<usize> = sizes.into_iter().filter(|&s| s >= 1 && s <= model.n_models).collect();
            sizes.sort_unstable();
            sizes.dedup();
            let config = BenchmarkConfig {
                specs: methods.iter().map(|&m| model.spec(m)).collect(),
                sizes,
                folds,
                seed,
            };
            write_report(&out_dir, &benchmark(&datasets, &config)?)
        }
        Command::GenSynth { n_instances, n_features, n_labels, noise_sigma, seed, out } => {
            let config = SynthConfig { n_instances, n_features, n_labels, noise_sigma, seed };
            atomic_write(&out, &write_dataset(&generate_synthetic(&config)?)?)
        }
    }
}
