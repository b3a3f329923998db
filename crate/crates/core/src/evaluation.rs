//! Cross-validated benchmarking: per-fold Kendall tau-b, improvement over the
//! single model, per-dataset method ranks, ensemble-size curves and the
//! Friedman aligned-ranks statistic.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::metrics::kendall_tau_b;
use crate::model::{train_model, Method, MethodSpec, Model};
use crate::ranking::Dataset;
use crate::tree::train_tree;

/// Smallest `|single_kt|` accepted as a denominator for relative improvement.
pub const BASELINE_GUARD: f64 = 0.01;

/// Default ensemble sizes for the size curve.
pub const DEFAULT_SIZES: [usize; 5] = [1, 5, 10, 25, 50];

#[derive(Debug, Clone, PartialEq)]
pub struct CVResult {
    pub method: Method,
    pub dataset: String,
    /// Number of members used for prediction.
    pub n_models: usize,
    /// Mean test tau-b per fold.
    pub fold_scores: Vec<f64>,
    pub mean_kt: f64,
}

/// Shuffles `0..m` with `seed` and cuts it into `folds` parts whose sizes
/// differ by at most one. Each part is returned sorted.
pub fn fold_assignment(m: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || m < folds {
        return Err(Error::TooFewInstances { m, folds });
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (m / folds, m % folds);
    let mut parts = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        let mut part = idx[start..start + len].to_vec();
        part.sort_unstable();
        parts.push(part);
        start += len;
    }
    Ok(parts)
}

/// Trains one model per fold and scores every prefix size in `sizes`.
///
/// One model of the largest requested size is trained per fold; smaller sizes
/// reuse its first members. Boosting that cannot keep a single round on a
/// fold falls back to a single tree for that fold.
pub fn cross_validate_sizes(
    data: &Dataset,
    dataset: &str,
    spec: &MethodSpec,
    sizes: &[usize],
    folds: usize,
    seed: u64,
) -> Result<Vec<CVResult>> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidConfig("ensemble sizes must be positive".into()));
    }
    let parts = fold_assignment(data.m(), folds, seed)?;
    let largest = sizes.iter().copied().max().unwrap_or(1);
    let spec = spec.with_n_models(largest);

    let per_fold: Vec<Vec<f64>> = parts
        .par_iter()
        .enumerate()
        .map(|(f, test)| -> Result<Vec<f64>> {
            let test_set: BTreeSet<usize> = test.iter().copied().collect();
            let train: Vec<usize> = (0..data.m()).filter(|i| !test_set.contains(i)).collect();
            let train = data.select(&train);
            let model = match train_model(&train, &spec, derive_seed(seed, f as u64 + 1)) {
                Err(Error::NoUsableModel { .. }) => Model::Single(train_tree(&train, &spec.tree)?),
                other => other?,
            };
            sizes
                .iter()
                .map(|&size| {
                    let mut total = 0.0;
                    for &i in test {
                        let inst = &data.instances()[i];
                        let predicted = model.predict_prefix(&inst.features, size)?;
                        total += kendall_tau_b(&predicted, &inst.target)?.value();
                    }
                    Ok(total / test.len() as f64)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(sizes
        .iter()
        .enumerate()
        .map(|(s, &size)| {
            let fold_scores: Vec<f64> = per_fold.iter().map(|scores| scores[s]).collect();
            let mean_kt = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
            CVResult { method: spec.method, dataset: dataset.to_string(), n_models: size, fold_scores, mean_kt }
        })
        .collect())
}

pub fn cross_validate(data: &Dataset, dataset: &str, spec: &MethodSpec, folds: usize, seed: u64) -> Result<CVResult> {
    let mut results = cross_validate_sizes(data, dataset, spec, &[spec.n_models], folds, seed)?;
    Ok(results.remove(0))
}

/// `100 (method - single) / |single|`, refused when `|single| < 0.01`.
pub fn improvement_pct(method_kt: f64, single_kt: f64) -> Result<f64> {
    if single_kt.abs() < BASELINE_GUARD {
        return Err(Error::BaselineNearZero { single_kt });
    }
    Ok(100.0 * (method_kt - single_kt) / single_kt.abs())
}

/// Rank 1 for the highest score; exact ties share the mean of their positions.
pub fn rank_methods(scores: &[f64]) -> Vec<f64> {
    average_ranks(&scores.iter().map(|s| -s).collect::<Vec<_>>())
}

/// Ascending ranks from 1 with average ranks on exact ties.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub df: usize,
}

/// Friedman aligned-ranks statistic over a `datasets x methods` table.
///
/// Each dataset row is centred on its mean, all aligned values are ranked
/// jointly (1 = smallest), and the method and dataset rank sums enter the
/// usual chi-square-distributed statistic with `k - 1` degrees of freedom.
pub fn friedman_aligned_ranks(table: &[Vec<f64>]) -> Result<FriedmanResult> {
    let n = table.len();
    let k = table.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(Error::DegenerateTable(format!("need at least 2 x 2 scores, got {n} x {k}")));
    }
    if table.iter().any(|row| row.len() != k) {
        return Err(Error::DegenerateTable("rows have different lengths".into()));
    }
    if table.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateTable("non-finite score".into()));
    }
    let aligned: Vec<f64> = table
        .iter()
        .flat_map(|row| {
            let mean = row.iter().sum::<f64>() / k as f64;
            row.iter().map(move |v| v - mean)
        })
        .collect();
    if aligned.iter().all(|v| *v == aligned[0]) {
        return Err(Error::DegenerateTable("all aligned observations are tied".into()));
    }
    let ranks = average_ranks(&aligned);

    let mut method_sums = vec![0.0; k];
    let mut block_sums = vec![0.0; n];
    for (pos, r) in ranks.iter().enumerate() {
        block_sums[pos / k] += r;
        method_sums[pos % k] += r;
    }
    let (kf, nf) = (k as f64, n as f64);
    let kn = kf * nf;
    let numerator = (kf - 1.0)
        * (method_sums.iter().map(|r| r * r).sum::<f64>() - (kf * nf * nf / 4.0) * (kn + 1.0).powi(2));
    let denominator =
        kn * (kn + 1.0) * (2.0 * kn + 1.0) / 6.0 - block_sums.iter().map(|r| r * r).sum::<f64>() / kf;
    if denominator <= 0.0 {
        return Err(Error::DegenerateTable(format!("denominator {denominator} is not positive")));
    }
    Ok(FriedmanResult { statistic: numerator / denominator, df: k - 1 })
}

/// Upper 5% point of the chi-square distribution for `df` in `1..=10`.
pub fn chi_square_critical_95(df: usize) -> Option<f64> {
    const TABLE: [f64; 10] =
        [3.841, 5.991, 7.815, 9.488, 11.070, 12.592, 14.067, 15.507, 16.919, 18.307];
    TABLE.get(df.checked_sub(1)?).copied()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub method: Method,
    pub n_models: usize,
    pub mean_kt: f64,
}

/// Cross-validated mean tau-b at each ensemble size, from one training run
/// per fold at the largest size.
pub fn ensemble_size_sweep(
    data: &Dataset,
    dataset: &str,
    specs: &[MethodSpec],
    sizes: &[usize],
    folds: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("sizes must be strictly ascending".into()));
    }
    let mut curve = Vec::new();
    for spec in specs {
        for r in cross_validate_sizes(data, dataset, spec, sizes, folds, seed)? {
            curve.push(CurvePoint { method: r.method, n_models: r.n_models, mean_kt: r.mean_kt });
        }
    }
    Ok(curve)
}

/// Relative improvement, or the raw difference when the baseline is near zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Improvement {
    Percent(f64),
    AbsoluteDelta(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementRow {
    pub method: Method,
    pub dataset: String,
    pub value: Improvement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub dataset: String,
    pub method: Method,
    pub rank: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Dataset-major, methods in the requested order.
    pub results: Vec<CVResult>,
    pub improvements: Vec<ImprovementRow>,
    pub rank_table: Vec<RankRow>,
    /// `Err` holds the reason the statistic could not be computed.
    pub friedman: std::result::Result<FriedmanResult, String>,
    /// Mean over datasets of each method's cross-validated tau-b per size.
    pub size_curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub specs: Vec<MethodSpec>,
    pub sizes: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
}

/// Runs every method on every dataset and assembles the report.
pub fn benchmark(datasets: &[(String, Dataset)], config: &BenchmarkConfig) -> Result<EvalReport> {
    if datasets.is_empty() || config.specs.is_empty() {
        return Err(Error::InvalidConfig("benchmark needs datasets and methods".into()));
    }
    let methods: Vec<Method> = config.specs.iter().map(|s| s.method).collect();
    let cells: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..config.specs.len()).map(move |s| (d, s)))
        .collect();

    let swept: Vec<Vec<CVResult>> = cells
        .par_iter()
        .map(|&(d, s)| {
            let spec = &config.specs[s];
            let mut sizes: Vec<usize> =
                config.sizes.iter().copied().chain([spec.n_models]).collect::<BTreeSet<_>>().into_iter().collect();
            if spec.method == Method::Single {
                sizes = vec![1];
            }
            let (name, data) = &datasets[d];
            cross_validate_sizes(data, name, spec, &sizes, config.folds, derive_seed(config.seed, d as u64))
        })
        .collect::<Result<_>>()?;

    let mut results = Vec::with_capacity(cells.len());
    for (sweep, &(_, s)) in swept.iter().zip(&cells) {
        let wanted = if config.specs[s].method == Method::Single { 1 } else { config.specs[s].n_models };
        let full = sweep.iter().find(|r| r.n_models == wanted).expect("requested size present");
        results.push(full.clone());
    }

    let mut improvements = Vec::new();
    let mut rank_table = Vec::new();
    let mut score_table = Vec::with_capacity(datasets.len());
    for (d, (name, _)) in datasets.iter().enumerate() {
        let row = &results[d * methods.len()..(d + 1) * methods.len()];
        let scores: Vec<f64> = row.iter().map(|r| r.mean_kt).collect();
        if let Some(single) = row.iter().find(|r| r.method == Method::Single) {
            for r in row.iter().filter(|r| r.method.is_ensemble()) {
                let value = match improvement_pct(r.mean_kt, single.mean_kt) {
                    Ok(p) => Improvement::Percent(p),
                    Err(_) => Improvement::AbsoluteDelta(r.mean_kt - single.mean_kt),
                };
                improvements.push(ImprovementRow { method: r.method, dataset: name.clone(), value });
            }
        }
        if methods.len() >= 2 {
            for (method, rank) in methods.iter().zip(rank_methods(&scores)) {
                rank_table.push(RankRow { dataset: name.clone(), method: *method, rank });
            }
        }
        score_table.push(scores);
    }

    let friedman = friedman_aligned_ranks(&score_table).map_err(|e| e.to_string());

    let mut size_curve = Vec::new();
    for (s, spec) in config.specs.iter().enumerate() {
        let mut sizes: Vec<usize> = config.sizes.clone();
        sizes.push(spec.n_models);
        sizes.sort_unstable();
        sizes.dedup();
        for size in sizes {
            let mut total = 0.0;
            for d in 0..datasets.len() {
                let sweep = &swept[d * config.specs.len() + s];
                let point = sweep.iter().find(|r| r.n_models == size).unwrap_or(&sweep[0]);
                total += point.mean_kt;
            }
            size_curve.push(CurvePoint { method: spec.method, n_models: size, mean_kt: total / datasets.len() as f64 });
        }
    }

    Ok(EvalReport { results, improvements, rank_table, friedman, size_curve })
}
