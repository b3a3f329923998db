//! AdaBoost.LR: boosting for label ranking.
//!
//! Each round draws a weighted bootstrap sample, fits a ranking tree, scores
//! that tree on every training instance with `1 - tau_b`, and reweights
//! instances so the next tree concentrates on the poorly ranked ones. Trees
//! vote through weighted Borda with weight `ln(1 / beta)`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aggregation::{weighted_borda, WeightedProfile};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::metrics::instance_loss;
use crate::ranking::{Dataset, LabelSet, Ranking};
use crate::tree::{train_tree, RankingTree, TreeConfig};

/// Confidence used for a round with zero loss on every instance.
pub const BETA_MIN: f64 = 1e-10;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Instance weights: strictly positive and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn uniform(m: usize) -> Self {
        WeightVector(vec![1.0 / m as f64; m])
    }

    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::OutOfRange("weight vector is empty".into()));
        }
        if let Some(x) = w.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::OutOfRange(format!("instance weight {x} must be positive")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::OutOfRange(format!("instance weights sum to {sum}, not 1")));
        }
        Ok(WeightVector(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// How each round's training sample is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// `ceil(S m)` draws with replacement, proportional to the instance weights.
    Weighted,
    /// The full training set in its original order. Test hook.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostConfig {
    /// Maximum number of rounds.
    pub n_iterations: usize,
    /// Fraction of `m` drawn per round, in `(0, 1]`.
    pub sample_ratio: f64,
    pub tree: TreeConfig,
    pub seed: u64,
    pub sampling: Sampling,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            n_iterations: 50,
            sample_ratio: 1.0,
            tree: TreeConfig::default(),
            seed: 0,
            sampling: Sampling::Weighted,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iterations < 1 {
            return Err(Error::InvalidConfig("number of iterations must be at least 1".into()));
        }
        if !(self.sample_ratio > 0.0 && self.sample_ratio <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sample ratio {} must lie in (0, 1]",
                self.sample_ratio
            )));
        }
        self.tree.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub model: RankingTree,
    pub avg_loss: f64,
    pub beta: f64,
    pub alpha: f64,
}

/// Kept rounds in training order, plus the label set they rank.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostedEnsemble {
    records: Vec<IterationRecord>,
    label_set: LabelSet,
}

impl BoostedEnsemble {
    pub fn new(records: Vec<IterationRecord>, label_set: LabelSet) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidConfig("ensemble has no records".into()));
        }
        for r in &records {
            if !(r.alpha > 0.0 && r.beta > 0.0 && r.beta < 1.0 && r.alpha.is_finite()) {
                return Err(Error::OutOfRange(format!(
                    "record with beta {} and alpha {}",
                    r.beta, r.alpha
                )));
            }
            if r.model.label_set() != &label_set {
                return Err(Error::InvalidConfig("record trained on another label set".into()));
            }
        }
        Ok(BoostedEnsemble { records, label_set })
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn n_features(&self) -> usize {
        self.records[0].model.n_features()
    }

    /// The first `size` records (all of them if fewer were kept).
    pub fn truncated(&self, size: usize) -> BoostedEnsemble {
        let size = size.clamp(1, self.records.len());
        BoostedEnsemble { records: self.records[..size].to_vec(), label_set: self.label_set.clone() }
    }

    pub fn predict(&self, features: &[f64]) -> Result<Ranking> {
        self.predict_prefix(features, self.records.len())
    }

    /// Prediction of the ensemble made of the first `size` records.
    pub fn predict_prefix(&self, features: &[f64], size: usize) -> Result<Ranking> {
        let kept = &self.records[..size.clamp(1, self.records.len())];
        let mut rankings = Vec::with_capacity(kept.len());
        for r in kept {
            rankings.push(r.model.predict(features)?.clone());
        }
        let alphas = kept.iter().map(|r| r.alpha).collect();
        Ok(weighted_borda(&WeightedProfile::new(rankings, alphas)?))
    }
}

pub fn predict_ensemble(ensemble: &BoostedEnsemble, features: &[f64]) -> Result<Ranking> {
    ensemble.predict(features)
}

/// `ceil(ratio * m)`, forgiving rounding noise in the product.
pub fn sample_size(ratio: f64, m: usize) -> usize {
    let raw = ratio * m as f64;
    let nearest = raw.round();
    let size = if (raw - nearest).abs() < 1e-9 { nearest } else { raw.ceil() };
    (size as usize).clamp(1, m)
}

/// Indices of `ceil(ratio * m)` draws with replacement, index `i` drawn with
/// probability `weights[i]`.
pub fn weighted_sample_indices<R: Rng + ?Sized>(
    weights: &WeightVector,
    ratio: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(weights.as_slice())
        .map_err(|e| Error::OutOfRange(format!("sampling weights: {e}")))?;
    Ok((0..sample_size(ratio, weights.len())).map(|_| dist.sample(rng)).collect())
}

pub fn weighted_sample<R: Rng + ?Sized>(
    data: &Dataset,
    weights: &WeightVector,
    ratio: f64,
    rng: &mut R,
) -> Result<Dataset> {
    if weights.len() != data.m() {
        return Err(Error::DimensionMismatch { expected: data.m(), found: weights.len() });
    }
    Ok(data.select(&weighted_sample_indices(weights, ratio, rng)?))
}

/// Divides every loss by the largest one.
pub fn adjusted_losses(losses: &[f64]) -> Result<Vec<f64>> {
    if losses.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(l) = losses.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::OutOfRange(format!("loss {l} must be non-negative")));
    }
    let max = losses.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::AllZeroLoss);
    }
    Ok(losses.iter().map(|l| l / max).collect())
}

/// Weighted mean of the adjusted losses.
pub fn average_loss(adjusted: &[f64], weights: &WeightVector) -> f64 {
    adjusted.iter().zip(weights.as_slice()).map(|(l, w)| l * w).sum()
}

/// `beta = L / (1 - L)` and `alpha = ln(1 / beta)` for `0 < L < 0.5`.
pub fn model_confidence_and_weight(avg_loss: f64) -> Result<(f64, f64)> {
    if !(avg_loss > 0.0 && avg_loss < 0.5) {
        return Err(Error::OutOfRange(format!("average loss {avg_loss} outside (0, 0.5)")));
    }
    let beta = avg_loss / (1.0 - avg_loss);
    Ok((beta, (1.0 / beta).ln()))
}

/// `w'(i) = w(i) beta^(1 - L(i)) / Z`.
pub fn update_weights(weights: &WeightVector, adjusted: &[f64], beta: f64) -> Result<WeightVector> {
    if adjusted.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: weights.len(), found: adjusted.len() });
    }
    let unnormalized: Vec<f64> = weights
        .as_slice()
        .iter()
        .zip(adjusted)
        .map(|(w, l)| w * beta.powf(1.0 - l))
        .collect();
    let z: f64 = unnormalized.iter().sum();
    WeightVector::new(unnormalized.into_iter().map(|u| u / z).collect())
}

/// What happened in one boosting round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundOutcome {
    /// Model kept, weights updated, loop continues.
    Kept,
    /// Every training instance was ranked perfectly; model kept with
    /// `beta = BETA_MIN` and the loop ends.
    Perfect,
    /// Average loss reached 0.5; model discarded and the loop ends.
    Discarded,
}

/// Snapshot handed to a training observer after each round.
#[derive(Debug)]
pub struct RoundTrace<'a> {
    pub round: usize,
    pub outcome: RoundOutcome,
    pub weights_before: &'a WeightVector,
    /// Raw `1 - tau_b` losses on all training instances.
    pub losses: &'a [f64],
    /// Empty for a perfect round.
    pub adjusted: &'a [f64],
    pub avg_loss: f64,
    pub weights_after: Option<&'a WeightVector>,
    pub record: Option<&'a IterationRecord>,
}

pub fn train_adaboost_lr(data: &Dataset, config: &BoostConfig) -> Result<BoostedEnsemble> {
    train_adaboost_lr_observed(data, config, |_| {})
}

/// [`train_adaboost_lr`] with a callback invoked after every round.
pub fn train_adaboost_lr_observed<F>(
    data: &Dataset,
    config: &BoostConfig,
    mut observe: F,
) -> Result<BoostedEnsemble>
where
    F: FnMut(&RoundTrace<'_>),
{
    config.validate()?;
    let m = data.m();
    if m < 2 {
        return Err(Error::TooFewInstances { m, folds: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights = WeightVector::uniform(m);
    let mut records: Vec<IterationRecord> = Vec::new();

    for round in 0..config.n_iterations {
        let sample = match config.sampling {
            Sampling::Weighted => weighted_sample(data, &weights, config.sample_ratio, &mut rng)?,
            Sampling::Identity => data.clone(),
        };
        let tree_config = TreeConfig { seed: derive_seed(config.tree.seed, round as u64), ..config.tree };
        let model = train_tree(&sample, &tree_config)?;

        let losses = data
            .instances()
            .par_iter()
            .map(|inst| instance_loss(model.predict(&inst.features)?, &inst.target))
            .collect::<Result<Vec<f64>>>()?;

        let adjusted = match adjusted_losses(&losses) {
            Ok(adjusted) => adjusted,
            Err(Error::AllZeroLoss) => {
                let record = IterationRecord {
                    model,
                    avg_loss: 0.0,
                    beta: BETA_MIN,
                    alpha: (1.0 / BETA_MIN).ln(),
                };
                observe(&RoundTrace {
                    round,
                    outcome: RoundOutcome::Perfect,
                    weights_before: &weights,
                    losses: &losses,
                    adjusted: &[],
                    avg_loss: 0.0,
                    weights_after: None,
                    record: Some(&record),
                });
                records.push(record);
                break;
            }
            Err(e) => return Err(e),
        };
        let avg_loss = average_loss(&adjusted, &weights);

        if avg_loss >= 0.5 {
            observe(&RoundTrace {
                round,
                outcome: RoundOutcome::Discarded,
                weights_before: &weights,
                losses: &losses,
                adjusted: &adjusted,
                avg_loss,
                weights_after: None,
                record: None,
            });
            if records.is_empty() {
                return Err(Error::NoUsableModel { avg_loss });
            }
            break;
        }

        let (beta, alpha) = model_confidence_and_weight(avg_loss)?;
        let record = IterationRecord { model, avg_loss, beta, alpha };
        let next = update_weights(&weights, &adjusted, beta)?;
        observe(&RoundTrace {
            round,
            outcome: RoundOutcome::Kept,
            weights_before: &weights,
            losses: &losses,
            adjusted: &adjusted,
            avg_loss,
            weights_after: Some(&next),
            record: Some(&record),
        });
        records.push(record);
        weights = next;
    }

    BoostedEnsemble::new(records, data.label_set().clone())
}
