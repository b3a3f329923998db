//! Comparison ensembles: bagging with modal or Borda aggregation, and random
//! forests (bagging plus a random feature subset per split, Borda aggregation).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aggregation::{borda, modal_ranking};
use crate::boosting::Sampling;
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::ranking::{Dataset, LabelSet, Ranking};
use crate::tree::{train_tree, FeatureSubset, RankingTree, TreeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregator {
    Modal,
    Borda,
}

impl Aggregator {
    pub fn aggregate(self, rankings: &[Ranking]) -> Result<Ranking> {
        match self {
            Aggregator::Modal => modal_ranking(rankings),
            Aggregator::Borda => borda(rankings),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaggedEnsemble {
    trees: Vec<RankingTree>,
    aggregator: Aggregator,
    label_set: LabelSet,
}

impl BaggedEnsemble {
    pub fn new(trees: Vec<RankingTree>, aggregator: Aggregator, label_set: LabelSet) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidConfig("ensemble has no trees".into()));
        }
        if trees.iter().any(|t| t.label_set() != &label_set) {
            return Err(Error::InvalidConfig("tree trained on another label set".into()));
        }
        Ok(BaggedEnsemble { trees, aggregator, label_set })
    }

    pub fn trees(&self) -> &[RankingTree] {
        &self.trees
    }

    pub fn aggregator(&self) -> Aggregator {
        self.aggregator
    }

    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    pub fn predict(&self, features: &[f64]) -> Result<Ranking> {
        self.predict_prefix(features, self.trees.len())
    }

    /// Prediction of the first `size` trees.
    pub fn predict_prefix(&self, features: &[f64], size: usize) -> Result<Ranking> {
        let trees = &self.trees[..size.clamp(1, self.trees.len())];
        let mut votes = Vec::with_capacity(trees.len());
        for tree in trees {
            votes.push(tree.predict(features)?.clone());
        }
        self.aggregator.aggregate(&votes)
    }
}

pub fn predict_bagged(ensemble: &BaggedEnsemble, features: &[f64]) -> Result<Ranking> {
    ensemble.predict(features)
}

/// Settings shared by the bagging family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaggingConfig {
    pub n_models: usize,
    pub tree: TreeConfig,
    pub seed: u64,
    pub sampling: Sampling,
}

/// Tree `k` depends only on `(seed, k)`, so the first `s` trees of a large
/// ensemble equal an ensemble trained with `n_models = s`.
fn train_members(data: &Dataset, config: &BaggingConfig, subset: FeatureSubset) -> Result<Vec<RankingTree>> {
    if config.n_models < 1 {
        return Err(Error::InvalidConfig("n_models must be at least 1".into()));
    }
    if data.m() == 0 {
        return Err(Error::EmptyDataset);
    }
    (0..config.n_models)
        .into_par_iter()
        .map(|k| {
            let member_seed = derive_seed(config.seed, k as u64);
            let tree_config = TreeConfig {
                feature_subset: subset,
                seed: derive_seed(member_seed, 1),
                ..config.tree
            };
            match config.sampling {
                Sampling::Identity => train_tree(data, &tree_config),
                Sampling::Weighted => {
                    let mut rng = ChaCha8Rng::seed_from_u64(member_seed);
                    let m = data.m();
                    let bag: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
                    train_tree(&data.select(&bag), &tree_config)
                }
            }
        })
        .collect()
}

/// Bagging: `n_models` trees on uniform bootstrap samples of size `m`.
pub fn train_bagging(data: &Dataset, aggregator: Aggregator, config: &BaggingConfig) -> Result<BaggedEnsemble> {
    let trees = train_members(data, config, FeatureSubset::All)?;
    BaggedEnsemble::new(trees, aggregator, data.label_set().clone())
}

/// Random forest: bagging with `ceil(sqrt(d))` candidate features per split.
pub fn train_random_forest(data: &Dataset, config: &BaggingConfig) -> Result<BaggedEnsemble> {
    let trees = train_members(data, config, FeatureSubset::RandomSqrt)?;
    BaggedEnsemble::new(trees, Aggregator::Borda, data.label_set().clone())
}
