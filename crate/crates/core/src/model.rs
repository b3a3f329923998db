//! The five compared methods behind one trained-model type.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{train_bagging, train_random_forest, Aggregator, BaggedEnsemble, BaggingConfig};
use crate::boosting::{train_adaboost_lr, BoostConfig, BoostedEnsemble, Sampling};
use crate::error::{Error, Result};
use crate::ranking::{Dataset, LabelSet, Ranking};
use crate::tree::{train_tree, RankingTree, TreeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Single,
    Boost,
    BaggingModal,
    BaggingBorda,
    RandomForest,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Single,
        Method::Boost,
        Method::BaggingModal,
        Method::BaggingBorda,
        Method::RandomForest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Single => "single",
            Method::Boost => "boost",
            Method::BaggingModal => "bagging-modal",
            Method::BaggingBorda => "bagging-borda",
            Method::RandomForest => "rf",
        }
    }

    pub fn is_ensemble(self) -> bool {
        self != Method::Single
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// A method plus every hyperparameter needed to train it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    pub n_models: usize,
    pub sample_ratio: f64,
    pub tree: TreeConfig,
    pub sampling: Sampling,
}

impl MethodSpec {
    pub fn new(method: Method) -> Self {
        MethodSpec {
            method,
            n_models: 50,
            sample_ratio: 1.0,
            tree: TreeConfig::default(),
            sampling: Sampling::Weighted,
        }
    }

    pub fn with_n_models(self, n_models: usize) -> Self {
        MethodSpec { n_models, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Single(RankingTree),
    Boost(BoostedEnsemble),
    /// Bagging, bagging + Borda and random forests share one representation.
    Bagged(Method, BaggedEnsemble),
}

impl Model {
    pub fn method(&self) -> Method {
        match self {
            Model::Single(_) => Method::Single,
            Model::Boost(_) => Method::Boost,
            Model::Bagged(m, _) => *m,
        }
    }

    pub fn label_set(&self) -> &LabelSet {
        match self {
            Model::Single(t) => t.label_set(),
            Model::Boost(e) => e.label_set(),
            Model::Bagged(_, e) => e.label_set(),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Single(t) => t.n_features(),
            Model::Boost(e) => e.n_features(),
            Model::Bagged(_, e) => e.n_features(),
        }
    }

    /// Number of member trees.
    pub fn size(&self) -> usize {
        match self {
            Model::Single(_) => 1,
            Model::Boost(e) => e.records().len(),
            Model::Bagged(_, e) => e.trees().len(),
        }
    }

    pub fn predict(&self, features: &[f64]) -> Result<Ranking> {
        self.predict_prefix(features, usize::MAX)
    }

    /// Prediction using only the first `size` members (clamped to what exists).
    pub fn predict_prefix(&self, features: &[f64], size: usize) -> Result<Ranking> {
        match self {
            Model::Single(t) => t.predict(features).cloned(),
            Model::Boost(e) => e.predict_prefix(features, size),
            Model::Bagged(_, e) => e.predict_prefix(features, size),
        }
    }
}

pub fn train_model(data: &Dataset, spec: &MethodSpec, seed: u64) -> Result<Model> {
    let bagging = BaggingConfig { n_models: spec.n_models, tree: spec.tree, seed, sampling: spec.sampling };
    Ok(match spec.method {
        Method::Single => Model::Single(train_tree(data, &spec.tree)?),
        Method::Boost => Model::Boost(train_adaboost_lr(
            data,
            &BoostConfig {
                n_iterations: spec.n_models,
                sample_ratio: spec.sample_ratio,
                tree: spec.tree,
                seed,
                sampling: spec.sampling,
            },
        )?),
        Method::BaggingModal => {
            Model::Bagged(Method::BaggingModal, train_bagging(data, Aggregator::Modal, &bagging)?)
        }
        Method::BaggingBorda => {
            Model::Bagged(Method::BaggingBorda, train_bagging(data, Aggregator::Borda, &bagging)?)
        }
        Method::RandomForest => Model::Bagged(Method::RandomForest, train_random_forest(data, &bagging)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SynthConfig};

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("vrs".parse::<Method>().is_err());
    }

    #[test]
    fn identity_sampling_reduces_every_method_to_one_tree() {
        let data = generate_synthetic(&SynthConfig {
            n_instances: 80,
            n_features: 1,
            n_labels: 4,
            noise_sigma: 0.2,
            seed: 12,
        })
        .unwrap();
        let single = train_model(&data, &MethodSpec::new(Method::Single), 0).unwrap();
        for method in Method::ALL {
            let spec = MethodSpec { sampling: Sampling::Identity, ..MethodSpec::new(method).with_n_models(1) };
            let model = train_model(&data, &spec, 3).unwrap();
            assert_eq!(model.size(), 1);
            for inst in data.instances() {
                assert_eq!(model.predict(&inst.features).unwrap(), single.predict(&inst.features).unwrap());
            }
        }
    }
}
