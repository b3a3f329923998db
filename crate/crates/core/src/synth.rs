//! Seeded synthetic label-ranking data.
//!
//! Features are uniform on `[-1, 1]^d`. A fixed random utility matrix scores
//! every label linearly in the features; Gaussian noise is added per label and
//! the noisy utilities are sorted into the target ranking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};
use crate::ranking::{ranking_from_scores, Dataset, Instance, LabelSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_instances: usize,
    pub n_features: usize,
    pub n_labels: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_instances < 1 {
            return Err(Error::InvalidConfig("n_instances must be at least 1".into()));
        }
        if self.n_features < 1 {
            return Err(Error::InvalidConfig("n_features must be at least 1".into()));
        }
        if self.n_labels < 2 {
            return Err(Error::InvalidConfig("n_labels must be at least 2".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidConfig("noise_sigma must be a non-negative number".into()));
        }
        Ok(())
    }
}

pub fn generate_synthetic(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let SynthConfig { n_instances, n_features: d, n_labels, noise_sigma, seed } = *config;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma)
        .map_err(|e| Error::InvalidConfig(format!("noise distribution: {e}")))?;

    let utilities: Vec<Vec<f64>> = (0..n_labels)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();

    let mut instances = Vec::with_capacity(n_instances);
    for _ in 0..n_instances {
        let features: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let scores: Vec<f64> = utilities
            .iter()
            .map(|theta| {
                let u: f64 = theta.iter().zip(&features).map(|(t, x)| t * x).sum();
                u + rng.sample(noise)
            })
            .collect();
        instances.push(Instance { features, target: ranking_from_scores(&scores) });
    }
    Dataset::new(
        LabelSet::numbered(n_labels)?,
        (1..=d).map(|j| format!("x{j}")).collect(),
        instances,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn config(seed: u64) -> SynthConfig {
        SynthConfig { n_instances: 500, n_features: 3, n_labels: 3, noise_sigma: 0.2, seed }
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate_synthetic(&config(7)).unwrap(), generate_synthetic(&config(7)).unwrap());
        assert_ne!(generate_synthetic(&config(7)).unwrap(), generate_synthetic(&config(8)).unwrap());
    }

    #[test]
    fn shape_and_ranges() {
        let data = generate_synthetic(&config(1)).unwrap();
        assert_eq!((data.m(), data.d(), data.n_labels()), (500, 3, 3));
        assert!(data
            .instances()
            .iter()
            .all(|i| i.features.iter().all(|x| (-1.0..=1.0).contains(x)) && i.target.is_complete()));
    }

    #[test]
    fn all_permutations_appear() {
        // frozen after generating with seed 7: every one of the 6 orders occurs
        let data = generate_synthetic(&config(7)).unwrap();
        let seen: HashSet<_> = data.instances().iter().map(|i| i.target.clone()).collect();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(generate_synthetic(&SynthConfig { n_labels: 1, ..config(1) }).is_err());
        assert!(generate_synthetic(&SynthConfig { n_features: 0, ..config(1) }).is_err());
        assert!(generate_synthetic(&SynthConfig { noise_sigma: -1.0, ..config(1) }).is_err());
    }
}
