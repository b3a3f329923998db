//! Label ranking ensembles: AdaBoost.LR boosting, bagging with modal or Borda
//! aggregation, and random forests, all built on a Kendall-distance ranking
//! tree, plus a cross-validation benchmark harness.
//!
//! ```
//! use lrboost::boosting::{train_adaboost_lr, BoostConfig};
//! use lrboost::synth::{generate_synthetic, SynthConfig};
//!
//! let data = generate_synthetic(&SynthConfig {
//!     n_instances: 100,
//!     n_features: 3,
//!     n_labels: 4,
//!     noise_sigma: 0.2,
//!     seed: 1,
//! })
//! .unwrap();
//! let config = BoostConfig { n_iterations: 10, ..BoostConfig::default() };
//! let ensemble = train_adaboost_lr(&data, &config).unwrap();
//! let ranking = ensemble.predict(&data.instances()[0].features).unwrap();
//! assert!(ranking.is_complete());
//! ```

pub mod aggregation;
pub mod baselines;
pub mod boosting;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod metrics;
pub mod model;
pub mod ranking;
pub mod synth;
pub mod tree;

pub use error::{Error, Result};
pub use ranking::{Dataset, Instance, LabelSet, Ranking};

/// Mixes a base seed with a stream index (SplitMix64 finalizer), giving
/// independent per-member and per-fold seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
