//! Labels, rankings, instances and datasets.
//!
//! A [`Ranking`] stores, for every label index `i`, the rank position of that
//! label (1 = most preferred). Complete rankings are permutations of `1..=n`;
//! tied rankings use dense numbering and are only accepted by the metric code.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Ordered set of distinct label names. Label index `i` always means `names[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    names: Vec<String>,
}

impl LabelSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::InvalidLabelSet(format!(
                "need at least 2 labels, got {}",
                names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::InvalidLabelSet("empty label name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidLabelSet(format!("duplicate label {name:?}")));
            }
        }
        Ok(LabelSet { names })
    }

    /// Labels named `L1`, `L2`, ... `Ln`.
    pub fn numbered(n: usize) -> Result<Self> {
        LabelSet::new((1..=n).map(|i| format!("L{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Rank position per label; `ranks[i]` is the position of label `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ranking {
    ranks: Vec<u32>,
}

impl Ranking {
    /// Wraps a rank vector without checking completeness. Ranks must be positive.
    pub fn new(ranks: Vec<u32>) -> Result<Self> {
        if ranks.len() < 2 {
            return Err(Error::OutOfRange(format!(
                "ranking needs at least 2 labels, got {}",
                ranks.len()
            )));
        }
        if ranks.contains(&0) {
            return Err(Error::OutOfRange("rank positions start at 1".into()));
        }
        Ok(Ranking { ranks })
    }

    /// Wraps a rank vector that must be a permutation of `1..=n`.
    pub fn complete(ranks: Vec<u32>) -> Result<Self> {
        let r = Ranking::new(ranks)?;
        if !r.is_complete() {
            return Err(Error::NonPermutationTarget { row: 0, n: r.len() });
        }
        Ok(r)
    }

    /// Builds a complete ranking from label indices listed best first.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut ranks = vec![0u32; n];
        for (pos, &label) in order.iter().enumerate() {
            if label >= n || ranks[label] != 0 {
                return Err(Error::OutOfRange(format!("{order:?} is not a label order")));
            }
            ranks[label] = pos as u32 + 1;
        }
        Ranking::new(ranks)
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        let n = self.ranks.len();
        let mut seen = vec![false; n];
        for &r in &self.ranks {
            let r = r as usize;
            if r == 0 || r > n || seen[r - 1] {
                return false;
            }
            seen[r - 1] = true;
        }
        true
    }

    /// Label indices from most to least preferred (stable on ties).
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.ranks.len()).collect();
        idx.sort_by_key(|&i| (self.ranks[i], i));
        idx
    }

    /// True iff label `a` is strictly preferred to label `b`.
    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.ranks[a] < self.ranks[b]
    }

    /// Renders as `A>B>C` using the given label names.
    pub fn display<'a>(&'a self, labels: &'a LabelSet) -> impl fmt::Display + 'a {
        DisplayRanking { ranking: self, labels }
    }
}

struct DisplayRanking<'a> {
    ranking: &'a Ranking,
    labels: &'a LabelSet,
}

impl fmt::Display for DisplayRanking<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = self.ranking.order();
        for (k, &label) in order.iter().enumerate() {
            if k > 0 {
                let sep = if self.ranking.ranks[order[k - 1]] == self.ranking.ranks[label] {
                    "="
                } else {
                    ">"
                };
                f.write_str(sep)?;
            }
            f.write_str(&self.labels.names()[label])?;
        }
        Ok(())
    }
}

/// Sorts labels by decreasing score; equal scores go to the lower label index.
///
/// Scores must be finite.
pub fn ranking_from_scores(scores: &[f64]) -> Ranking {
    debug_assert!(scores.iter().all(|s| s.is_finite()));
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ranks = vec![0u32; scores.len()];
    for (pos, &label) in order.iter().enumerate() {
        ranks[label] = pos as u32 + 1;
    }
    Ranking { ranks }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub features: Vec<f64>,
    pub target: Ranking,
}

/// Feature vectors paired with complete ranking targets over one label set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    label_set: LabelSet,
    feature_names: Vec<String>,
    instances: Vec<Instance>,
}

/// One unvalidated input row. `row` is only used for error reporting.
#[derive(Debug, Clone)]
pub struct RawRow {
    pub row: usize,
    pub features: Vec<f64>,
    pub ranks: Vec<f64>,
}

impl Dataset {
    pub fn new(
        label_set: LabelSet,
        feature_names: Vec<String>,
        instances: Vec<Instance>,
    ) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let d = feature_names.len();
        let n = label_set.len();
        for (i, inst) in instances.iter().enumerate() {
            let row = i + 1;
            check_features(&inst.features, d, row)?;
            if inst.target.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: inst.target.len() });
            }
            if !inst.target.is_complete() {
                return Err(Error::NonPermutationTarget { row, n });
            }
        }
        Ok(Dataset { label_set, feature_names, instances })
    }

    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    /// Number of instances.
    pub fn m(&self) -> usize {
        self.instances.len()
    }

    /// Feature dimensionality.
    pub fn d(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_labels(&self) -> usize {
        self.label_set.len()
    }

    /// New dataset holding the listed instances (repeats allowed).
    ///
    /// Panics if `indices` is empty or out of bounds.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        assert!(!indices.is_empty(), "selection must be non-empty");
        Dataset {
            label_set: self.label_set.clone(),
            feature_names: self.feature_names.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }
}

pub(crate) fn check_features(features: &[f64], d: usize, row: usize) -> Result<()> {
    if features.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: features.len() });
    }
    if let Some(col) = features.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature { row, col: col + 1 });
    }
    Ok(())
}

/// Validates parsed rows into a [`Dataset`].
pub fn validate_dataset(
    rows: &[RawRow],
    label_set: LabelSet,
    feature_names: Vec<String>,
) -> Result<Dataset> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = feature_names.len();
    let n = label_set.len();
    let mut instances = Vec::with_capacity(rows.len());
    for raw in rows {
        check_features(&raw.features, d, raw.row)?;
        if raw.ranks.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: raw.ranks.len() });
        }
        let mut ranks = Vec::with_capacity(n);
        for &r in &raw.ranks {
            if !(r.is_finite() && r.fract() == 0.0 && r >= 1.0 && r <= n as f64) {
                return Err(Error::NonPermutationTarget { row: raw.row, n });
            }
            ranks.push(r as u32);
        }
        let target = Ranking { ranks };
        if !target.is_complete() {
            return Err(Error::NonPermutationTarget { row: raw.row, n });
        }
        instances.push(Instance { features: raw.features.clone(), target });
    }
    Ok(Dataset { label_set, feature_names, instances })
}
