//! Rank aggregation: weighted Borda, plain Borda and modal ranking.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ranking::{ranking_from_scores, Ranking};

/// Complete rankings over one label set, each with a positive voting weight.
#[derive(Debug, Clone)]
pub struct WeightedProfile {
    rankings: Vec<Ranking>,
    weights: Vec<f64>,
}

impl WeightedProfile {
    pub fn new(rankings: Vec<Ranking>, weights: Vec<f64>) -> Result<Self> {
        if rankings.is_empty() {
            return Err(Error::InvalidConfig("profile needs at least one ranking".into()));
        }
        if rankings.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: rankings.len(),
                found: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::OutOfRange(format!("voting weight {w} must be positive")));
        }
        check_rankings(&rankings)?;
        Ok(WeightedProfile { rankings, weights })
    }

    pub fn unweighted(rankings: Vec<Ranking>) -> Result<Self> {
        let weights = vec![1.0; rankings.len()];
        WeightedProfile::new(rankings, weights)
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn check_rankings(rankings: &[Ranking]) -> Result<()> {
    let Some(first) = rankings.first() else {
        return Err(Error::InvalidConfig("no rankings to aggregate".into()));
    };
    let n = first.len();
    for r in rankings {
        if r.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: r.len() });
        }
        if !r.is_complete() {
            return Err(Error::NonPermutationTarget { row: 0, n });
        }
    }
    Ok(())
}

/// Weighted pairwise-win scores: each ranking adds its weight to a label once
/// for every label it places below it.
///
/// Wins are tallied as integers per distinct weight and scaled once, so equal
/// weights reproduce plain Borda's ordering exactly.
pub fn borda_scores(profile: &WeightedProfile) -> Vec<f64> {
    let n = profile.rankings[0].len();
    let mut wins_by_weight: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for (ranking, &alpha) in profile.rankings.iter().zip(&profile.weights) {
        let wins = wins_by_weight.entry(alpha.to_bits()).or_insert_with(|| vec![0; n]);
        for (label, &rank) in ranking.ranks().iter().enumerate() {
            // a complete ranking puts exactly n - rank labels below this one
            wins[label] += (n as u32 - rank) as u64;
        }
    }
    let mut scores = vec![0.0; n];
    for (bits, wins) in &wins_by_weight {
        let alpha = f64::from_bits(*bits);
        for (score, &w) in scores.iter_mut().zip(wins) {
            *score += alpha * w as f64;
        }
    }
    scores
}

/// Labels sorted by decreasing weighted Borda score, ties to the lower index.
pub fn weighted_borda(profile: &WeightedProfile) -> Ranking {
    ranking_from_scores(&borda_scores(profile))
}

/// Weighted Borda with unit weights.
pub fn borda(rankings: &[Ranking]) -> Result<Ranking> {
    Ok(weighted_borda(&WeightedProfile::unweighted(rankings.to_vec())?))
}

/// Most frequent ranking. Frequency ties fall back to Borda over the tied
/// modes (each counted once), then the index tie-break.
pub fn modal_ranking(rankings: &[Ranking]) -> Result<Ranking> {
    check_rankings(rankings)?;
    let mut counts: BTreeMap<&Ranking, usize> = BTreeMap::new();
    for r in rankings {
        *counts.entry(r).or_insert(0) += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    let modes: Vec<Ranking> = counts
        .into_iter()
        .filter(|&(_, c)| c == top)
        .map(|(r, _)| r.clone())
        .collect();
    if modes.len() == 1 {
        return Ok(modes.into_iter().next().unwrap());
    }
    borda(&modes)
}
