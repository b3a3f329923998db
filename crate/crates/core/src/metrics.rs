//! Kendall tau-b between rankings and the per-instance boosting loss.

use crate::error::{Error, Result};
use crate::ranking::Ranking;

/// Rank correlation in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Correlation(f64);

impl Correlation {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Correlation> for f64 {
    fn from(c: Correlation) -> f64 {
        c.0
    }
}

/// Tie-adjusted Kendall tau-b over label pairs.
///
/// Uses Knight's sort-and-merge scheme: sort labels by `(a, b)`, count the
/// inversions left in `b` with a merge sort, and correct for tied pairs.
pub fn kendall_tau_b(a: &Ranking, b: &Ranking) -> Result<Correlation> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let (ra, rb) = (a.ranks(), b.ranks());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by_key(|&i| (ra[i], rb[i]));

    let n0 = pairs(n as u64);
    let mut tied_a = 0u64;
    let mut tied_both = 0u64;
    let (mut run_a, mut run_ab) = (1u64, 1u64);
    for w in idx.windows(2) {
        let (p, q) = (w[0], w[1]);
        if ra[p] == ra[q] {
            run_a += 1;
            if rb[p] == rb[q] {
                run_ab += 1;
            } else {
                tied_both += pairs(run_ab);
                run_ab = 1;
            }
        } else {
            tied_a += pairs(run_a);
            tied_both += pairs(run_ab);
            run_a = 1;
            run_ab = 1;
        }
    }
    tied_a += pairs(run_a);
    tied_both += pairs(run_ab);

    let mut seq: Vec<u32> = idx.iter().map(|&i| rb[i]).collect();
    let discordant = count_inversions(&mut seq);

    // seq is now sorted by b
    let mut tied_b = 0u64;
    let mut run_b = 1u64;
    for w in seq.windows(2) {
        if w[0] == w[1] {
            run_b += 1;
        } else {
            tied_b += pairs(run_b);
            run_b = 1;
        }
    }
    tied_b += pairs(run_b);

    if tied_a == n0 || tied_b == n0 {
        return Err(Error::DegenerateRanking);
    }
    let numerator = n0 as f64 - tied_a as f64 - tied_b as f64 + tied_both as f64
        - 2.0 * discordant as f64;
    let denominator = ((n0 - tied_a) as f64 * (n0 - tied_b) as f64).sqrt();
    Ok(Correlation((numerator / denominator).clamp(-1.0, 1.0)))
}

/// `1 - tau_b(predicted, target)`, in `[0, 2]`.
pub fn instance_loss(predicted: &Ranking, target: &Ranking) -> Result<f64> {
    Ok(1.0 - kendall_tau_b(predicted, target)?.value())
}

/// Number of discordant label pairs between two complete rankings.
pub fn discordant_pairs(a: &Ranking, b: &Ranking) -> u64 {
    let (ra, rb) = (a.ranks(), b.ranks());
    let mut by_a = vec![0u32; ra.len()];
    for (label, &r) in ra.iter().enumerate() {
        by_a[r as usize - 1] = rb[label];
    }
    count_inversions(&mut by_a)
}

fn pairs(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn count_inversions(v: &mut [u32]) -> u64 {
    let mut buf = v.to_vec();
    merge_count(v, &mut buf)
}

fn merge_count(v: &mut [u32], buf: &mut [u32]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = merge_count(&mut v[..mid], &mut buf[..mid]);
    count += merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}
