//! Exact O(|D|²) nested-loop reference join.
//!
//! Every ordered pair of points gets a distance evaluation against the same
//! squared-distance expression the grid engine uses, so the two agree
//! exactly, ties at `eps` included. The oracle materializes its whole result
//! in memory and does no pruning; keep it to datasets of at most 10^5 points.

use crate::dataset::{distance_sq, Dataset};
use crate::error::{Error, Result};
use crate::join::{JoinStats, ResultPair};
use crate::Real;

/// All ordered pairs within `eps`, sorted by (key, value).
///
/// `candidates_tested` is always |D|²; `cells_probed` and `batches` stay 0.
pub fn brute_force<F: Real>(
    dataset: &Dataset<F>,
    eps: F,
    include_self_pairs: bool,
) -> Result<(Vec<ResultPair>, JoinStats)> {
    let mut pairs = Vec::new();
    let stats = scan(dataset, eps, include_self_pairs, |key, value| {
        pairs.push(ResultPair { key, value })
    })?;
    Ok((pairs, stats))
}

/// Pair count only, same traversal as [`brute_force`].
pub fn brute_force_count<F: Real>(
    dataset: &Dataset<F>,
    eps: F,
    include_self_pairs: bool,
) -> Result<(u64, JoinStats)> {
    let stats = scan(dataset, eps, include_self_pairs, |_, _| {})?;
    Ok((stats.pairs_emitted, stats))
}

fn scan<F: Real>(
    dataset: &Dataset<F>,
    eps: F,
    include_self_pairs: bool,
    mut emit: impl FnMut(u32, u32),
) -> Result<JoinStats> {
    if eps <= F::zero() || !eps.is_finite() {
        return Err(Error::InvalidEpsilon {
            eps: eps.to_string(),
        });
    }
    let eps_sq = eps * eps;
    let len = dataset.len();
    let mut stats = JoinStats::default();
    for p in 0..len {
        let point = dataset.point(p);
        for q in 0..len {
            stats.candidates_tested += 1;
            if distance_sq(point, dataset.point(q)) <= eps_sq {
                if p == q && !include_self_pairs {
                    continue;
                }
                emit(p as u32, q as u32);
                stats.pairs_emitted += 1;
            }
        }
    }
    Ok(stats)
}
