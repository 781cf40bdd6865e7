use num_rational::Ratio;
use serde::Serialize;

use super::AnalysisError;
use crate::num::Scalar;

/// Largest pooled sample the exact test accepts.
pub const MAX_EXACT_N: usize = 20;

/// One-sided exact rank-sum test of "A tends to be larger than B".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSumResult<T> {
    /// Sum of sample A's (mid)ranks in the pooled sample.
    pub statistic: T,
    pub p_one_sided: T,
    pub n: usize,
    pub m: usize,
    /// Assignments of the pooled ranks to A with a rank sum at least the
    /// observed one.
    pub favorable: u64,
    /// All C(n + m, n) assignments.
    pub total: u64,
}

impl<T> RankSumResult<T> {
    pub fn p_exact(&self) -> Ratio<u64> {
        Ratio::new(self.favorable, self.total)
    }
}

/// Midranks of the pooled sample, doubled so ties stay integral.
fn doubled_midranks<T: Scalar>(pooled: &[T]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].partial_cmp(&pooled[j]).expect("finite"));
    let mut ranks = vec![0u64; pooled.len()];
    let mut lo = 0;
    while lo < order.len() {
        let mut hi = lo;
        while hi + 1 < order.len() && pooled[order[hi + 1]] == pooled[order[lo]] {
            hi += 1;
        }
        // positions lo..=hi hold ranks lo+1..=hi+1; twice their mean
        let doubled = (lo + 1 + hi + 1) as u64;
        for &k in &order[lo..=hi] {
            ranks[k] = doubled;
        }
        lo = hi + 1;
    }
    ranks
}

/// Exact one-sided test: the probability, over all equally likely ways of
/// drawing `a.len()` of the pooled ranks, that the drawn ranks sum to at
/// least A's observed rank sum. Ties receive midranks.
pub fn rank_sum_test<T: Scalar>(a: &[T], b: &[T]) -> Result<RankSumResult<T>, AnalysisError> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return Err(AnalysisError::EmptySample);
    }
    if n + m > MAX_EXACT_N {
        return Err(AnalysisError::ExactModeUnavailable { n, m });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let pooled: Vec<T> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let observed: u64 = ranks[..n].iter().sum();
    let max_sum: u64 = ranks.iter().sum();

    // ways[k][s]: subsets of size k with doubled rank sum s
    let width = max_sum as usize + 1;
    let mut ways = vec![vec![0u64; width]; n + 1];
    ways[0][0] = 1;
    for &r in &ranks {
        let r = r as usize;
        for k in (1..=n).rev() {
            for s in (r..width).rev() {
                ways[k][s] += ways[k - 1][s - r];
            }
        }
    }
    let favorable: u64 = ways[n][observed as usize..].iter().sum();
    let total: u64 = ways[n].iter().sum();
    Ok(RankSumResult {
        statistic: T::from_u64(observed).expect("fits") / T::lit(2.0),
        p_one_sided: T::from_u64(favorable).expect("fits") / T::from_u64(total).expect("fits"),
        n,
        m,
        favorable,
        total,
    })
}
