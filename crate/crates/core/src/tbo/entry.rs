//! Probabilistic choice of the region to descend into.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::Scalar;

/// Probability of entering each region given its best cost (minimization).
///
/// * all costs positive: `P_i = 1 - B_i / ΣB`
/// * all costs negative: `P_i = B_i / ΣB`
/// * otherwise the costs are shifted to `BB_i = B_i + |min B| + 1` and the
///   positive rule is applied to `BB`.
///
/// For two regions the pair is returned complementary, `P_1 + P_2 == 1`
/// exactly.
pub fn entry_probabilities<S: Scalar>(bests: &[S]) -> Result<Vec<S>> {
    if bests.len() < 2 {
        return Err(Error::Config(format!(
            "entry probabilities need at least two regions, got {}",
            bests.len()
        )));
    }
    if let Some(bad) = bests.iter().find(|b| !b.is_finite()) {
        return Err(Error::NonFinite(format!("region best cost {bad}")));
    }
    let positive = |costs: &[S]| {
        let total: S = costs.iter().copied().sum();
        costs.iter().map(|&c| S::one() - c / total).collect::<Vec<S>>()
    };
    let mut probs = if bests.iter().all(|&b| b > S::zero()) {
        positive(bests)
    } else if bests.iter().all(|&b| b < S::zero()) {
        let total: S = bests.iter().copied().sum();
        bests.iter().map(|&b| b / total).collect()
    } else {
        let min = bests.iter().copied().fold(S::infinity(), S::min);
        let shift = min.abs() + S::one();
        let shifted: Vec<S> = bests.iter().map(|&b| b + shift).collect();
        positive(&shifted)
    };
    if probs.len() == 2 {
        // The larger of the pair is at least 1/2, so `1 - larger` is exact
        // and the two sum to one without rounding.
        let (hi, lo) = if probs[0] >= probs[1] { (0, 1) } else { (1, 0) };
        probs[lo] = S::one() - probs[hi];
    }
    for p in &mut probs {
        *p = p.max(S::zero()).min(S::one());
    }
    Ok(probs)
}

/// Draw the region to enter.
///
/// Two regions: one uniform `r`, region 0 iff `r < P_0`. More regions:
/// candidates in descending probability order (ties by index), each
/// accepted if a fresh uniform falls below its probability; if every
/// candidate rejects, the cascade starts over.
pub fn select_region<S: Scalar>(probs: &[S], rng: &mut RngStream) -> usize {
    select_region_with(probs, || rng.uniform::<S>())
}

/// [`select_region`] with an explicit source of uniform draws.
pub fn select_region_with<S: Scalar>(probs: &[S], mut draw: impl FnMut() -> S) -> usize {
    assert!(probs.len() >= 2, "need at least two regions");
    if probs.len() == 2 {
        return if draw() < probs[0] { 0 } else { 1 };
    }
    let order = descending_order(probs);
    if probs[order[0]] <= S::zero() {
        return order[0];
    }
    loop {
        for &i in &order {
            if draw() < probs[i] {
                return i;
            }
        }
    }
}

pub(crate) fn descending_order<S: Scalar>(probs: &[S]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    // Stable sort keeps index order among ties.
    order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).unwrap());
    order
}
