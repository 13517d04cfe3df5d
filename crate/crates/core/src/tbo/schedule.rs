//! Particle and iteration budgets across tree levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::Scalar;

/// Linear decrement with a floor: `next = max(prev - step, floor)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub step: usize,
    pub floor: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { step: 0, floor: 1 }
    }
}

impl Schedule {
    pub fn new(step: usize, floor: usize) -> Self {
        Self { step, floor }
    }

    pub fn next(&self, prev: usize) -> usize {
        prev.saturating_sub(self.step).max(self.floor)
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if self.floor == 0 {
            return Err(Error::Config(format!("{what} schedule floor must be at least 1")));
        }
        Ok(())
    }
}

pub fn schedule_particles(prev: usize, step: usize, floor: usize) -> usize {
    Schedule::new(step, floor).next(prev)
}

pub fn schedule_subiters(prev: usize, step: usize, floor: usize) -> usize {
    Schedule::new(step, floor).next(prev)
}

/// Split `total` particles across regions in proportion to `sizes`.
///
/// Largest-remainder apportionment with at least one particle per region;
/// the result always sums to `total`. Ties go to the lower index.
pub fn allocate_particles_by_size<S: Scalar>(total: usize, sizes: &[S]) -> Result<Vec<usize>> {
    let n = sizes.len();
    if n == 0 {
        return Err(Error::Config("no regions to allocate particles to".into()));
    }
    if total < n {
        return Err(Error::Config(format!(
            "{total} particles cannot cover {n} regions with one each"
        )));
    }
    if sizes.iter().any(|s| !(s.is_finite() && *s > S::zero())) {
        return Err(Error::Config("region sizes must be positive and finite".into()));
    }
    let sum: f64 = sizes.iter().map(|s| s.as_f64()).sum();
    let shares: Vec<f64> = sizes.iter().map(|s| total as f64 * s.as_f64() / sum).collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| (s.floor() as usize).max(1)).collect();
    let remainder = |i: usize| shares[i] - shares[i].floor();

    let mut by_remainder: Vec<usize> = (0..n).collect();
    by_remainder.sort_by(|&a, &b| remainder(b).partial_cmp(&remainder(a)).unwrap());
    let mut assigned: usize = counts.iter().sum();
    for &i in by_remainder.iter().cycle() {
        if assigned >= total {
            break;
        }
        counts[i] += 1;
        assigned += 1;
    }
    // The floor of one may have over-assigned; take back from the regions
    // whose count most exceeds their share.
    while assigned > total {
        let i = (0..n)
            .filter(|&i| counts[i] > 1)
            .max_by(|&a, &b| {
                let ea = counts[a] as f64 - shares[a];
                let eb = counts[b] as f64 - shares[b];
                ea.partial_cmp(&eb).unwrap().then(b.cmp(&a))
            })
            .expect("total >= n leaves a region above one");
        counts[i] -= 1;
        assigned -= 1;
    }
    Ok(counts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Best<S> {
    pub point: Point<S>,
    pub cost: S,
}

/// Keep the cheaper of the incumbent and this iteration's best.
pub fn update_global_best<S: Scalar>(global: Option<Best<S>>, iteration_best: Best<S>) -> Best<S> {
    match global {
        Some(g) if g.cost <= iteration_best.cost => g,
        _ => iteration_best,
    }
}
