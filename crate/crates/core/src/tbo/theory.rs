//! Depth needed to localize the optimum, and the outer-loop cost model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeKind {
    Binary,
    MultiBranch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequiredDepth<S> {
    /// Real-valued depth.
    pub exact: S,
    /// Smallest usable integer depth, `ceil(exact)`.
    pub depth: usize,
}

/// Depth after which the surviving region, halving in expectation at every
/// cut, has shrunk to a cube of side `2ε` around the optimum.
///
/// Binary trees cut one axis per level, so they need `d` times the depth of
/// a multi-branch tree: `-d (1 + log2 ε)` against `-(1 + log2 ε)`.
pub fn required_depth<S: Scalar>(kind: TreeKind, dim: usize, epsilon: S) -> Result<RequiredDepth<S>> {
    if !(epsilon > S::zero() && epsilon < S::of(0.5)) {
        return Err(Error::Config(format!("epsilon must lie in (0, 0.5), got {epsilon}")));
    }
    if dim == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let per_axis = -(S::one() + epsilon.log2());
    let exact = match kind {
        TreeKind::Binary => S::of(dim as f64) * per_axis,
        TreeKind::MultiBranch => per_axis,
    };
    // Shave rounding noise so that an integral depth does not round up.
    let depth = (exact - exact * S::epsilon() * S::of(8.0)).ceil();
    Ok(RequiredDepth {
        exact,
        depth: depth.to_usize().unwrap_or(usize::MAX),
    })
}

/// Outer iterations one run of depth `depth` executes. The loop body runs
/// the sub-algorithm a bounded number of times, so cost is linear in depth.
pub fn time_complexity_class(depth: usize) -> usize {
    depth
}

/// Outer iterations across `restarts` independent runs.
pub fn total_iterations(depth: usize, restarts: usize) -> usize {
    time_complexity_class(depth) * restarts
}
