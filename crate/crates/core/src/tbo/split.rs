//! Choosing where to cut a region and enumerating the resulting children.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Interval, Region};
use crate::rng::RngStream;
use crate::Scalar;

/// How a binary split picks its axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Axes in fixed cyclic order: 0, 1, ..., d-1, 0, ...
    Alternate,
    /// Axis 0 with probability `p`, otherwise a uniformly chosen other axis.
    /// In two dimensions this is the vertical/horizontal coin flip.
    Random(f64),
}

/// Inputs available to an adaptive branching rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchingContext<S> {
    pub iteration: usize,
    pub volume: S,
    /// Cost of the global best so far; `None` before the first iteration.
    pub incumbent: Option<S>,
}

pub type BranchingFn<S> = Arc<dyn Fn(&BranchingContext<S>) -> usize + Send + Sync>;

/// Branching factor per iteration for adaptive trees.
#[derive(Clone)]
pub enum BranchingSchedule<S> {
    /// `leading[i]` at iteration `i`, `then` afterwards.
    Steps { leading: Vec<usize>, then: usize },
    Custom(BranchingFn<S>),
}

impl<S> fmt::Debug for BranchingSchedule<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchingSchedule::Steps { leading, then } => f
                .debug_struct("Steps")
                .field("leading", leading)
                .field("then", then)
                .finish(),
            BranchingSchedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<S: Scalar> BranchingSchedule<S> {
    pub fn steps(leading: Vec<usize>, then: usize) -> Self {
        BranchingSchedule::Steps { leading, then }
    }

    /// Four children at the root, three at depth one, binary afterwards.
    pub fn four_three_two() -> Self {
        Self::steps(vec![4, 3], 2)
    }

    pub fn branching(&self, ctx: &BranchingContext<S>) -> usize {
        match self {
            BranchingSchedule::Steps { leading, then } => {
                leading.get(ctx.iteration).copied().unwrap_or(*then)
            }
            BranchingSchedule::Custom(rule) => rule(ctx),
        }
    }
}

#[derive(Clone, Debug)]
pub enum TboVariant<S> {
    Binary(Orientation),
    /// Every axis is cut each iteration: 2^d children.
    MultiBranch,
    Adaptive(BranchingSchedule<S>),
}

impl<S: Scalar> TboVariant<S> {
    pub fn validate(&self) -> Result<()> {
        if let TboVariant::Binary(Orientation::Random(p)) = self {
            if !(*p > 0.0 && *p < 1.0) {
                return Err(Error::Config(format!("orientation probability must lie in (0, 1), got {p}")));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            TboVariant::Binary(_) => "binary",
            TboVariant::MultiBranch => "multibranch",
            TboVariant::Adaptive(_) => "adaptive",
        }
    }
}

/// Fractions of a side between which a cut point may fall.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitWindow<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Default for SplitWindow<S> {
    fn default() -> Self {
        Self {
            lo: S::of(0.3),
            hi: S::of(0.7),
        }
    }
}

impl<S: Scalar> SplitWindow<S> {
    pub fn new(lo: S, hi: S) -> Result<Self> {
        let window = Self { lo, hi };
        window.validate()?;
        Ok(window)
    }

    pub fn validate(&self) -> Result<()> {
        if !(S::zero() < self.lo && self.lo < self.hi && self.hi < S::one()) {
            return Err(Error::Config(format!(
                "split window must satisfy 0 < lo < hi < 1, got ({}, {})",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// `[L1, L2]` for the side `[r1, r2]`.
    pub fn bounds(&self, side: Interval<S>) -> (S, S) {
        let w = side.width();
        (self.lo * w + side.lower, self.hi * w + side.lower)
    }
}

/// Where cut points are placed within their windows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPointRule {
    /// Uniformly at random inside the window.
    #[default]
    Uniform,
    /// At the nominal position: the middle of the side for a single cut,
    /// `j/α` of the side for an α-way cut. Ignores the window.
    Midpoint,
}

/// Cuts along one axis. `points` are ascending, each inside its window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut<S> {
    pub dim: usize,
    pub points: Vec<S>,
    pub windows: Vec<(S, S)>,
}

impl<S> Cut<S> {
    pub fn pieces(&self) -> usize {
        self.points.len() + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan<S> {
    pub cuts: Vec<Cut<S>>,
}

impl<S: Scalar> SplitPlan<S> {
    /// Number of children the plan produces.
    pub fn branching(&self) -> usize {
        self.cuts.iter().map(Cut::pieces).product()
    }

    /// Child `index` of `parent`. The first cut varies fastest: in two
    /// dimensions with cuts on axes 0 then 1, children are ordered
    /// lower-left, lower-right, upper-left, upper-right.
    pub fn child(&self, parent: &Region<S>, index: usize) -> Result<Region<S>> {
        let alpha = self.branching();
        if index >= alpha {
            return Err(Error::Config(format!("child index {index} out of range for {alpha} children")));
        }
        let mut bounds = parent.bounds().to_vec();
        let mut rest = index;
        for cut in &self.cuts {
            let slot = rest % cut.pieces();
            rest /= cut.pieces();
            let side = bounds.get_mut(cut.dim).ok_or(Error::DimensionOutOfRange {
                index: cut.dim,
                dim: parent.dim(),
            })?;
            let lower = if slot == 0 { side.lower } else { cut.points[slot - 1] };
            let upper = if slot == cut.points.len() { side.upper } else { cut.points[slot] };
            *side = Interval { lower, upper };
        }
        Region::from_intervals(bounds)
    }
}

/// Cut points for an `pieces`-way split of `side`.
fn cut_points<S: Scalar>(
    side: Interval<S>,
    pieces: usize,
    window: SplitWindow<S>,
    rule: SplitPointRule,
    rng: &mut RngStream,
) -> (Vec<S>, Vec<(S, S)>) {
    if pieces == 2 {
        let (l1, l2) = window.bounds(side);
        let point = match rule {
            SplitPointRule::Uniform => rng.uniform_between(l1, l2),
            SplitPointRule::Midpoint => side.midpoint(),
        };
        return (vec![point], vec![(l1, l2)]);
    }
    // α-way cut of one axis: cut j is drawn around j/α of the side, with a
    // half-width that reduces to the two-way window for α = 2 and keeps the
    // windows disjoint for larger α.
    let alpha = S::of(pieces as f64);
    let half = ((window.hi - window.lo) / (S::of(2.0) * (alpha - S::one()))).min(S::of(0.49) / alpha);
    let w = side.width();
    (1..pieces)
        .map(|j| {
            let nominal = S::of(j as f64) / alpha;
            let bounds = (side.lower + (nominal - half) * w, side.lower + (nominal + half) * w);
            let point = match rule {
                SplitPointRule::Uniform => rng.uniform_between(bounds.0, bounds.1),
                SplitPointRule::Midpoint => side.lower + nominal * w,
            };
            (point, bounds)
        })
        .unzip()
}

/// Decide which axes to cut at `iteration` and where.
pub fn plan_split<S: Scalar>(
    region: &Region<S>,
    variant: &TboVariant<S>,
    ctx: &BranchingContext<S>,
    window: SplitWindow<S>,
    rule: SplitPointRule,
    rng: &mut RngStream,
) -> Result<SplitPlan<S>> {
    let d = region.dim();
    let iteration = ctx.iteration;
    // (axes, pieces per axis)
    let (axes, pieces): (Vec<usize>, usize) = match variant {
        TboVariant::Binary(Orientation::Alternate) => (vec![iteration % d], 2),
        TboVariant::Binary(Orientation::Random(p)) => {
            let axis = if d == 1 || rng.uniform::<f64>() < *p {
                0
            } else {
                1 + rng.index(d - 1)
            };
            (vec![axis], 2)
        }
        TboVariant::MultiBranch => ((0..d).collect(), 2),
        TboVariant::Adaptive(schedule) => {
            let alpha = schedule.branching(ctx);
            if alpha < 2 {
                return Err(Error::Config(format!(
                    "branching factor must be at least 2, schedule gave {alpha} at iteration {iteration}"
                )));
            }
            if alpha.is_power_of_two() {
                let cuts = alpha.trailing_zeros() as usize;
                if cuts > d {
                    return Err(Error::Config(format!(
                        "branching factor {alpha} needs {cuts} cut axes but the region has {d}"
                    )));
                }
                ((0..cuts).map(|j| (iteration + j) % d).collect(), 2)
            } else {
                (vec![iteration % d], alpha)
            }
        }
    };
    let mut cuts = Vec::with_capacity(axes.len());
    for dim in axes {
        let (points, windows) = cut_points(region.interval(dim)?, pieces, window, rule, rng);
        cuts.push(Cut { dim, points, windows });
    }
    Ok(SplitPlan { cuts })
}

/// All children of `region` under `plan`, in child-index order.
pub fn apply_split<S: Scalar>(region: &Region<S>, plan: &SplitPlan<S>) -> Result<Vec<Region<S>>> {
    (0..plan.branching()).map(|i| plan.child(region, i)).collect()
}

/// The child that survives; every other child is discarded.
pub fn shrink_bounds<S: Scalar>(parent: &Region<S>, plan: &SplitPlan<S>, chosen: usize) -> Result<Region<S>> {
    plan.child(parent, chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ctx(iteration: usize) -> BranchingContext<f64> {
        BranchingContext {
            iteration,
            volume: 1.0,
            incumbent: None,
        }
    }

    fn single(dim: usize, point: f64) -> SplitPlan<f64> {
        SplitPlan {
            cuts: vec![Cut {
                dim,
                points: vec![point],
                windows: vec![(point, point)],
            }],
        }
    }

    #[test]
    fn alternate_cycles_axes() {
        let region = Region::cube(2, -100.0, 100.0).unwrap();
        let variant = TboVariant::Binary(Orientation::Alternate);
        let mut rng = RngStream::new(0);
        let dims: Vec<usize> = (0..4)
            .map(|i| {
                plan_split(&region, &variant, &ctx(i), SplitWindow::default(), SplitPointRule::Uniform, &mut rng)
                    .unwrap()
                    .cuts[0]
                    .dim
            })
            .collect();
        assert_eq!(dims, vec![0, 1, 0, 1]);
    }

    #[test]
    fn random_orientation_frequency() {
        let region = Region::cube(2, 0.0, 1.0).unwrap();
        let variant = TboVariant::Binary(Orientation::Random(0.25));
        let mut rng = RngStream::new(1);
        let zeros = (0..20_000)
            .filter(|&i| {
                plan_split(&region, &variant, &ctx(i), SplitWindow::default(), SplitPointRule::Uniform, &mut rng)
                    .unwrap()
                    .cuts[0]
                    .dim
                    == 0
            })
            .count();
        let rate = zeros as f64 / 20_000.0;
        assert!((rate - 0.25).abs() < 0.015, "{rate}");
    }

    #[test]
    fn cut_point_in_window() {
        let region = Region::new(vec![(0.0, 10.0)]).unwrap();
        let variant = TboVariant::Binary(Orientation::Alternate);
        let mut rng = RngStream::new(2);
        for i in 0..1000 {
            let plan =
                plan_split(&region, &variant, &ctx(i), SplitWindow::default(), SplitPointRule::Uniform, &mut rng).unwrap();
            let sp = plan.cuts[0].points[0];
            assert!((3.0..=7.0).contains(&sp), "{sp}");
            assert_eq!(plan.cuts[0].windows[0], (3.0, 7.0));
        }
    }

    #[test]
    fn multibranch_cuts_every_axis() {
        let region = Region::cube(2, -100.0, 100.0).unwrap();
        let plan = plan_split(
            &region,
            &TboVariant::MultiBranch,
            &ctx(0),
            SplitWindow::default(),
            SplitPointRule::Uniform,
            &mut RngStream::new(3),
        )
        .unwrap();
        assert_eq!(plan.cuts.len(), 2);
        assert_eq!(plan.branching(), 4);
    }

    #[test]
    fn adaptive_four_three_two() {
        let region = Region::cube(2, -100.0, 100.0).unwrap();
        let variant = TboVariant::Adaptive(BranchingSchedule::four_three_two());
        let mut rng = RngStream::new(4);
        let alphas: Vec<usize> = (0..5)
            .map(|i| {
                plan_split(&region, &variant, &ctx(i), SplitWindow::default(), SplitPointRule::Uniform, &mut rng)
                    .unwrap()
                    .branching()
            })
            .collect();
        assert_eq!(alphas, vec![4, 3, 2, 2, 2]);
    }

    #[test]
    fn adaptive_rejects_impossible_factors() {
        let region = Region::cube(2, 0.0, 1.0).unwrap();
        let mut rng = RngStream::new(5);
        for alpha in [0, 1, 8] {
            let variant = TboVariant::Adaptive(BranchingSchedule::steps(vec![], alpha));
            assert!(
                plan_split(&region, &variant, &ctx(0), SplitWindow::default(), SplitPointRule::Uniform, &mut rng).is_err(),
                "alpha {alpha}"
            );
        }
    }

    #[test]
    fn three_way_windows_are_ordered_and_disjoint() {
        let side = Interval { lower: 0.0, upper: 30.0 };
        let (points, windows) = cut_points(side, 3, SplitWindow::default(), SplitPointRule::Uniform, &mut RngStream::new(6));
        assert_eq!(points.len(), 2);
        assert!(windows[0].1 < windows[1].0);
        assert_relative_eq!(windows[0].0, 7.0, epsilon = 1e-12);
        assert_relative_eq!(windows[1].1, 23.0, epsilon = 1e-12);
        for (p, w) in points.iter().zip(&windows) {
            assert!(w.0 <= *p && *p <= w.1);
        }
    }

    #[test]
    fn interval_split() {
        let region = Region::new(vec![(0.0, 10.0)]).unwrap();
        let children = apply_split(&region, &single(0, 4.0)).unwrap();
        assert_eq!(children[0], Region::new(vec![(0.0, 4.0)]).unwrap());
        assert_eq!(children[1], Region::new(vec![(4.0, 10.0)]).unwrap());
        assert_eq!(shrink_bounds(&region, &single(0, 4.0), 1).unwrap(), children[1]);
        assert!(shrink_bounds(&region, &single(0, 4.0), 2).is_err());
    }

    #[test]
    fn quadrants() {
        let square = Region::cube(2, 0.0, 1.0).unwrap();
        let plan = SplitPlan {
            cuts: vec![
                Cut { dim: 0, points: vec![0.5], windows: vec![(0.3, 0.7)] },
                Cut { dim: 1, points: vec![0.5], windows: vec![(0.3, 0.7)] },
            ],
        };
        let children = apply_split(&square, &plan).unwrap();
        assert_eq!(children.len(), 4);
        assert!(children.iter().all(|c| c.volume() == 0.25));
        // Index 3 is upper-right.
        assert_eq!(
            shrink_bounds(&square, &plan, 3).unwrap(),
            Region::new(vec![(0.5, 1.0), (0.5, 1.0)]).unwrap()
        );
    }

    #[test]
    fn nested_shrinks() {
        let region = Region::new(vec![(0.0, 10.0)]).unwrap();
        let once = shrink_bounds(&region, &single(0, 4.0), 1).unwrap();
        let twice = shrink_bounds(&once, &single(0, 6.0), 0).unwrap();
        assert!(region.contains_region(&once) && once.contains_region(&twice));
        assert!(twice.volume() < once.volume() && once.volume() < region.volume());
    }

    proptest! {
        #[test]
        fn children_partition_parent(
            bounds in proptest::collection::vec((-50.0..50.0f64, 0.1..20.0f64), 1..4),
            alpha in 2usize..9,
            seed in any::<u64>(),
        ) {
            let region = Region::new(bounds.into_iter().map(|(l, w)| (l, l + w)).collect()).unwrap();
            let d = region.dim();
            let variant = TboVariant::Adaptive(BranchingSchedule::steps(vec![], alpha));
            let plan = plan_split(&region, &variant, &ctx(seed as usize % 7), SplitWindow::default(), SplitPointRule::Uniform, &mut RngStream::new(seed));
            if alpha.is_power_of_two() && alpha.trailing_zeros() as usize > d {
                prop_assert!(plan.is_err());
                return Ok(());
            }
            let plan = plan.unwrap();
            prop_assert_eq!(plan.branching(), alpha);
            let children = apply_split(&region, &plan).unwrap();
            let total: f64 = children.iter().map(Region::volume).sum();
            prop_assert!((total - region.volume()).abs() <= 1e-9 * region.volume());
            for c in &children {
                prop_assert!(region.contains_region(c));
            }
            // Interiors are disjoint: centers of distinct children fall in exactly one child.
            for (i, c) in children.iter().enumerate() {
                let center = c.center();
                for (j, other) in children.iter().enumerate() {
                    if i != j {
                        prop_assert!(!other.bounds().iter().zip(center.iter()).all(|(b, &x)| b.lower < x && x < b.upper));
                    }
                }
            }
            for cut in &plan.cuts {
                let side = region.interval(cut.dim).unwrap();
                for (p, w) in cut.points.iter().zip(&cut.windows) {
                    prop_assert!(w.0 <= *p && *p <= w.1);
                    prop_assert!(side.lower < *p && *p < side.upper);
                }
            }
        }
    }
}
