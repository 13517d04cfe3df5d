//! Axis-aligned hyperrectangles and points.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point<S>(pub Vec<S>);

impl<S: Scalar> Point<S> {
    pub fn new(coords: Vec<S>) -> Self {
        Self(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![S::zero(); dim])
    }

    pub fn splat(dim: usize, value: S) -> Self {
        Self(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.0
    }
}

impl<S> Deref for Point<S> {
    type Target = [S];

    fn deref(&self) -> &[S] {
        &self.0
    }
}

impl<S> DerefMut for Point<S> {
    fn deref_mut(&mut self) -> &mut [S] {
        &mut self.0
    }
}

impl<S> From<Vec<S>> for Point<S> {
    fn from(coords: Vec<S>) -> Self {
        Self(coords)
    }
}

/// Closed interval `[lower, upper]` on one axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval<S> {
    pub lower: S,
    pub upper: S,
}

impl<S: Scalar> Interval<S> {
    pub fn width(&self) -> S {
        self.upper - self.lower
    }

    pub fn contains(&self, x: S) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn clamp(&self, x: S) -> S {
        x.max(self.lower).min(self.upper)
    }

    pub fn midpoint(&self) -> S {
        self.lower + self.width() * S::of(0.5)
    }
}

/// Axis-aligned hyperrectangle with strictly positive extent on every axis.
///
/// Invariants are checked on construction; a `Region` obtained from any
/// public constructor is never degenerate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(S, S)>", into = "Vec<(S, S)>")]
pub struct Region<S: Scalar> {
    bounds: Vec<Interval<S>>,
}

impl<S: Scalar> TryFrom<Vec<(S, S)>> for Region<S> {
    type Error = Error;

    fn try_from(bounds: Vec<(S, S)>) -> Result<Self> {
        Self::new(bounds)
    }
}

impl<S: Scalar> From<Region<S>> for Vec<(S, S)> {
    fn from(region: Region<S>) -> Self {
        region.bounds.iter().map(|b| (b.lower, b.upper)).collect()
    }
}

impl<S: Scalar> Region<S> {
    pub fn new(bounds: Vec<(S, S)>) -> Result<Self> {
        Self::from_intervals(
            bounds
                .into_iter()
                .map(|(lower, upper)| Interval { lower, upper })
                .collect(),
        )
    }

    pub fn from_intervals(bounds: Vec<Interval<S>>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::EmptyRegion);
        }
        for (dim, b) in bounds.iter().enumerate() {
            // `!(a < b)` also rejects NaN bounds.
            if !(b.lower < b.upper) || !b.lower.is_finite() || !b.upper.is_finite() {
                return Err(Error::DegenerateRegion {
                    dim,
                    lower: b.lower.as_f64(),
                    upper: b.upper.as_f64(),
                });
            }
        }
        Ok(Self { bounds })
    }

    /// The cube `[lower, upper]^dim`.
    pub fn cube(dim: usize, lower: S, upper: S) -> Result<Self> {
        Self::new(vec![(lower, upper); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Interval<S>] {
        &self.bounds
    }

    pub fn interval(&self, dim: usize) -> Result<Interval<S>> {
        self.bounds
            .get(dim)
            .copied()
            .ok_or(Error::DimensionOutOfRange {
                index: dim,
                dim: self.dim(),
            })
    }

    /// Extent of the region along `dim`.
    pub fn size(&self, dim: usize) -> Result<S> {
        self.interval(dim).map(|b| b.width())
    }

    pub fn sizes(&self) -> impl Iterator<Item = S> + '_ {
        self.bounds.iter().map(Interval::width)
    }

    pub fn volume(&self) -> S {
        self.sizes().fold(S::one(), |acc, w| acc * w)
    }

    pub fn center(&self) -> Point<S> {
        Point(self.bounds.iter().map(Interval::midpoint).collect())
    }

    pub fn contains(&self, point: &[S]) -> bool {
        point.len() == self.dim() && self.bounds.iter().zip(point).all(|(b, &x)| b.contains(x))
    }

    /// `true` when `other` lies inside `self` (closed containment).
    pub fn contains_region(&self, other: &Region<S>) -> bool {
        other.dim() == self.dim()
            && self
                .bounds
                .iter()
                .zip(&other.bounds)
                .all(|(outer, inner)| outer.lower <= inner.lower && inner.upper <= outer.upper)
    }

    pub fn clamp_in_place(&self, point: &mut [S]) {
        for (x, b) in point.iter_mut().zip(&self.bounds) {
            *x = b.clamp(*x);
        }
    }

    /// Copy of `self` with `dim` restricted to `[lower, upper]`.
    pub fn with_interval(&self, dim: usize, lower: S, upper: S) -> Result<Self> {
        let mut bounds = self.bounds.clone();
        let slot = bounds.get_mut(dim).ok_or(Error::DimensionOutOfRange {
            index: dim,
            dim: self.dim(),
        })?;
        *slot = Interval { lower, upper };
        Self::from_intervals(bounds)
    }

    /// Point drawn coordinate-wise uniformly from the open interior.
    pub fn uniform_in(&self, rng: &mut RngStream) -> Point<S> {
        Point(
            self.bounds
                .iter()
                .map(|b| {
                    // Rounding can land on a bound for very narrow intervals.
                    for _ in 0..16 {
                        let x = b.lower + b.width() * rng.uniform_open::<S>();
                        if x > b.lower && x < b.upper {
                            return x;
                        }
                    }
                    b.midpoint()
                })
                .collect(),
        )
    }
}

/// Extent of `region` along `dim`.
pub fn region_size<S: Scalar>(region: &Region<S>, dim: usize) -> Result<S> {
    region.size(dim)
}

pub fn region_volume<S: Scalar>(region: &Region<S>) -> S {
    region.volume()
}

pub fn uniform_in<S: Scalar>(region: &Region<S>, rng: &mut RngStream) -> Point<S> {
    region.uniform_in(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sizes() {
        let r = Region::new(vec![(0.0, 10.0)]).unwrap();
        assert_eq!(region_size(&r, 0).unwrap(), 10.0);
        let r = Region::cube(2, -100.0, 100.0).unwrap();
        assert_eq!(region_size(&r, 1).unwrap(), 200.0);
        let r = Region::new(vec![(2.0, 2.5)]).unwrap();
        assert_eq!(region_size(&r, 0).unwrap(), 0.5);
        assert_eq!(
            r.size(1),
            Err(Error::DimensionOutOfRange { index: 1, dim: 1 })
        );
    }

    #[test]
    fn volumes() {
        assert_eq!(Region::cube(2, 0.0, 1.0).unwrap().volume(), 1.0);
        assert_eq!(
            Region::new(vec![(0.0, 2.0), (0.0, 3.0)]).unwrap().volume(),
            6.0
        );
        assert_eq!(Region::cube(2, -500.0, 500.0).unwrap().volume(), 1e6);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(matches!(
            Region::new(vec![(0.0, 1.0), (3.0, 3.0)]),
            Err(Error::DegenerateRegion { dim: 1, .. })
        ));
        assert!(Region::new(vec![(1.0, 0.0)]).is_err());
        assert!(Region::new(vec![(f64::NAN, 0.0)]).is_err());
        assert_eq!(Region::<f64>::new(vec![]), Err(Error::EmptyRegion));
    }

    #[test]
    fn uniform_in_narrow_region() {
        let r = Region::new(vec![(5.0, 5.0001)]).unwrap();
        let mut rng = RngStream::new(1);
        for _ in 0..1000 {
            let p = r.uniform_in(&mut rng);
            assert!(p[0] > 5.0 && p[0] < 5.0001);
        }
        let r32 = Region::<f32>::new(vec![(5.0, 5.0001)]).unwrap();
        for _ in 0..1000 {
            let p = r32.uniform_in(&mut rng);
            assert!(p[0] > 5.0 && p[0] < 5.0001);
        }
    }

    #[test]
    fn uniform_in_mean() {
        let r = Region::new(vec![(0.0, 1.0)]).unwrap();
        let mut rng = RngStream::new(2024).child("lln");
        let mean = (0..10_000).map(|_| r.uniform_in(&mut rng)[0]).sum::<f64>() / 10_000.0;
        assert!((0.48..=0.52).contains(&mean), "mean {mean}");
    }

    #[test]
    fn uniform_in_is_reproducible() {
        let r = Region::cube(3, -1.0, 1.0).unwrap();
        let a = r.uniform_in(&mut RngStream::new(9).child("init"));
        let b = r.uniform_in(&mut RngStream::new(9).child("init"));
        assert_eq!(a, b);
    }

    #[test]
    fn containment_and_clamp() {
        let r = Region::new(vec![(0.0, 1.0), (-2.0, 2.0)]).unwrap();
        assert!(r.contains(&[0.0, 2.0]));
        assert!(!r.contains(&[1.5, 0.0]));
        assert!(!r.contains(&[0.5]));
        let mut p = [1.5, -3.0];
        r.clamp_in_place(&mut p);
        assert_eq!(p, [1.0, -2.0]);
        assert_relative_eq!(r.center()[1], 0.0);
    }

    #[test]
    fn converts_to_bounds_and_back() {
        let r = Region::cube(2, -1.0, 1.0).unwrap();
        let bounds: Vec<(f64, f64)> = r.clone().into();
        assert_eq!(bounds, vec![(-1.0, 1.0), (-1.0, 1.0)]);
        assert_eq!(Region::try_from(bounds).unwrap(), r);
        assert!(Region::<f64>::try_from(vec![(1.0, 1.0)]).is_err());
    }
}
