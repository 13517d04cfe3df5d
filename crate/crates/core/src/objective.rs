//! Cost functions over a bounded domain, with optional grid quantization.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::Scalar;

pub type CostFn<S> = Arc<dyn Fn(&[S]) -> S + Send + Sync>;

/// A minimization target.
///
/// Candidates are snapped to the grid (when a step is set) before the cost
/// function sees them, so the searched landscape is the quantized one.
#[derive(Clone)]
pub struct Objective<S: Scalar> {
    id: String,
    domain: Region<S>,
    grid_step: Option<S>,
    known_optimum: Option<(Point<S>, S)>,
    cost: CostFn<S>,
}

impl<S: Scalar> fmt::Debug for Objective<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("id", &self.id)
            .field("domain", &self.domain)
            .field("grid_step", &self.grid_step)
            .field("known_optimum", &self.known_optimum)
            .finish_non_exhaustive()
    }
}

impl<S: Scalar> Objective<S> {
    pub fn new(
        id: impl Into<String>,
        domain: Region<S>,
        cost: impl Fn(&[S]) -> S + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            domain,
            grid_step: None,
            known_optimum: None,
            cost: Arc::new(cost),
        }
    }

    pub fn with_grid_step(mut self, step: S) -> Result<Self> {
        if !(step > S::zero()) || !step.is_finite() {
            return Err(Error::Config(format!("grid step must be positive, got {step}")));
        }
        self.grid_step = Some(step);
        Ok(self)
    }

    pub fn with_known_optimum(mut self, point: Point<S>, cost: S) -> Result<Self> {
        if !self.domain.contains(&point) {
            return Err(Error::Config(format!(
                "known optimum {:?} lies outside the domain of {}",
                point.coords(),
                self.id
            )));
        }
        self.known_optimum = Some((point, cost));
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Region<S> {
        &self.domain
    }

    pub fn grid_step(&self) -> Option<S> {
        self.grid_step
    }

    pub fn known_optimum(&self) -> Option<&(Point<S>, S)> {
        self.known_optimum.as_ref()
    }

    /// Snap every coordinate to the nearest grid node, counted from the
    /// domain's lower bound. Ties go toward +∞.
    pub fn quantize(&self, point: &[S]) -> Point<S> {
        let Some(step) = self.grid_step else {
            return Point(point.to_vec());
        };
        Point(
            point
                .iter()
                .zip(self.domain.bounds())
                .map(|(&x, b)| {
                    let steps = (x - b.lower) / step;
                    // Absorb representation error so that exact ties such as
                    // 3.15 on a 0.1 grid still round up.
                    let slack = steps.abs().max(S::one()) * S::epsilon() * S::of(64.0);
                    let n = (steps + S::of(0.5) + slack).floor();
                    let last = ((b.upper - b.lower) / step + slack).floor();
                    let n = n.max(S::zero()).min(last);
                    b.clamp(b.lower + n * step)
                })
                .collect(),
        )
    }

    /// Cost at the quantized image of `point`.
    pub fn evaluate(&self, point: &[S]) -> Result<S> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        for (dim, (&x, b)) in point.iter().zip(self.domain.bounds()).enumerate() {
            if !b.contains(x) {
                return Err(Error::OutsideDomain {
                    dim,
                    value: x.as_f64(),
                    lower: b.lower.as_f64(),
                    upper: b.upper.as_f64(),
                });
            }
        }
        let snapped = self.quantize(point);
        let cost = (self.cost)(&snapped);
        if cost.is_nan() {
            return Err(Error::NonFinite(format!(
                "{} returned NaN at {:?}",
                self.id,
                snapped.coords()
            )));
        }
        Ok(cost)
    }

    /// Raw cost function, bypassing containment checks and quantization.
    pub fn cost_fn(&self) -> &CostFn<S> {
        &self.cost
    }
}

pub fn quantize<S: Scalar>(point: &[S], objective: &Objective<S>) -> Point<S> {
    objective.quantize(point)
}
