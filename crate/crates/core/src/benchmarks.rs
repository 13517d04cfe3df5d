//! Sphere, Griewank, Schaffer and Schwefel test functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::objective::Objective;
use crate::Scalar;

/// Constant of the Schwefel function, as tabulated.
pub const SCHWEFEL_CONSTANT: f64 = 418.982;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkId {
    Sphere,
    Griewank,
    Schaffer,
    Schwefel,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 4] = [
        BenchmarkId::Sphere,
        BenchmarkId::Griewank,
        BenchmarkId::Schaffer,
        BenchmarkId::Schwefel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkId::Sphere => "sphere",
            BenchmarkId::Griewank => "griewank",
            BenchmarkId::Schaffer => "schaffer",
            BenchmarkId::Schwefel => "schwefel",
        }
    }

    /// Default symmetric half-range of the search domain.
    pub fn half_range(self) -> f64 {
        match self {
            BenchmarkId::Schwefel => 500.0,
            _ => 100.0,
        }
    }

    pub fn default_step(self) -> f64 {
        match self {
            BenchmarkId::Schwefel => 1.0,
            _ => 0.1,
        }
    }

    pub fn min_dim(self) -> usize {
        match self {
            BenchmarkId::Schaffer => 2,
            _ => 1,
        }
    }

    /// Raw cost function, no domain handling.
    pub fn cost<S: Scalar>(self, x: &[S]) -> S {
        match self {
            BenchmarkId::Sphere => sphere(x),
            BenchmarkId::Griewank => griewank(x),
            BenchmarkId::Schaffer => schaffer(x),
            BenchmarkId::Schwefel => schwefel(x),
        }
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchmarkId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown benchmark `{s}`")))
    }
}

pub fn sphere<S: Scalar>(x: &[S]) -> S {
    x.iter().map(|&v| v * v).sum()
}

pub fn griewank<S: Scalar>(x: &[S]) -> S {
    let sum: S = x.iter().map(|&v| v * v).sum::<S>() / S::of(4000.0);
    let product = x
        .iter()
        .enumerate()
        .fold(S::one(), |acc, (i, &v)| acc * (v / S::of((i + 1) as f64).sqrt()).cos());
    sum - product + S::one()
}

pub fn schaffer<S: Scalar>(x: &[S]) -> S {
    x.windows(2)
        .map(|pair| {
            let r2 = pair[0] * pair[0] + pair[1] * pair[1];
            let s = (S::of(50.0) * r2.powf(S::of(0.1))).sin();
            r2.powf(S::of(0.25)) * (s * s + S::one())
        })
        .sum()
}

pub fn schwefel<S: Scalar>(x: &[S]) -> S {
    let d = S::of(x.len() as f64);
    S::of(SCHWEFEL_CONSTANT) * d - x.iter().map(|&v| v * v.abs().sqrt().sin()).sum::<S>()
}

/// A benchmark instance: function, dimension, domain cube and grid step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    pub id: BenchmarkId,
    pub dim: usize,
    pub lower: f64,
    pub upper: f64,
    pub step: Option<f64>,
}

impl Benchmark {
    /// Tabulated range and step.
    pub fn standard(id: BenchmarkId, dim: usize) -> Self {
        Self {
            id,
            dim,
            lower: -id.half_range(),
            upper: id.half_range(),
            step: Some(id.default_step()),
        }
    }

    pub fn with_range(mut self, lower: f64, upper: f64) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn with_step(mut self, step: Option<f64>) -> Self {
        self.step = step;
        self
    }

    pub fn label(&self) -> String {
        format!("{}-{}d", self.id, self.dim)
    }

    fn unoptimized<S: Scalar>(&self) -> Result<Objective<S>> {
        if self.dim < self.id.min_dim() {
            return Err(Error::InvalidDimension {
                benchmark: self.id.name(),
                dim: self.dim,
            });
        }
        let domain = Region::cube(self.dim, S::of(self.lower), S::of(self.upper))?;
        let id = self.id;
        let objective = Objective::new(self.label(), domain, move |x: &[S]| id.cost(x));
        match self.step {
            Some(step) => objective.with_grid_step(S::of(step)),
            None => Ok(objective),
        }
    }

    pub fn objective<S: Scalar>(&self) -> Result<Objective<S>> {
        let objective = self.unoptimized::<S>()?;
        let (point, cost) = grid_optimum(self.id, &objective)?;
        objective.with_known_optimum(point, cost)
    }

    pub fn reference_optimum<S: Scalar>(&self) -> Result<(Point<S>, S)> {
        grid_optimum(self.id, &self.unoptimized::<S>()?)
    }
}

/// Minimum of `objective` over its grid.
///
/// Schwefel is separable, so a scan of the one-dimensional grid per axis
/// yields the exact grid minimum. The other three attain their minimum at
/// the origin, which must then be a grid node inside the domain.
fn grid_optimum<S: Scalar>(id: BenchmarkId, objective: &Objective<S>) -> Result<(Point<S>, S)> {
    let d = objective.dim();
    let point = match id {
        BenchmarkId::Schwefel => {
            let b = objective.domain().bounds()[0];
            let term = |v: S| v * v.abs().sqrt().sin();
            let best = match objective.grid_step() {
                Some(step) => {
                    let nodes = ((b.upper - b.lower) / step).floor().to_usize().unwrap_or(0);
                    (0..=nodes)
                        .map(|n| objective.quantize(&[b.lower + S::of(n as f64) * step])[0])
                        .fold(None, |best: Option<S>, x| match best {
                            Some(y) if term(y) >= term(x) => Some(y),
                            _ => Some(x),
                        })
                        .expect("grid has at least one node")
                }
                None => {
                    // Continuous domain: the interior maximiser of x sin(sqrt|x|)
                    // is 420.9687..., else the better bound.
                    let candidates = [S::of(420.968_746_359_982), b.lower, b.upper];
                    candidates
                        .into_iter()
                        .filter(|&x| b.contains(x))
                        .fold(b.lower, |y, x| if term(x) > term(y) { x } else { y })
                }
            };
            Point::splat(d, best)
        }
        _ => {
            let origin = Point::<S>::origin(d);
            if !objective.domain().contains(&origin) || objective.quantize(&origin) != origin {
                return Err(Error::Config(format!(
                    "{}: origin is not a grid node of the domain, reference optimum unknown",
                    objective.id()
                )));
            }
            origin
        }
    };
    let cost = objective.evaluate(&point)?;
    Ok((point, cost))
}

/// Benchmark `id` in `d` dimensions on its tabulated range and step.
pub fn make_benchmark<S: Scalar>(id: BenchmarkId, d: usize) -> Result<Objective<S>> {
    Benchmark::standard(id, d).objective()
}

pub fn evaluate<S: Scalar>(objective: &Objective<S>, point: &[S]) -> Result<S> {
    objective.evaluate(point)
}

pub fn reference_optimum<S: Scalar>(id: BenchmarkId, d: usize) -> Result<(Point<S>, S)> {
    Benchmark::standard(id, d).reference_optimum()
}
