use serde::{Deserialize, Serialize};

use super::{Incumbent, PopulationState};
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::objective::Objective;
use crate::rng::RngStream;
use crate::Scalar;

/// Random-restart hill climber settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalSearchParams<S> {
    /// Perturbation half-width as a fraction of each region side.
    pub radius: S,
    /// Consecutive rejected moves before a particle restarts at a random
    /// location. Zero disables restarts.
    pub restart_after: usize,
}

impl<S: Scalar> Default for LocalSearchParams<S> {
    fn default() -> Self {
        Self {
            radius: S::of(0.1),
            restart_after: 5,
        }
    }
}

impl<S: Scalar> LocalSearchParams<S> {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius >= S::zero()) || !self.radius.is_finite() {
            return Err(Error::Config(format!(
                "local search radius must be non-negative, got {}",
                self.radius
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LocalSearchState<S: Scalar> {
    params: LocalSearchParams<S>,
    positions: Vec<Point<S>>,
    costs: Vec<S>,
    stalled: Vec<usize>,
    incumbent: Incumbent<S>,
}

impl<S: Scalar> LocalSearchState<S> {
    pub fn init(
        params: LocalSearchParams<S>,
        particles: usize,
        objective: &Objective<S>,
        region: &Region<S>,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let positions: Vec<Point<S>> = (0..particles).map(|_| region.uniform_in(rng)).collect();
        Self::from_positions(params, positions, objective)
    }

    pub fn from_positions(
        params: LocalSearchParams<S>,
        positions: Vec<Point<S>>,
        objective: &Objective<S>,
    ) -> Result<Self> {
        let mut incumbent = Incumbent::empty(objective.dim());
        let costs = positions
            .iter()
            .map(|p| incumbent.evaluate(objective, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            stalled: vec![0; positions.len()],
            positions,
            costs,
            incumbent,
        })
    }

    pub fn positions(&self) -> &[Point<S>] {
        &self.positions
    }
}

impl<S: Scalar> PopulationState<S> for LocalSearchState<S> {
    fn step(
        &mut self,
        objective: &Objective<S>,
        region: &Region<S>,
        rng: &mut RngStream,
    ) -> Result<()> {
        for i in 0..self.positions.len() {
            let current = &self.positions[i];
            let mut candidate = Point(
                current
                    .iter()
                    .zip(region.sizes())
                    .map(|(&x, size)| {
                        let reach = self.params.radius * size;
                        x + reach * (S::of(2.0) * rng.uniform::<S>() - S::one())
                    })
                    .collect(),
            );
            region.clamp_in_place(&mut candidate);
            // A zero-length move is not a proposal.
            if candidate == *current {
                continue;
            }
            let cost = self.incumbent.evaluate(objective, &candidate)?;
            if cost < self.costs[i] {
                self.positions[i] = candidate;
                self.costs[i] = cost;
                self.stalled[i] = 0;
                continue;
            }
            self.stalled[i] += 1;
            if self.params.restart_after > 0 && self.stalled[i] >= self.params.restart_after {
                let fresh = region.uniform_in(rng);
                self.costs[i] = self.incumbent.evaluate(objective, &fresh)?;
                self.positions[i] = fresh;
                self.stalled[i] = 0;
            }
        }
        Ok(())
    }

    fn best(&self) -> (&Point<S>, S) {
        (&self.incumbent.point, self.incumbent.cost)
    }

    fn evaluations(&self) -> u64 {
        self.incumbent.evaluations
    }
}
