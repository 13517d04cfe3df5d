use serde::{Deserialize, Serialize};

use super::{Incumbent, PopulationState};
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::objective::Objective;
use crate::rng::RngStream;
use crate::Scalar;

/// Global-best particle swarm settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams<S> {
    pub inertia: S,
    pub cognitive: S,
    pub social: S,
    /// Velocity limit per axis, as a fraction of the region side.
    pub max_velocity: S,
}

impl<S: Scalar> Default for PsoParams<S> {
    fn default() -> Self {
        Self {
            inertia: S::of(0.7),
            cognitive: S::of(1.5),
            social: S::of(1.5),
            max_velocity: S::of(0.2),
        }
    }
}

impl<S: Scalar> PsoParams<S> {
    pub fn validate(&self) -> Result<()> {
        let all = [self.inertia, self.cognitive, self.social, self.max_velocity];
        if all.iter().any(|v| !v.is_finite() || *v < S::zero()) {
            return Err(Error::Config(format!("PSO coefficients must be finite and non-negative: {self:?}")));
        }
        Ok(())
    }
}

/// Swarm where every particle is attracted to its own best and to the best
/// position found by the whole swarm so far.
#[derive(Clone, Debug)]
pub struct PsoSwarm<S: Scalar> {
    params: PsoParams<S>,
    positions: Vec<Point<S>>,
    velocities: Vec<Vec<S>>,
    personal_best: Vec<Point<S>>,
    personal_cost: Vec<S>,
    incumbent: Incumbent<S>,
}

impl<S: Scalar> PsoSwarm<S> {
    pub fn init(
        params: PsoParams<S>,
        particles: usize,
        objective: &Objective<S>,
        region: &Region<S>,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let positions = (0..particles).map(|_| region.uniform_in(rng)).collect();
        Self::from_positions(params, positions, objective)
    }

    /// Swarm at rest at the given positions.
    pub fn from_positions(
        params: PsoParams<S>,
        positions: Vec<Point<S>>,
        objective: &Objective<S>,
    ) -> Result<Self> {
        let mut incumbent = Incumbent::empty(objective.dim());
        let personal_cost = positions
            .iter()
            .map(|p| incumbent.evaluate(objective, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            velocities: vec![vec![S::zero(); objective.dim()]; positions.len()],
            personal_best: positions.clone(),
            positions,
            personal_cost,
            incumbent,
        })
    }

    pub fn positions(&self) -> &[Point<S>] {
        &self.positions
    }
}

impl<S: Scalar> PopulationState<S> for PsoSwarm<S> {
    fn step(
        &mut self,
        objective: &Objective<S>,
        region: &Region<S>,
        rng: &mut RngStream,
    ) -> Result<()> {
        let PsoParams {
            inertia,
            cognitive,
            social,
            max_velocity,
        } = self.params;
        let global = self.incumbent.point.clone();
        for i in 0..self.positions.len() {
            for (d, size) in region.sizes().enumerate() {
                let limit = max_velocity * size;
                let x = self.positions[i][d];
                let r1: S = rng.uniform();
                let r2: S = rng.uniform();
                let v = inertia * self.velocities[i][d]
                    + cognitive * r1 * (self.personal_best[i][d] - x)
                    + social * r2 * (global[d] - x);
                let v = v.max(-limit).min(limit);
                self.velocities[i][d] = v;
                self.positions[i][d] = x + v;
            }
            region.clamp_in_place(&mut self.positions[i]);
            let cost = self.incumbent.evaluate(objective, &self.positions[i])?;
            if cost < self.personal_cost[i] {
                self.personal_cost[i] = cost;
                self.personal_best[i] = self.positions[i].clone();
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
