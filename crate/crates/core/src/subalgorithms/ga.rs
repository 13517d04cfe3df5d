use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Incumbent, PopulationState};
use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::objective::Objective;
use crate::rng::RngStream;
use crate::Scalar;

/// Real-coded genetic algorithm with fitness-proportional parent selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams<S> {
    /// Probability that a child is a blend of two parents rather than a
    /// copy of the first.
    pub crossover_rate: S,
    /// BLX-α extension: each gene is drawn uniformly from the parents'
    /// interval widened by this fraction of its length on both sides.
    /// Zero gives plain intermediate recombination.
    pub blend_extension: S,
    /// Per-gene probability of a Gaussian perturbation.
    pub mutation_rate: S,
    /// Mutation standard deviation as a fraction of the region side.
    pub mutation_sigma: S,
    /// Best individuals carried over unchanged each generation.
    pub elites: usize,
}

impl<S: Scalar> Default for GaParams<S> {
    fn default() -> Self {
        Self {
            crossover_rate: S::of(0.9),
            blend_extension: S::of(0.5),
            mutation_rate: S::of(0.1),
            mutation_sigma: S::of(0.05),
            elites: 1,
        }
    }
}

impl<S: Scalar> GaParams<S> {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: S| v >= S::zero() && v <= S::one();
        if !unit(self.crossover_rate) || !unit(self.mutation_rate) {
            return Err(Error::Config(format!("GA rates must lie in [0, 1]: {self:?}")));
        }
        if !(self.blend_extension >= S::zero()) || !self.blend_extension.is_finite() {
            return Err(Error::Config(format!(
                "GA blend extension must be non-negative, got {}",
                self.blend_extension
            )));
        }
        if !(self.mutation_sigma >= S::zero()) || !self.mutation_sigma.is_finite() {
            return Err(Error::Config(format!(
                "GA mutation sigma must be non-negative, got {}",
                self.mutation_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GaPopulation<S: Scalar> {
    params: GaParams<S>,
    individuals: Vec<Point<S>>,
    costs: Vec<S>,
    incumbent: Incumbent<S>,
}

impl<S: Scalar> GaPopulation<S> {
    pub fn init(
        params: GaParams<S>,
        particles: usize,
        objective: &Objective<S>,
        region: &Region<S>,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let individuals = (0..particles).map(|_| region.uniform_in(rng)).collect();
        Self::from_individuals(params, individuals, objective)
    }

    pub fn from_individuals(
        params: GaParams<S>,
        individuals: Vec<Point<S>>,
        objective: &Objective<S>,
    ) -> Result<Self> {
        let mut incumbent = Incumbent::empty(objective.dim());
        let costs = individuals
            .iter()
            .map(|p| incumbent.evaluate(objective, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            individuals,
            costs,
            incumbent,
        })
    }

    pub fn individuals(&self) -> &[Point<S>] {
        &self.individuals
    }

    /// Roulette weights for minimization: `max_cost - cost + ε`.
    fn selection_weights(&self) -> Result<Vec<f64>> {
        let costs: Vec<f64> = self.costs.iter().map(|c| c.as_f64()).collect();
        let max = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        if !max.is_finite() || !min.is_finite() {
            return Err(Error::NonFinite("GA population cost is not finite".into()));
        }
        let spread = max - min;
        let epsilon = if spread > 0.0 { spread * 1e-6 } else { 1.0 };
        Ok(costs.iter().map(|c| max - c + epsilon).collect())
    }
}

impl<S: Scalar> PopulationState<S> for GaPopulation<S> {
    fn step(
        &mut self,
        objective: &Objective<S>,
        region: &Region<S>,
        rng: &mut RngStream,
    ) -> Result<()> {
        let n = self.individuals.len();
        let roulette = WeightedIndex::new(self.selection_weights()?)
            .map_err(|e| Error::NonFinite(format!("GA selection weights: {e}")))?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.costs[a].partial_cmp(&self.costs[b]).unwrap());
        let elites = self.params.elites.min(n);
        let mut next: Vec<Point<S>> = order[..elites].iter().map(|&i| self.individuals[i].clone()).collect();
        let mut next_costs: Vec<S> = order[..elites].iter().map(|&i| self.costs[i]).collect();

        let sigmas: Vec<S> = region.sizes().map(|w| w * self.params.mutation_sigma).collect();
        while next.len() < n {
            let first = &self.individuals[rng.sample(&roulette)];
            let second = &self.individuals[rng.sample(&roulette)];
            let mut child = if rng.uniform::<S>() < self.params.crossover_rate {
                let ext = self.params.blend_extension;
                // second + u * (first - second) is exact when parents coincide.
                Point(
                    first
                        .iter()
                        .zip(second.iter())
                        .map(|(&a, &b)| {
                            let u = rng.uniform::<S>() * (S::one() + ext + ext) - ext;
                            b + u * (a - b)
                        })
                        .collect(),
                )
            } else {
                first.clone()
            };
            for (gene, &sigma) in child.iter_mut().zip(&sigmas) {
                if rng.uniform::<S>() < self.params.mutation_rate && sigma > S::zero() {
                    let normal = Normal::new(0.0, sigma.as_f64())
                        .map_err(|e| Error::NonFinite(format!("mutation sigma: {e}")))?;
                    *gene += S::of(normal.sample(rng));
                }
            }
            region.clamp_in_place(&mut child);
            next_costs.push(self.incumbent.evaluate(objective, &child)?);
            next.push(child);
        }
        self.individuals = next;
        self.costs = next_costs;
        Ok(())
    }

    fn best(&self) -> (&Point<S>, S) {
        (&self.incumbent.point, self.incumbent.cost)
    }

    fn evaluations(&self) -> u64 {
        self.incumbent.evaluations
    }
}
