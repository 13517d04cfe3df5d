//! Region-local search engines behind one interface.
//!
//! Every engine keeps a fixed-size population inside the region it is given,
//! clamps out-of-region moves to the boundary, and reports an elitist
//! best-so-far trace: `trace[0]` is the best after initialization and
//! `trace[t]` the best after iteration `t`.

mod ga;
mod local_search;
mod pso;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use ga::{GaParams, GaPopulation};
pub use local_search::{LocalSearchParams, LocalSearchState};
pub use pso::{PsoParams, PsoSwarm};

use crate::error::{Error, Result};
use crate::geometry::{Point, Region};
use crate::objective::Objective;
use crate::rng::RngStream;
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult<S> {
    pub best_point: Point<S>,
    pub best_cost: S,
    pub evaluations: u64,
    pub trace: Vec<S>,
}

/// Iterations per engine run unless configured otherwise.
pub const DEFAULT_SUB_ITERATIONS: usize = 40;

/// Population size and iteration count for one engine run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub particles: usize,
    pub iterations: usize,
}

/// A search procedure that can be run inside one region.
///
/// Implementations must only evaluate points inside `region` and must be
/// deterministic in `rng`.
pub trait SubAlgorithm<S: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn search(
        &self,
        objective: &Objective<S>,
        region: &Region<S>,
        budget: Budget,
        rng: &mut RngStream,
    ) -> Result<SearchResult<S>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    #[serde(alias = "local-search")]
    Ls,
    Pso,
    Ga,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Ls => "ls",
            EngineKind::Pso => "pso",
            EngineKind::Ga => "ga",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ls" | "local-search" | "localsearch" => Ok(EngineKind::Ls),
            "pso" => Ok(EngineKind::Pso),
            "ga" => Ok(EngineKind::Ga),
            other => Err(Error::Config(format!("unknown sub-algorithm `{other}`"))),
        }
    }
}

#[derive(Clone)]
pub enum Engine<S: Scalar> {
    LocalSearch(LocalSearchParams<S>),
    Pso(PsoParams<S>),
    Ga(GaParams<S>),
    Custom(Arc<dyn SubAlgorithm<S>>),
}

impl<S: Scalar> fmt::Debug for Engine<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::LocalSearch(p) => f.debug_tuple("LocalSearch").field(p).finish(),
            Engine::Pso(p) => f.debug_tuple("Pso").field(p).finish(),
            Engine::Ga(p) => f.debug_tuple("Ga").field(p).finish(),
            Engine::Custom(c) => f.debug_tuple("Custom").field(&c.name()).finish(),
        }
    }
}

impl<S: Scalar> Engine<S> {
    pub fn default_for(kind: EngineKind) -> Self {
        match kind {
            EngineKind::Ls => Engine::LocalSearch(LocalSearchParams::default()),
            EngineKind::Pso => Engine::Pso(PsoParams::default()),
            EngineKind::Ga => Engine::Ga(GaParams::default()),
        }
    }

    /// Evaluations one iteration costs with `particles` members. Local
    /// search may skip a few; custom engines are assumed to evaluate every
    /// member once.
    pub fn evaluations_per_iteration(&self, particles: usize) -> u64 {
        match self {
            Engine::Ga(p) => particles.saturating_sub(p.elites) as u64,
            _ => particles as u64,
        }
    }
}

impl<S: Scalar> SubAlgorithm<S> for Engine<S> {
    fn name(&self) -> &str {
        match self {
            Engine::LocalSearch(_) => "ls",
            Engine::Pso(_) => "pso",
            Engine::Ga(_) => "ga",
            Engine::Custom(c) => c.name(),
        }
    }

    fn search(
        &self,
        objective: &Objective<S>,
        region: &Region<S>,
        budget: Budget,
        rng: &mut RngStream,
    ) -> Result<SearchResult<S>> {
        if let Engine::Custom(custom) = self {
            return custom.search(objective, region, budget, rng);
        }
        check_search_inputs(objective, region, budget)?;
        match self {
            Engine::LocalSearch(params) => drive(
                LocalSearchState::init(params.clone(), budget.particles, objective, region, rng)?,
                budget.iterations,
                objective,
                region,
                rng,
            ),
            Engine::Pso(params) => drive(
                PsoSwarm::init(params.clone(), budget.particles, objective, region, rng)?,
                budget.iterations,
                objective,
                region,
                rng,
            ),
            Engine::Ga(params) => drive(
                GaPopulation::init(params.clone(), budget.particles, objective, region, rng)?,
                budget.iterations,
                objective,
                region,
                rng,
            ),
            Engine::Custom(_) => unreachable!(),
        }
    }
}

/// Engine plus its population size (NP) and iteration count (SI).
#[derive(Clone, Debug)]
pub struct SubAlgorithmConfig<S: Scalar> {
    pub engine: Engine<S>,
    pub n_particles: usize,
    pub n_iterations: usize,
}

impl<S: Scalar> SubAlgorithmConfig<S> {
    pub fn new(engine: Engine<S>, n_particles: usize, n_iterations: usize) -> Self {
        Self {
            engine,
            n_particles,
            n_iterations,
        }
    }

    pub fn of_kind(kind: EngineKind, n_particles: usize, n_iterations: usize) -> Self {
        Self::new(Engine::default_for(kind), n_particles, n_iterations)
    }

    pub fn local_search(n_particles: usize, n_iterations: usize) -> Self {
        Self::of_kind(EngineKind::Ls, n_particles, n_iterations)
    }

    pub fn pso(n_particles: usize, n_iterations: usize) -> Self {
        Self::of_kind(EngineKind::Pso, n_particles, n_iterations)
    }

    pub fn ga(n_particles: usize, n_iterations: usize) -> Self {
        Self::of_kind(EngineKind::Ga, n_particles, n_iterations)
    }

    pub fn budget(&self) -> Budget {
        Budget {
            particles: self.n_particles,
            iterations: self.n_iterations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::Config("sub-algorithm needs at least one particle".into()));
        }
        if self.n_iterations == 0 {
            return Err(Error::Config("sub-algorithm needs at least one iteration".into()));
        }
        match &self.engine {
            Engine::LocalSearch(p) => p.validate(),
            Engine::Pso(p) => p.validate(),
            Engine::Ga(p) => p.validate(),
            Engine::Custom(_) => Ok(()),
        }
    }
}

/// Run `config` once inside `region`.
pub fn run_subalgorithm<S: Scalar>(
    config: &SubAlgorithmConfig<S>,
    objective: &Objective<S>,
    region: &Region<S>,
    rng: &mut RngStream,
) -> Result<SearchResult<S>> {
    config.validate()?;
    config.engine.search(objective, region, config.budget(), rng)
}

fn check_search_inputs<S: Scalar>(
    objective: &Objective<S>,
    region: &Region<S>,
    budget: Budget,
) -> Result<()> {
    if region.dim() != objective.dim() {
        return Err(Error::DimensionMismatch {
            expected: objective.dim(),
            got: region.dim(),
        });
    }
    if !objective.domain().contains_region(region) {
        return Err(Error::Config(format!(
            "search region is not inside the domain of {}",
            objective.id()
        )));
    }
    if budget.particles == 0 {
        return Err(Error::Config("sub-algorithm needs at least one particle".into()));
    }
    Ok(())
}

/// One engine's mutable population; `step` advances a single generation.
pub trait PopulationState<S: Scalar> {
    fn step(&mut self, objective: &Objective<S>, region: &Region<S>, rng: &mut RngStream)
        -> Result<()>;

    fn best(&self) -> (&Point<S>, S);

    fn evaluations(&self) -> u64;
}

fn drive<S: Scalar, P: PopulationState<S>>(
    mut state: P,
    iterations: usize,
    objective: &Objective<S>,
    region: &Region<S>,
    rng: &mut RngStream,
) -> Result<SearchResult<S>> {
    let mut trace = Vec::with_capacity(iterations + 1);
    trace.push(state.best().1);
    for _ in 0..iterations {
        state.step(objective, region, rng)?;
        trace.push(state.best().1);
    }
    let (point, cost) = state.best();
    Ok(SearchResult {
        best_point: point.clone(),
        best_cost: cost,
        evaluations: state.evaluations(),
        trace,
    })
}

/// Evaluates candidates and remembers the best one seen.
#[derive(Clone, Debug)]
pub(crate) struct Incumbent<S> {
    pub point: Point<S>,
    pub cost: S,
    pub evaluations: u64,
}

impl<S: Scalar> Incumbent<S> {
    pub fn empty(dim: usize) -> Self {
        Self {
            point: Point::origin(dim),
            cost: S::infinity(),
            evaluations: 0,
        }
    }

    pub fn evaluate(&mut self, objective: &Objective<S>, point: &Point<S>) -> Result<S> {
        let cost = objective.evaluate(point)?;
        self.evaluations += 1;
        if cost < self.cost || self.evaluations == 1 {
            self.cost = cost;
            self.point = point.clone();
        }
        Ok(cost)
    }
}
