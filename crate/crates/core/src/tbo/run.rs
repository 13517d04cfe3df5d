//! The outer loop: split, search every child, pick one, repeat.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::entry::{entry_probabilities, select_region};
use super::schedule::{allocate_particles_by_size, update_global_best, Best, Schedule};
use super::split::{apply_split, plan_split, BranchingContext, SplitPlan, SplitPointRule, SplitWindow, TboVariant};
use crate::error::{Error, Result};
use crate::geometry::Region;
use crate::objective::Objective;
use crate::rng::RngStream;
use crate::subalgorithms::{Budget, SearchResult, SubAlgorithm, SubAlgorithmConfig};
use crate::Scalar;

/// What a custom entry rule gets to look at.
#[derive(Debug)]
pub struct EntryContext<'a, S: Scalar> {
    pub iteration: usize,
    pub regions: &'a [Region<S>],
    pub results: &'a [SearchResult<S>],
    pub probabilities: &'a [S],
}

pub type EntryFn<S> = Arc<dyn Fn(&EntryContext<'_, S>) -> usize + Send + Sync>;

/// How the surviving child is chosen.
#[derive(Clone, Default)]
pub enum EntryRule<S: Scalar> {
    /// Draw according to the entry probabilities.
    #[default]
    Probabilistic,
    /// Always the child with the lowest best cost; ties go to the lower index.
    Greedy,
    Custom(EntryFn<S>),
}

impl<S: Scalar> fmt::Debug for EntryRule<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryRule::Probabilistic => f.write_str("Probabilistic"),
            EntryRule::Greedy => f.write_str("Greedy"),
            EntryRule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TboConfig<S: Scalar> {
    pub variant: TboVariant<S>,
    /// Outer iterations per run.
    pub depth: usize,
    pub split_window: SplitWindow<S>,
    pub split_point: SplitPointRule,
    /// Particles per region from one iteration to the next.
    pub particle_schedule: Schedule,
    /// Sub-algorithm iterations from one iteration to the next.
    pub subiter_schedule: Schedule,
    /// Share `particles x children` among the children by volume instead of
    /// giving each the same count.
    pub size_proportional_allocation: bool,
    /// Engine and the budget used at the first iteration.
    pub sub: SubAlgorithmConfig<S>,
    pub entry: EntryRule<S>,
    /// Independent runs; the best global best across them is reported.
    pub restarts: usize,
}

impl<S: Scalar> TboConfig<S> {
    pub fn new(variant: TboVariant<S>, depth: usize, sub: SubAlgorithmConfig<S>) -> Self {
        Self {
            variant,
            depth,
            split_window: SplitWindow::default(),
            split_point: SplitPointRule::default(),
            particle_schedule: Schedule::default(),
            subiter_schedule: Schedule::default(),
            size_proportional_allocation: false,
            sub,
            entry: EntryRule::default(),
            restarts: 1,
        }
    }

    pub fn with_entry(mut self, entry: EntryRule<S>) -> Self {
        self.entry = entry;
        self
    }

    pub fn with_split_point(mut self, rule: SplitPointRule) -> Self {
        self.split_point = rule;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::Config("depth must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        self.variant.validate()?;
        self.split_window.validate()?;
        self.particle_schedule.validate("particle")?;
        self.subiter_schedule.validate("sub-iteration")?;
        self.sub.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord<S: Scalar> {
    pub iteration: usize,
    pub parent: Region<S>,
    pub plan: SplitPlan<S>,
    /// Particles given to each child.
    pub particles: Vec<usize>,
    pub sub_iterations: usize,
    pub results: Vec<SearchResult<S>>,
    pub probabilities: Vec<S>,
    pub chosen: usize,
    /// The surviving child.
    pub region: Region<S>,
    pub global_best_cost: S,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TboRun<S: Scalar> {
    pub restart: usize,
    pub records: Vec<IterationRecord<S>>,
    pub global_best: Best<S>,
    pub final_region: Region<S>,
    pub evaluations: u64,
}

impl<S: Scalar> TboRun<S> {
    /// Global best cost after each iteration.
    pub fn trace(&self) -> Vec<S> {
        self.records.iter().map(|r| r.global_best_cost).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TboResult<S: Scalar> {
    pub global_best: Best<S>,
    pub runs: Vec<TboRun<S>>,
    pub evaluations: u64,
}

impl<S: Scalar> TboResult<S> {
    /// Per-iteration best across all runs.
    pub fn trace(&self) -> Vec<S> {
        let mut out: Vec<S> = Vec::new();
        for run in &self.runs {
            for (i, c) in run.trace().into_iter().enumerate() {
                match out.get_mut(i) {
                    Some(v) => *v = v.min(c),
                    None => out.push(c),
                }
            }
        }
        out
    }

    /// Index into `runs` of the run holding the global best.
    pub fn best_run(&self) -> usize {
        self.runs
            .iter()
            .position(|r| r.global_best == self.global_best)
            .unwrap_or(0)
    }

    pub fn iterations(&self) -> usize {
        self.runs.iter().map(|r| r.records.len()).sum()
    }
}

/// Run TBO over the whole domain of `objective`.
///
/// Restart `r` draws from `rng.child("restart-r")`; inside it iteration `i`
/// uses `split-i` for the cut, `region-i-j` for child `j` and `enter-i` for
/// the entry draw. Children and restarts run in parallel; results do not
/// depend on scheduling.
pub fn run_tbo<S: Scalar>(config: &TboConfig<S>, objective: &Objective<S>, rng: &RngStream) -> Result<TboResult<S>> {
    config.validate()?;
    let runs = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_once(config, objective, r, rng.child(format!("restart-{r}"))))
        .collect::<Result<Vec<_>>>()?;
    let mut global: Option<Best<S>> = None;
    for run in &runs {
        global = Some(update_global_best(global, run.global_best.clone()));
    }
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    Ok(TboResult {
        global_best: global.expect("at least one restart"),
        runs,
        evaluations,
    })
}

fn run_once<S: Scalar>(
    config: &TboConfig<S>,
    objective: &Objective<S>,
    restart: usize,
    stream: RngStream,
) -> Result<TboRun<S>> {
    let mut region = objective.domain().clone();
    let mut global: Option<Best<S>> = None;
    let mut records = Vec::with_capacity(config.depth);
    let mut evaluations = 0u64;
    let mut particles = config.sub.n_particles;
    let mut sub_iterations = config.sub.n_iterations;

    for iteration in 0..config.depth {
        if iteration > 0 {
            particles = config.particle_schedule.next(particles);
            sub_iterations = config.subiter_schedule.next(sub_iterations);
        }
        let ctx = BranchingContext {
            iteration,
            volume: region.volume(),
            incumbent: global.as_ref().map(|b| b.cost),
        };
        let mut split_rng = stream.child(format!("split-{iteration}"));
        let plan = plan_split(
            &region,
            &config.variant,
            &ctx,
            config.split_window,
            config.split_point,
            &mut split_rng,
        )?;
        let children = apply_split(&region, &plan)?;
        let allotment = if config.size_proportional_allocation {
            let volumes: Vec<S> = children.iter().map(Region::volume).collect();
            allocate_particles_by_size(particles * children.len(), &volumes)?
        } else {
            vec![particles; children.len()]
        };

        let results = children
            .par_iter()
            .zip(allotment.par_iter())
            .enumerate()
            .map(|(j, (child, &np))| {
                let mut rng = stream.child(format!("region-{iteration}-{j}"));
                let budget = Budget {
                    particles: np,
                    iterations: sub_iterations,
                };
                config.sub.engine.search(objective, child, budget, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        evaluations += results.iter().map(|r| r.evaluations).sum::<u64>();

        // First minimum wins, so ties keep the lower child index.
        let best = results
            .iter()
            .reduce(|a, b| if b.best_cost < a.best_cost { b } else { a })
            .expect("a split has at least two children");
        global = Some(update_global_best(
            global,
            Best {
                point: best.best_point.clone(),
                cost: best.best_cost,
            },
        ));

        let bests: Vec<S> = results.iter().map(|r| r.best_cost).collect();
        let probabilities = entry_probabilities(&bests)?;
        let chosen = match &config.entry {
            EntryRule::Probabilistic => {
                select_region(&probabilities, &mut stream.child(format!("enter-{iteration}")))
            }
            EntryRule::Greedy => bests
                .iter()
                .enumerate()
                .fold(0, |acc, (j, c)| if *c < bests[acc] { j } else { acc }),
            EntryRule::Custom(rule) => {
                let j = rule(&EntryContext {
                    iteration,
                    regions: &children,
                    results: &results,
                    probabilities: &probabilities,
                });
                if j >= children.len() {
                    return Err(Error::Config(format!(
                        "entry rule chose child {j} of {}",
                        children.len()
                    )));
                }
                j
            }
        };

        let parent = std::mem::replace(&mut region, children[chosen].clone());
        records.push(IterationRecord {
            iteration,
            parent,
            plan,
            particles: allotment,
            sub_iterations,
            results,
            probabilities,
            chosen,
            region: region.clone(),
            global_best_cost: global.as_ref().map(|b| b.cost).expect("set above"),
        });
    }

    Ok(TboRun {
        restart,
        records,
        global_best: global.expect("depth is at least one"),
        final_region: region,
        evaluations,
    })
}
