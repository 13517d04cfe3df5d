#![allow(dead_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use tbo::subalgorithms::{Budget, Engine, EngineKind, SearchResult, SubAlgorithm, SubAlgorithmConfig};
use tbo::tbo::{
    apply_split, entry_probabilities, run_tbo, BranchingSchedule, EntryRule, Orientation, Schedule,
    SplitPointRule, SplitWindow, TboConfig, TboResult, TboVariant,
};
use tbo::{Benchmark, BenchmarkId, Objective, Point, Region, RngStream};

/// A randomly drawn TBO setup.
#[derive(Clone, Debug)]
pub struct Case {
    pub benchmark: BenchmarkId,
    pub dim: usize,
    pub variant: u8,
    pub p: f64,
    pub engine: EngineKind,
    pub particles: usize,
    pub iterations: usize,
    pub depth: usize,
    pub window: (f64, f64),
    pub size_proportional: bool,
    pub particle_step: usize,
    pub subiter_step: usize,
    pub restarts: usize,
    pub seed: u64,
}

pub fn arb_case() -> impl Strategy<Value = Case> {
    let engine = prop_oneof![Just(EngineKind::Ls), Just(EngineKind::Pso), Just(EngineKind::Ga)];
    let benchmark = prop_oneof![
        Just(BenchmarkId::Sphere),
        Just(BenchmarkId::Griewank),
        Just(BenchmarkId::Schaffer),
        Just(BenchmarkId::Schwefel)
    ];
    (
        (benchmark, 1usize..4, 0u8..4, 0.05..0.95f64, engine),
        (1usize..6, 1usize..6, 1usize..7),
        (0.05..0.45f64, 0.55..0.95f64, any::<bool>(), 0usize..3, 0usize..3, 1usize..3, any::<u64>()),
    )
        .prop_map(|((benchmark, dim, variant, p, engine), (particles, iterations, depth), rest)| {
            let (lo, hi, size_proportional, particle_step, subiter_step, restarts, seed) = rest;
            let dim = if benchmark == BenchmarkId::Schaffer { dim.max(2) } else { dim };
            // The 4-3-2 schedule needs two axes for its first split.
            let variant = if variant == 3 && dim < 2 { 2 } else { variant };
            Case {
                benchmark,
                dim,
                variant,
                p,
                engine,
                particles,
                iterations,
                depth,
                window: (lo, hi),
                size_proportional,
                particle_step,
                subiter_step,
                restarts,
                seed,
            }
        })
}

pub fn build(case: &Case) -> (TboConfig<f64>, Objective<f64>) {
    let variant = match case.variant {
        0 => TboVariant::Binary(Orientation::Alternate),
        1 => TboVariant::Binary(Orientation::Random(case.p)),
        2 => TboVariant::MultiBranch,
        _ => TboVariant::Adaptive(BranchingSchedule::four_three_two()),
    };
    let sub = SubAlgorithmConfig::of_kind(case.engine, case.particles, case.iterations);
    let mut config = TboConfig::new(variant, case.depth, sub).with_restarts(case.restarts);
    config.split_window = SplitWindow::new(case.window.0, case.window.1).unwrap();
    config.size_proportional_allocation = case.size_proportional;
    config.particle_schedule = Schedule::new(case.particle_step, 1);
    config.subiter_schedule = Schedule::new(case.subiter_step, 1);
    let objective = Benchmark::standard(case.benchmark, case.dim).objective().unwrap();
    (config, objective)
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub fn check_trace(result: &SearchResult<f64>) -> Result<(), TestCaseError> {
    if result.trace.windows(2).any(|w| w[1] > w[0]) {
        return Err(fail(format!("trace increases: {:?}", result.trace)));
    }
    if result.trace.last() != Some(&result.best_cost) {
        return Err(fail("trace does not end at the best cost".into()));
    }
    Ok(())
}

/// Nesting, partition, window, probability and global-best invariants for
/// every recorded iteration.
pub fn check_invariants(
    config: &TboConfig<f64>,
    objective: &Objective<f64>,
    result: &TboResult<f64>,
) -> Result<(), TestCaseError> {
    let domain = objective.domain();
    let mut evaluations = 0;
    for run in &result.runs {
        if run.records.len() != config.depth {
            return Err(fail(format!("{} records for depth {}", run.records.len(), config.depth)));
        }
        let mut expected_parent = domain.clone();
        let mut best_so_far = f64::INFINITY;
        let mut previous_gb = f64::INFINITY;
        for rec in &run.records {
            // Nesting.
            if rec.parent != expected_parent {
                return Err(fail(format!("iteration {} does not start from the previous survivor", rec.iteration)));
            }
            if !domain.contains_region(&rec.region) || !rec.parent.contains_region(&rec.region) {
                return Err(fail(format!("iteration {} escapes its parent", rec.iteration)));
            }
            if !(rec.region.volume() < rec.parent.volume()) {
                return Err(fail(format!("iteration {} does not shrink", rec.iteration)));
            }
            // Partition.
            let children = apply_split(&rec.parent, &rec.plan).map_err(|e| fail(e.to_string()))?;
            let total: f64 = children.iter().map(Region::volume).sum();
            if !rel_close(total, rec.parent.volume(), 1e-9) {
                return Err(fail(format!("children volume {total} vs parent {}", rec.parent.volume())));
            }
            if children[rec.chosen] != rec.region {
                return Err(fail("survivor is not the chosen child".into()));
            }
            // Window.
            for cut in &rec.plan.cuts {
                let side = rec.parent.interval(cut.dim).unwrap();
                if cut.points.len() == 1 {
                    let (l1, l2) = config.split_window.bounds(side);
                    let sp = cut.points[0];
                    if !(l1 <= sp && sp <= l2 && side.lower < sp && sp < side.upper) {
                        return Err(fail(format!("cut {sp} outside [{l1}, {l2}]")));
                    }
                } else {
                    for (sp, (w1, w2)) in cut.points.iter().zip(&cut.windows) {
                        if !(w1 <= sp && sp <= w2 && side.lower < *w1 && *w2 < side.upper) {
                            return Err(fail(format!("cut {sp} outside [{w1}, {w2}]")));
                        }
                    }
                    if cut.windows.windows(2).any(|w| w[0].1 >= w[1].0) {
                        return Err(fail("multi-way windows overlap".into()));
                    }
                }
            }
            // Probabilities.
            let bests: Vec<f64> = rec.results.iter().map(|r| r.best_cost).collect();
            let recomputed = entry_probabilities(&bests).map_err(|e| fail(e.to_string()))?;
            if recomputed != rec.probabilities {
                return Err(fail("recorded probabilities differ from the formula".into()));
            }
            check_probabilities(&bests, &rec.probabilities)?;
            // Sub-algorithm traces and global best.
            for r in &rec.results {
                check_trace(r)?;
                evaluations += r.evaluations;
                if !rec.parent.contains(&r.best_point) {
                    return Err(fail("best point outside the searched region".into()));
                }
                best_so_far = best_so_far.min(r.best_cost);
            }
            if rec.global_best_cost != best_so_far {
                return Err(fail(format!("global best {} vs minimum seen {best_so_far}", rec.global_best_cost)));
            }
            if rec.global_best_cost > previous_gb {
                return Err(fail("global best increased".into()));
            }
            previous_gb = rec.global_best_cost;
            expected_parent = rec.region.clone();
        }
        if run.final_region != expected_parent || run.global_best.cost != previous_gb {
            return Err(fail("run summary disagrees with its records".into()));
        }
    }
    if result.evaluations != evaluations {
        return Err(fail(format!("{} evaluations reported, {evaluations} recorded", result.evaluations)));
    }
    let best = result.runs.iter().map(|r| r.global_best.cost).fold(f64::INFINITY, f64::min);
    if result.global_best.cost != best {
        return Err(fail("overall best is not the best run".into()));
    }
    Ok(())
}

/// Range, binary sum and ordering of entry probabilities.
pub fn check_probabilities(bests: &[f64], probs: &[f64]) -> Result<(), TestCaseError> {
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(fail(format!("probability outside [0, 1]: {probs:?}")));
    }
    if probs.len() == 2 && probs[0] + probs[1] != 1.0 {
        return Err(fail(format!("binary probabilities {probs:?} do not sum to 1")));
    }
    let lowest = bests.iter().copied().fold(f64::INFINITY, f64::min);
    let argmins: Vec<usize> = (0..bests.len()).filter(|&i| bests[i] == lowest).collect();
    if argmins.len() == 1 {
        let i = argmins[0];
        let scale: f64 = bests.iter().map(|b| b.abs()).sum::<f64>() + 1.0;
        for j in (0..bests.len()).filter(|&j| j != i) {
            // Differences below the rounding of the normalizing sum cannot
            // be told apart.
            let resolvable = bests[j] - lowest > 1e-12 * scale;
            if probs[i] < probs[j] || (resolvable && probs[i] <= probs[j]) {
                return Err(fail(format!("lowest cost {bests:?} is not the most likely: {probs:?}")));
            }
        }
    }
    Ok(())
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    )
}

/// Every run invariant plus bitwise determinism, over `cases` random setups.
pub fn tbo_property_suite(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&arb_case(), |case| {
            let (config, objective) = build(&case);
            let rng = RngStream::new(case.seed);
            let first = run_tbo(&config, &objective, &rng).map_err(|e| fail(e.to_string()))?;
            check_invariants(&config, &objective, &first)?;
            let second = run_tbo(&config, &objective, &rng).map_err(|e| fail(e.to_string()))?;
            if first != second {
                return Err(fail("same seed gave different results".into()));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Probability invariants on each formula branch separately.
pub fn probability_suite(cases: u32) -> Result<(), String> {
    // Costs on a 1/16 grid keep distinct costs distinguishable.
    let grid = |lo: i32, hi: i32| (lo..hi).prop_map(|v| v as f64 / 16.0);
    let branches = [(1, 16_000), (-16_000, 0), (-16_000, 16_000)];
    for (lo, hi) in branches {
        runner(cases)
            .run(&proptest::collection::vec(grid(lo, hi), 2..10), |bests| {
                if lo < 0 && hi > 0 && !(bests.iter().any(|b| *b < 0.0) && bests.iter().any(|b| *b >= 0.0)) {
                    return Ok(());
                }
                let probs = entry_probabilities(&bests).map_err(|e| fail(e.to_string()))?;
                check_probabilities(&bests, &probs)
            })
            .map_err(|e| format!("costs in [{lo}, {hi}]/16: {e}"))?;
    }
    runner(cases)
        .run(&(-1e9..1e9f64, -1e9..1e9f64), |(a, b)| {
            let probs = entry_probabilities(&[a, b]).map_err(|e| fail(e.to_string()))?;
            check_probabilities(&[a, b], &probs)
        })
        .map_err(|e| e.to_string())
}

/// Elitist traces and determinism of the bare engines.
pub fn engine_suite(cases: u32) -> Result<(), String> {
    let engine = prop_oneof![Just(EngineKind::Ls), Just(EngineKind::Pso), Just(EngineKind::Ga)];
    runner(cases)
        .run(&(engine, 1usize..8, 1usize..12, 2usize..4, any::<u64>()), |(kind, np, si, dim, seed)| {
            let objective = Benchmark::standard(BenchmarkId::Schwefel, dim).objective::<f64>().unwrap();
            let config = SubAlgorithmConfig::of_kind(kind, np, si);
            let run = |seed| {
                tbo::run_subalgorithm(&config, &objective, objective.domain(), &mut RngStream::new(seed))
                    .map_err(|e| fail(e.to_string()))
            };
            let a = run(seed)?;
            check_trace(&a)?;
            if a.trace.len() != si + 1 {
                return Err(fail(format!("trace length {} for {si} iterations", a.trace.len())));
            }
            if a != run(seed)? {
                return Err(fail("engine is not deterministic".into()));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Exhaustive scan of the grid nodes inside a one-dimensional region.
pub struct GridScan;

impl SubAlgorithm<f64> for GridScan {
    fn name(&self) -> &str {
        "grid-scan"
    }

    fn search(
        &self,
        objective: &Objective<f64>,
        region: &Region<f64>,
        _budget: Budget,
        _rng: &mut RngStream,
    ) -> tbo::Result<SearchResult<f64>> {
        let step = objective.grid_step().expect("grid objective");
        let origin = objective.domain().bounds()[0].lower;
        let side = region.bounds()[0];
        let first = ((side.lower - origin) / step - 1e-9).ceil() as i64;
        let last = ((side.upper - origin) / step + 1e-9).floor() as i64;
        let mut nodes: Vec<f64> = (first..=last)
            .map(|n| origin + n as f64 * step)
            .filter(|x| side.contains(*x))
            .collect();
        if nodes.is_empty() {
            nodes.push(side.midpoint());
        }
        let mut best = (Point(vec![nodes[0]]), f64::INFINITY);
        for x in &nodes {
            let cost = objective.evaluate(&[*x])?;
            if cost < best.1 {
                best = (objective.quantize(&[*x]), cost);
            }
        }
        Ok(SearchResult {
            best_point: best.0,
            best_cost: best.1,
            evaluations: nodes.len() as u64,
            trace: vec![best.1],
        })
    }
}

/// Cost and location of the best node of a one-dimensional grid objective.
pub fn brute_force_1d(objective: &Objective<f64>) -> (f64, f64) {
    let step = objective.grid_step().unwrap();
    let side = objective.domain().bounds()[0];
    let count = ((side.upper - side.lower) / step).round() as i64;
    (0..=count)
        .map(|n| {
            let x = side.lower + n as f64 * step;
            (objective.evaluate(&[x]).unwrap(), objective.quantize(&[x])[0])
        })
        .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a })
}

/// TBO with greedy entry and an exhaustive grid sub-search on 1D Sphere.
pub fn oracle_run(depth: usize, seed: u64) -> (TboResult<f64>, (f64, f64)) {
    let objective = Benchmark::standard(BenchmarkId::Sphere, 1).objective::<f64>().unwrap();
    let sub = SubAlgorithmConfig::new(Engine::Custom(Arc::new(GridScan)), 1, 1);
    let config = TboConfig::new(TboVariant::Binary(Orientation::Alternate), depth, sub).with_entry(EntryRule::Greedy);
    let result = run_tbo(&config, &objective, &RngStream::new(seed)).unwrap();
    (result, brute_force_1d(&objective))
}

/// Runs with midpoint cuts that always keep the child holding the optimum.
/// Returns a description of the first violation.
pub fn forced_midpoint_check(variant: TboVariant<f64>, benchmark: BenchmarkId, dim: usize, depth: usize) -> Result<(), String> {
    let objective = Benchmark::standard(benchmark, dim).objective::<f64>().unwrap();
    let (optimum, _) = objective.known_optimum().unwrap().clone();
    let target = optimum.clone();
    let entry = EntryRule::Custom(Arc::new(move |ctx: &tbo::tbo::EntryContext<'_, f64>| {
        ctx.regions.iter().position(|r| r.contains(&target)).expect("some child holds the optimum")
    }));
    let config = TboConfig::new(variant, depth, SubAlgorithmConfig::ga(2, 1))
        .with_entry(entry)
        .with_split_point(SplitPointRule::Midpoint);
    let result = run_tbo(&config, &objective, &RngStream::new(depth as u64)).map_err(|e| e.to_string())?;
    let run = &result.runs[0];
    let mut cuts_total = 0i32;
    for rec in &run.records {
        let cuts = rec.plan.cuts.len() as i32;
        cuts_total += cuts;
        let expected = rec.parent.volume() * 2f64.powi(-cuts);
        if rec.region.volume() != expected {
            return Err(format!(
                "iteration {}: volume {} instead of {expected}",
                rec.iteration,
                rec.region.volume()
            ));
        }
    }
    let expected = objective.domain().volume() * 2f64.powi(-cuts_total);
    if run.final_region.volume() != expected {
        return Err(format!("final volume {} instead of {expected}", run.final_region.volume()));
    }
    if !run.final_region.contains(&optimum) {
        return Err("final region lost the optimum".into());
    }
    Ok(())
}

/// Exact pick rates of the restarting cascade for probabilities `probs`.
pub fn cascade_pick_rates(probs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).unwrap().then(a.cmp(&b)));
    let mut rates = vec![0.0; probs.len()];
    let mut reach = 1.0;
    for &i in &order {
        rates[i] = reach * probs[i];
        reach *= 1.0 - probs[i];
    }
    // One full rejection restarts the walk, so rates are conditional on a pass accepting.
    let accept = 1.0 - reach;
    rates.iter().map(|r| r / accept).collect()
}
