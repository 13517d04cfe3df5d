//! Repeated seeded experiments and their statistics.
//!
//! Errors are reported as a percentage of the objective's range over its
//! domain: `100 (found - optimum) / (worst - optimum)`, with the worst cost
//! estimated by a fixed sample scan plus the domain corners.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::Benchmark;
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::RngStream;
use crate::subalgorithms::{run_subalgorithm, SubAlgorithm, SubAlgorithmConfig};
use crate::tbo::{run_tbo, TboConfig};
use crate::Scalar;

pub const DEFAULT_REPETITIONS: usize = 25;
pub const WORST_SCAN_SAMPLES: usize = 1_000_000;
const WORST_SCAN_CHUNK: usize = 10_000;

/// How long a bare sub-algorithm runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BareBudget {
    /// The configured iteration count.
    #[default]
    Iterations,
    /// Enough iterations to spend about this many evaluations.
    Evaluations(u64),
    /// The mean evaluation count of a TBO column it is compared with: the
    /// first one with the same particle count, else the first one. Only
    /// meaningful inside [`compare`].
    MatchTbo,
}

#[derive(Clone, Debug)]
pub enum Method<S: Scalar> {
    Tbo(TboConfig<S>),
    Bare { sub: SubAlgorithmConfig<S>, budget: BareBudget },
}

impl<S: Scalar> Method<S> {
    /// Short name such as `tbo-multibranch+ga` or `ga`.
    pub fn describe(&self) -> String {
        match self {
            Method::Tbo(c) => format!("tbo-{}+{}", c.variant.name(), c.sub.engine.name()),
            Method::Bare { sub, .. } => sub.engine.name().to_string(),
        }
    }

    fn particles(&self) -> usize {
        match self {
            Method::Tbo(c) => c.sub.n_particles,
            Method::Bare { sub, .. } => sub.n_particles,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec<S: Scalar> {
    pub benchmark: Benchmark,
    pub method: Method<S>,
    pub repetitions: usize,
    pub seed: u64,
    /// Column name in comparisons; defaults to the method and particle count.
    pub label: Option<String>,
}

impl<S: Scalar> ExperimentSpec<S> {
    pub fn new(benchmark: Benchmark, method: Method<S>, seed: u64) -> Self {
        Self {
            benchmark,
            method,
            repetitions: DEFAULT_REPETITIONS,
            seed,
            label: None,
        }
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Self {
        self.repetitions = repetitions;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| format!("{}/{}p", self.method.describe(), self.method.particles()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        match &self.method {
            Method::Tbo(c) => c.validate(),
            Method::Bare { sub, .. } => sub.validate(),
        }
    }
}

/// Maps costs of one objective to error percentages.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorNormalizer {
    pub optimum: f64,
    pub worst: f64,
}

impl ErrorNormalizer {
    pub fn new(optimum: f64, worst: f64) -> Result<Self> {
        if !(optimum.is_finite() && worst.is_finite() && worst >= optimum) {
            return Err(Error::Config(format!(
                "invalid normalization range [{optimum}, {worst}]"
            )));
        }
        Ok(Self { optimum, worst })
    }

    /// Optimum from the objective, worst from a deterministic scan.
    pub fn for_objective<S: Scalar>(objective: &Objective<S>) -> Result<Self> {
        let (_, optimum) = objective.known_optimum().ok_or_else(|| {
            Error::Config(format!("{} has no known optimum to measure error against", objective.id()))
        })?;
        let worst = scan_worst_cost(objective, WORST_SCAN_SAMPLES)?;
        Self::new(optimum.as_f64(), worst.max(optimum.as_f64()))
    }

    pub fn error_percent(&self, found: f64) -> f64 {
        let range = self.worst - self.optimum;
        if range <= 0.0 {
            return 0.0;
        }
        (100.0 * (found - self.optimum) / range).clamp(0.0, 100.0)
    }
}

pub fn error_percent<S: Scalar>(found: S, objective: &Objective<S>) -> Result<f64> {
    Ok(ErrorNormalizer::for_objective(objective)?.error_percent(found.as_f64()))
}

/// Largest cost among every domain corner and `samples` uniform points.
/// The sample stream is fixed, so the estimate is reproducible.
pub fn scan_worst_cost<S: Scalar>(objective: &Objective<S>, samples: usize) -> Result<f64> {
    let domain = objective.domain();
    let d = domain.dim();
    let mut worst = f64::NEG_INFINITY;
    if d < 24 {
        for mask in 0u64..(1u64 << d) {
            let corner: Vec<S> = domain
                .bounds()
                .iter()
                .enumerate()
                .map(|(i, b)| if mask >> i & 1 == 1 { b.upper } else { b.lower })
                .collect();
            worst = worst.max(objective.evaluate(&corner)?.as_f64());
        }
    }
    let root = RngStream::new(0).child("worst-scan");
    let chunks = samples.div_ceil(WORST_SCAN_CHUNK);
    let scanned = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = root.child(format!("chunk-{c}"));
            let n = WORST_SCAN_CHUNK.min(samples - c * WORST_SCAN_CHUNK);
            let mut local = f64::NEG_INFINITY;
            for _ in 0..n {
                let p = domain.uniform_in(&mut rng);
                local = local.max(objective.evaluate(&p)?.as_f64());
            }
            Ok(local)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(scanned.into_iter().fold(worst, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub mean_best_cost: f64,
    pub mean_error_pct: f64,
}

/// Surviving region after one TBO iteration of one repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionLogRow {
    pub repetition: usize,
    pub restart: usize,
    pub iteration: usize,
    pub chosen: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub global_best_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    pub benchmark: Benchmark,
    pub method: String,
    pub particles: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub normalizer: ErrorNormalizer,
    pub best_costs: Vec<f64>,
    pub errors: Vec<f64>,
    pub mean_error: f64,
    /// Sample standard deviation; zero for a single repetition.
    pub std_error: f64,
    pub min_error: f64,
    pub max_error: f64,
    pub mean_evaluations: f64,
    /// Averaged best-so-far per iteration. TBO traces start at iteration 1
    /// (after the first split); bare traces at 0 (after initialization).
    pub trace: Vec<TracePoint>,
    pub regions: Vec<RegionLogRow>,
}

impl ExperimentReport {
    pub fn best_error(&self) -> f64 {
        self.min_error
    }
}

struct Repetition {
    best_cost: f64,
    evaluations: u64,
    trace: Vec<f64>,
    regions: Vec<RegionLogRow>,
}

/// Iterations that spend about `evaluations` after initializing `particles`.
pub fn iterations_for_budget<S: Scalar>(sub: &SubAlgorithmConfig<S>, evaluations: u64) -> usize {
    let init = sub.n_particles as u64;
    let per = sub.engine.evaluations_per_iteration(sub.n_particles).max(1);
    (evaluations.saturating_sub(init).div_ceil(per) as usize).max(1)
}

pub fn run_experiment<S: Scalar>(spec: &ExperimentSpec<S>) -> Result<ExperimentReport> {
    let objective = spec.benchmark.objective::<S>()?;
    let normalizer = ErrorNormalizer::for_objective(&objective)?;
    run_with(spec, &objective, normalizer)
}

fn run_with<S: Scalar>(
    spec: &ExperimentSpec<S>,
    objective: &Objective<S>,
    normalizer: ErrorNormalizer,
) -> Result<ExperimentReport> {
    spec.validate()?;
    let bare = match &spec.method {
        Method::Bare { sub, budget } => {
            let mut sub = sub.clone();
            match budget {
                BareBudget::Iterations => {}
                BareBudget::Evaluations(n) => sub.n_iterations = iterations_for_budget(&sub, *n),
                BareBudget::MatchTbo => {
                    return Err(Error::Config(
                        "a matched budget needs a TBO experiment to compare against".into(),
                    ))
                }
            }
            Some(sub)
        }
        Method::Tbo(_) => None,
    };
    let root = RngStream::new(spec.seed);
    let reps = (0..spec.repetitions)
        .into_par_iter()
        .map(|i| {
            let rng = root.child(format!("rep-{i}"));
            match (&spec.method, &bare) {
                (Method::Tbo(config), _) => {
                    let result = run_tbo(config, objective, &rng)?;
                    let regions = result
                        .runs
                        .iter()
                        .flat_map(|run| {
                            run.records.iter().map(move |rec| RegionLogRow {
                                repetition: i,
                                restart: run.restart,
                                iteration: rec.iteration + 1,
                                chosen: rec.chosen,
                                lower: rec.region.bounds().iter().map(|b| b.lower.as_f64()).collect(),
                                upper: rec.region.bounds().iter().map(|b| b.upper.as_f64()).collect(),
                                global_best_cost: rec.global_best_cost.as_f64(),
                            })
                        })
                        .collect();
                    Ok(Repetition {
                        best_cost: result.global_best.cost.as_f64(),
                        evaluations: result.evaluations,
                        trace: result.trace().into_iter().map(S::as_f64).collect(),
                        regions,
                    })
                }
                (Method::Bare { .. }, Some(sub)) => {
                    let result = run_subalgorithm(sub, objective, objective.domain(), &mut rng.clone())?;
                    Ok(Repetition {
                        best_cost: result.best_cost.as_f64(),
                        evaluations: result.evaluations,
                        trace: result.trace.into_iter().map(S::as_f64).collect(),
                        regions: Vec::new(),
                    })
                }
                (Method::Bare { .. }, None) => unreachable!(),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let n = reps.len() as f64;
    let best_costs: Vec<f64> = reps.iter().map(|r| r.best_cost).collect();
    let errors: Vec<f64> = best_costs.iter().map(|&c| normalizer.error_percent(c)).collect();
    let mean_error = errors.iter().sum::<f64>() / n;
    let std_error = if reps.len() > 1 {
        (errors.iter().map(|e| (e - mean_error).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let min_error = errors.iter().copied().fold(f64::INFINITY, f64::min);
    let max_error = errors.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean_evaluations = reps.iter().map(|r| r.evaluations as f64).sum::<f64>() / n;

    // Shorter traces are padded with their final value.
    let len = reps.iter().map(|r| r.trace.len()).max().unwrap_or(0);
    let first = if bare.is_some() { 0 } else { 1 };
    let trace = (0..len)
        .map(|t| {
            let at = |r: &Repetition| r.trace.get(t).or(r.trace.last()).copied().unwrap_or(f64::NAN);
            TracePoint {
                iteration: t + first,
                mean_best_cost: reps.iter().map(at).sum::<f64>() / n,
                mean_error_pct: reps.iter().map(|r| normalizer.error_percent(at(r))).sum::<f64>() / n,
            }
        })
        .collect();

    Ok(ExperimentReport {
        label: spec.label(),
        benchmark: spec.benchmark,
        method: spec.method.describe(),
        particles: spec.method.particles(),
        repetitions: spec.repetitions,
        seed: spec.seed,
        normalizer,
        best_costs,
        errors,
        mean_error,
        std_error,
        min_error,
        max_error,
        mean_evaluations,
        trace,
        regions: reps.into_iter().flat_map(|r| r.regions).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub benchmark: Benchmark,
    pub reports: Vec<ExperimentReport>,
}

impl ComparisonRow {
    pub fn mean_errors(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.mean_error).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub columns: Vec<String>,
    pub rows: Vec<ComparisonRow>,
    /// Per-column mean of the row means; present when more than one
    /// benchmark is compared.
    pub total_average_error: Option<Vec<f64>>,
}

/// Run several methods on one benchmark, side by side.
///
/// Bare columns with [`BareBudget::MatchTbo`] get the mean evaluation count
/// of a TBO column, rounded to the nearest integer.
pub fn compare<S: Scalar>(specs: &[ExperimentSpec<S>]) -> Result<ComparisonRow> {
    let first = specs
        .first()
        .ok_or_else(|| Error::Config("nothing to compare".into()))?;
    if let Some(other) = specs.iter().find(|s| s.benchmark != first.benchmark) {
        return Err(Error::Config(format!(
            "cannot compare {} with {} in one row",
            first.benchmark.label(),
            other.benchmark.label()
        )));
    }
    let objective = first.benchmark.objective::<S>()?;
    let normalizer = ErrorNormalizer::for_objective(&objective)?;

    let mut reports: Vec<Option<ExperimentReport>> = vec![None; specs.len()];
    // (particles, mean evaluations) of each TBO column, in column order.
    let mut tbo_evaluations: Vec<(usize, u64)> = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        if matches!(spec.method, Method::Tbo(_)) {
            let report = run_with(spec, &objective, normalizer)?;
            tbo_evaluations.push((report.particles, report.mean_evaluations.round() as u64));
            reports[i] = Some(report);
        }
    }
    for (i, spec) in specs.iter().enumerate() {
        if let Method::Bare { sub, budget } = &spec.method {
            let report = if *budget == BareBudget::MatchTbo {
                let n = tbo_evaluations
                    .iter()
                    .find(|(p, _)| *p == sub.n_particles)
                    .or(tbo_evaluations.first())
                    .map(|(_, n)| *n)
                    .ok_or_else(|| {
                        Error::Config(format!("{} wants a matched budget but the row has no TBO column", spec.label()))
                    })?;
                let matched = ExperimentSpec {
                    method: Method::Bare {
                        sub: sub.clone(),
                        budget: BareBudget::Evaluations(n),
                    },
                    label: Some(spec.label()),
                    ..spec.clone()
                };
                run_with(&matched, &objective, normalizer)?
            } else {
                run_with(spec, &objective, normalizer)?
            };
            reports[i] = Some(report);
        }
    }
    Ok(ComparisonRow {
        benchmark: first.benchmark,
        reports: reports.into_iter().map(|r| r.expect("every column ran")).collect(),
    })
}

/// One [`compare`] per row. Rows must have the same column labels.
pub fn compare_grid<S: Scalar>(rows: &[Vec<ExperimentSpec<S>>]) -> Result<ComparisonTable> {
    let first = rows
        .first()
        .filter(|r| !r.is_empty())
        .ok_or_else(|| Error::Config("comparison grid is empty".into()))?;
    let columns: Vec<String> = first.iter().map(ExperimentSpec::label).collect();
    for row in rows {
        let labels: Vec<String> = row.iter().map(ExperimentSpec::label).collect();
        if labels != columns {
            return Err(Error::Config(format!(
                "grid rows disagree on columns: {columns:?} vs {labels:?}"
            )));
        }
    }
    let rows = rows.iter().map(|r| compare(r)).collect::<Result<Vec<_>>>()?;
    let total_average_error = (rows.len() > 1).then(|| {
        (0..columns.len())
            .map(|c| rows.iter().map(|r| r.reports[c].mean_error).sum::<f64>() / rows.len() as f64)
            .collect()
    });
    Ok(ComparisonTable {
        columns,
        rows,
        total_average_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::BenchmarkId;
    use crate::tbo::TboVariant;

    fn sphere2() -> Benchmark {
        Benchmark::standard(BenchmarkId::Sphere, 2)
    }

    fn tbo_spec(reps: usize) -> ExperimentSpec<f64> {
        let config = TboConfig::new(TboVariant::MultiBranch, 3, SubAlgorithmConfig::ga(4, 5));
        ExperimentSpec::new(sphere2(), Method::Tbo(config), 11).with_repetitions(reps)
    }

    fn bare_spec(budget: BareBudget) -> ExperimentSpec<f64> {
        let sub = SubAlgorithmConfig::ga(4, 5);
        ExperimentSpec::new(sphere2(), Method::Bare { sub, budget }, 11).with_repetitions(3)
    }

    #[test]
    fn sphere_normalization() {
        let objective = sphere2().objective::<f64>().unwrap();
        let norm = ErrorNormalizer::for_objective(&objective).unwrap();
        // The corner (100, 100) is the worst point.
        assert_eq!(norm.worst, 20000.0);
        assert_eq!(norm.optimum, 0.0);
        assert_eq!(norm.error_percent(200.0), 1.0);
        assert_eq!(norm.error_percent(0.0), 0.0);
        assert_eq!(norm.error_percent(20000.0), 100.0);
        assert_eq!(norm.error_percent(-1.0), 0.0);
    }

    #[test]
    fn missing_optimum() {
        let domain = crate::Region::cube(1, -1.0, 1.0).unwrap();
        let objective = Objective::new("flat", domain, |_: &[f64]| 0.0);
        assert!(matches!(error_percent(0.0, &objective), Err(Error::Config(_))));
    }

    #[test]
    fn single_repetition() {
        let report = run_experiment(&tbo_spec(1)).unwrap();
        assert_eq!(report.mean_error, report.min_error);
        assert_eq!(report.mean_error, report.max_error);
        assert_eq!(report.std_error, 0.0);
        assert_eq!(report.trace.len(), 3);
        assert_eq!(report.regions.len(), 3);
    }

    #[test]
    fn reproducible_and_ordered() {
        let a = run_experiment(&tbo_spec(4)).unwrap();
        let b = run_experiment(&tbo_spec(4)).unwrap();
        assert_eq!(a, b);
        assert!(a.min_error <= a.mean_error && a.mean_error <= a.max_error);
        assert!(a.trace.windows(2).all(|w| w[1].mean_best_cost <= w[0].mean_best_cost));
        assert!(a.errors.iter().all(|e| (0.0..=100.0).contains(e)));
    }

    #[test]
    fn bare_budgets() {
        let plain = run_experiment(&bare_spec(BareBudget::Iterations)).unwrap();
        // 4 at init, then 3 per generation with one elite.
        assert_eq!(plain.mean_evaluations, 4.0 + 5.0 * 3.0);
        assert_eq!(plain.trace.len(), 6);
        assert_eq!(plain.trace[0].iteration, 0);
        let sized = run_experiment(&bare_spec(BareBudget::Evaluations(100))).unwrap();
        assert_eq!(sized.mean_evaluations, 4.0 + 32.0 * 3.0);
        assert!(run_experiment(&bare_spec(BareBudget::MatchTbo)).is_err());
    }

    #[test]
    fn matched_comparison() {
        let row = compare(&[tbo_spec(3), bare_spec(BareBudget::MatchTbo)]).unwrap();
        let tbo = &row.reports[0];
        let bare = &row.reports[1];
        assert!((bare.mean_evaluations - tbo.mean_evaluations).abs() < 3.0);
    }

    #[test]
    fn matching_prefers_equal_particles() {
        let tbo = |np| {
            let config = TboConfig::<f64>::new(TboVariant::MultiBranch, 2, SubAlgorithmConfig::ga(np, 5));
            ExperimentSpec::new(sphere2(), Method::Tbo(config), 11).with_repetitions(2)
        };
        let bare = |np| {
            let sub = SubAlgorithmConfig::ga(np, 5);
            ExperimentSpec::new(sphere2(), Method::Bare { sub, budget: BareBudget::MatchTbo }, 11).with_repetitions(2)
        };
        let row = compare(&[tbo(3), tbo(6), bare(3), bare(6)]).unwrap();
        for (t, b) in [(0, 2), (1, 3)] {
            let gap = (row.reports[t].mean_evaluations - row.reports[b].mean_evaluations).abs();
            assert!(gap < row.reports[b].particles as f64, "{gap}");
        }
    }

    #[test]
    fn reflexive_comparison() {
        let row = compare(&[tbo_spec(2), tbo_spec(2)]).unwrap();
        assert_eq!(row.reports[0], row.reports[1]);
    }

    #[test]
    fn mismatched_rows_rejected() {
        let mut other = tbo_spec(1);
        other.benchmark = Benchmark::standard(BenchmarkId::Griewank, 2);
        assert!(compare(&[tbo_spec(1), other]).is_err());
        assert!(compare_grid::<f64>(&[]).is_err());
        assert!(compare_grid::<f64>(&[vec![]]).is_err());
    }

    #[test]
    fn grid_totals() {
        let row = |id| {
            let b = Benchmark::standard(id, 2);
            vec![
                ExperimentSpec { benchmark: b, ..tbo_spec(2) },
                ExperimentSpec { benchmark: b, ..bare_spec(BareBudget::Iterations) },
            ]
        };
        let table = compare_grid(&[row(BenchmarkId::Sphere), row(BenchmarkId::Griewank)]).unwrap();
        assert_eq!(table.columns.len(), 2);
        let totals = table.total_average_error.unwrap();
        for (c, &total) in totals.iter().enumerate() {
            let mean = (table.rows[0].reports[c].mean_error + table.rows[1].reports[c].mean_error) / 2.0;
            assert_eq!(total, mean);
        }
        let single = compare_grid(&[vec![tbo_spec(1)]]).unwrap();
        assert!(single.total_average_error.is_none());
        assert_eq!(single.rows[0].reports.len(), 1);
    }
}
