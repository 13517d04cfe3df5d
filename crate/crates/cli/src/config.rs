//! Configuration documents for `run` and `compare`.
//!
//! Every key is optional. Values are layered: built-in defaults, then the
//! config file, then command-line flags.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use tbo::harness::{BareBudget, ExperimentSpec, Method};
use tbo::subalgorithms::{Engine, GaParams, LocalSearchParams, PsoParams, SubAlgorithmConfig, DEFAULT_SUB_ITERATIONS};
use tbo::tbo::{BranchingSchedule, Orientation, Schedule, SplitPointRule, SplitWindow, TboConfig, TboVariant};
use tbo::{Benchmark, BenchmarkId, Scalar};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkName {
    Sphere,
    Griewank,
    Schaffer,
    Schwefel,
}

impl From<BenchmarkName> for BenchmarkId {
    fn from(b: BenchmarkName) -> Self {
        match b {
            BenchmarkName::Sphere => BenchmarkId::Sphere,
            BenchmarkName::Griewank => BenchmarkId::Griewank,
            BenchmarkName::Schaffer => BenchmarkId::Schaffer,
            BenchmarkName::Schwefel => BenchmarkId::Schwefel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Tbo,
    Bare,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantName {
    Binary,
    Multibranch,
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OrientationName {
    Alternate,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EngineName {
    Ls,
    Pso,
    Ga,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum SplitPointName {
    Uniform,
    Midpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum BudgetName {
    /// Run the configured number of iterations.
    Iterations,
    /// Run until about `evaluations` objective evaluations are spent.
    Evaluations,
    /// Spend as many evaluations as the TBO column with the same particle
    /// count (compare only).
    Match,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

/// The objective: a benchmark, its dimension and optionally a custom domain.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSection {
    pub benchmark: BenchmarkName,
    pub dim: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub step: Option<f64>,
    pub grid: bool,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            benchmark: BenchmarkName::Sphere,
            dim: 2,
            lower: None,
            upper: None,
            step: None,
            grid: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct TboSection {
    pub variant: VariantName,
    /// Axis choice for binary trees.
    pub orientation: OrientationName,
    /// Probability of cutting axis 0 under random orientation.
    pub p: f64,
    pub depth: usize,
    /// Fractions of a side between which cut points are drawn.
    pub window: [f64; 2],
    pub split_point: SplitPointName,
    /// Particles removed per iteration.
    pub particle_step: usize,
    pub particle_floor: usize,
    /// Sub-algorithm iterations removed per iteration.
    pub subiter_step: usize,
    pub subiter_floor: usize,
    /// Share particles among children in proportion to their volume.
    pub size_proportional: bool,
    pub restarts: usize,
    /// Adaptive trees: branching factor of the first iterations.
    pub branching: Vec<usize>,
    /// Adaptive trees: branching factor afterwards.
    pub branching_then: usize,
}

impl Default for TboSection {
    fn default() -> Self {
        Self {
            variant: VariantName::Multibranch,
            orientation: OrientationName::Alternate,
            p: 0.5,
            depth: 10,
            window: [0.3, 0.7],
            split_point: SplitPointName::Uniform,
            particle_step: 0,
            particle_floor: 1,
            subiter_step: 0,
            subiter_floor: 1,
            size_proportional: false,
            restarts: 1,
            branching: vec![4, 3],
            branching_then: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct LsSection {
    pub radius: f64,
    pub restart_after: usize,
}

impl Default for LsSection {
    fn default() -> Self {
        let p = LocalSearchParams::<f64>::default();
        Self {
            radius: p.radius,
            restart_after: p.restart_after,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct PsoSection {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub max_velocity: f64,
}

impl Default for PsoSection {
    fn default() -> Self {
        let p = PsoParams::<f64>::default();
        Self {
            inertia: p.inertia,
            cognitive: p.cognitive,
            social: p.social,
            max_velocity: p.max_velocity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct GaSection {
    pub crossover_rate: f64,
    pub blend_extension: f64,
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
    pub elites: usize,
}

impl Default for GaSection {
    fn default() -> Self {
        let p = GaParams::<f64>::default();
        Self {
            crossover_rate: p.crossover_rate,
            blend_extension: p.blend_extension,
            mutation_rate: p.mutation_rate,
            mutation_sigma: p.mutation_sigma,
            elites: p.elites,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct SubSection {
    pub algorithm: EngineName,
    pub particles: usize,
    pub iterations: usize,
    /// Bare runs only. Defaults to `iterations` for `run` and `match` for
    /// `compare`.
    pub budget: Option<BudgetName>,
    /// Evaluation budget when `budget = "evaluations"`.
    pub evaluations: Option<u64>,
    pub ls: LsSection,
    pub pso: PsoSection,
    pub ga: GaSection,
}

impl Default for SubSection {
    fn default() -> Self {
        Self {
            algorithm: EngineName::Ga,
            particles: 10,
            iterations: DEFAULT_SUB_ITERATIONS,
            budget: None,
            evaluations: None,
            ls: LsSection::default(),
            pso: PsoSection::default(),
            ga: GaSection::default(),
        }
    }
}

/// Configuration of `tbo run`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub benchmark: BenchmarkName,
    pub dim: usize,
    /// Lower bound of every coordinate; defaults to the benchmark's range.
    pub lower: Option<f64>,
    /// Upper bound of every coordinate; defaults to the benchmark's range.
    pub upper: Option<f64>,
    /// Grid step; defaults to the benchmark's step.
    pub step: Option<f64>,
    /// Set to false to evaluate without snapping to the grid.
    pub grid: bool,
    pub method: MethodName,
    pub repetitions: usize,
    pub seed: u64,
    pub precision: Precision,
    pub tbo: TboSection,
    pub sub: SubSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let problem = ProblemSection::default();
        Self {
            benchmark: problem.benchmark,
            dim: problem.dim,
            lower: None,
            upper: None,
            step: None,
            grid: true,
            method: MethodName::Tbo,
            repetitions: 25,
            seed: 0,
            precision: Precision::F64,
            tbo: TboSection::default(),
            sub: SubSection::default(),
        }
    }
}

/// One method of a comparison grid; expanded once per particle count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnConfig {
    /// Column label; the particle count is appended.
    pub name: Option<String>,
    pub method: MethodName,
    pub tbo: TboSection,
    pub sub: SubSection,
}

impl Default for ColumnConfig {
    fn default() -> Self {
        Self {
            name: None,
            method: MethodName::Tbo,
            tbo: TboSection::default(),
            sub: SubSection::default(),
        }
    }
}

/// Configuration of `tbo compare`: benchmarks are rows, columns are
/// methods crossed with particle counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub benchmarks: Vec<BenchmarkName>,
    pub dim: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub step: Option<f64>,
    pub grid: bool,
    pub particles: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub precision: Precision,
    #[serde(rename = "column")]
    pub columns: Vec<ColumnConfig>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            benchmarks: Vec::new(),
            dim: 2,
            lower: None,
            upper: None,
            step: None,
            grid: true,
            particles: vec![10],
            repetitions: 25,
            seed: 0,
            precision: Precision::F64,
            columns: Vec::new(),
        }
    }
}

/// Overlay `top` onto `base`, recursing into tables.
pub fn merge_tables(base: &mut toml::Table, top: toml::Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge_tables(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Parse a config file into a table, checking it against `T` so that
/// unknown keys and type errors are reported with their line.
pub fn parse_file<T: serde::de::DeserializeOwned>(path: &str, source: &str) -> Result<toml::Table, CliError> {
    toml::from_str::<T>(source).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    toml::from_str::<toml::Table>(source).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

/// 1-based line where the dotted `key` is assigned in `source`. Keys are
/// matched within their table, including array-of-table entries such as
/// `[[column]]` followed by `[column.sub]`; failing that, the first line
/// assigning the last component is used.
pub fn line_of(source: &str, key: &str) -> Option<usize> {
    let (table, leaf) = key.rsplit_once('.').unwrap_or(("", key));
    let assigns = |line: &str, name: &str| {
        line.strip_prefix(name)
            .map(|rest| rest.trim_start().starts_with('='))
            .unwrap_or(false)
    };
    let mut header = String::new();
    let mut fallback = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[') {
            header = h.trim_matches(|c| c == '[' || c == ']' || c == ' ').to_string();
            continue;
        }
        let in_table = header == table || header.ends_with(&format!(".{table}")) || table.is_empty() && header.is_empty();
        if in_table && assigns(line, leaf) || header.is_empty() && !table.is_empty() && assigns(line, key) {
            return Some(i + 1);
        }
        if fallback.is_none() && assigns(line, leaf) {
            fallback = Some(i + 1);
        }
    }
    fallback
}

/// A semantic error about `key`, located in the file if it is set there.
pub struct Located<'a> {
    pub path: Option<&'a str>,
    pub source: Option<&'a str>,
}

impl Located<'_> {
    pub fn error(&self, key: &str, message: impl std::fmt::Display) -> CliError {
        match (self.path, self.source.and_then(|s| line_of(s, key))) {
            (Some(path), Some(line)) => CliError::Config(format!("{path}:{line}: `{key}`: {message}")),
            (Some(path), None) => CliError::Config(format!("{path}: `{key}`: {message}")),
            _ => CliError::Config(format!("`{key}`: {message}")),
        }
    }
}

pub fn benchmark(
    problem: &ProblemSection,
    at: &Located<'_>,
) -> Result<Benchmark, CliError> {
    let id = BenchmarkId::from(problem.benchmark);
    if problem.dim < id.min_dim() {
        return Err(at.error("dim", format!("{} needs at least {} dimensions", id, id.min_dim())));
    }
    let mut b = Benchmark::standard(id, problem.dim);
    let lower = problem.lower.unwrap_or(b.lower);
    let upper = problem.upper.unwrap_or(b.upper);
    if !(lower.is_finite() && upper.is_finite() && lower < upper) {
        return Err(at.error("lower", format!("domain [{lower}, {upper}] is empty")));
    }
    b = b.with_range(lower, upper);
    let step = if problem.grid { problem.step.or(b.step) } else { None };
    if let Some(s) = step {
        if !(s > 0.0 && s.is_finite()) {
            return Err(at.error("step", format!("grid step must be positive, got {s}")));
        }
    }
    Ok(b.with_step(step))
}

fn engine<S: Scalar>(sub: &SubSection) -> Engine<S> {
    match sub.algorithm {
        EngineName::Ls => Engine::LocalSearch(LocalSearchParams {
            radius: S::of(sub.ls.radius),
            restart_after: sub.ls.restart_after,
        }),
        EngineName::Pso => Engine::Pso(PsoParams {
            inertia: S::of(sub.pso.inertia),
            cognitive: S::of(sub.pso.cognitive),
            social: S::of(sub.pso.social),
            max_velocity: S::of(sub.pso.max_velocity),
        }),
        EngineName::Ga => Engine::Ga(GaParams {
            crossover_rate: S::of(sub.ga.crossover_rate),
            blend_extension: S::of(sub.ga.blend_extension),
            mutation_rate: S::of(sub.ga.mutation_rate),
            mutation_sigma: S::of(sub.ga.mutation_sigma),
            elites: sub.ga.elites,
        }),
    }
}

fn sub_config<S: Scalar>(sub: &SubSection, at: &Located<'_>) -> Result<SubAlgorithmConfig<S>, CliError> {
    if sub.particles == 0 {
        return Err(at.error("sub.particles", "must be at least 1"));
    }
    if sub.iterations == 0 {
        return Err(at.error("sub.iterations", "must be at least 1"));
    }
    let config = SubAlgorithmConfig::new(engine(sub), sub.particles, sub.iterations);
    config.validate().map_err(|e| at.error("sub", e))?;
    Ok(config)
}

fn tbo_config<S: Scalar>(t: &TboSection, sub: SubAlgorithmConfig<S>, at: &Located<'_>) -> Result<TboConfig<S>, CliError> {
    if t.depth == 0 {
        return Err(at.error("tbo.depth", "must be at least 1"));
    }
    if t.restarts == 0 {
        return Err(at.error("tbo.restarts", "must be at least 1"));
    }
    let variant = match t.variant {
        VariantName::Binary => TboVariant::Binary(match t.orientation {
            OrientationName::Alternate => Orientation::Alternate,
            OrientationName::Random => {
                if !(t.p > 0.0 && t.p < 1.0) {
                    return Err(at.error("tbo.p", format!("must lie in (0, 1), got {}", t.p)));
                }
                Orientation::Random(t.p)
            }
        }),
        VariantName::Multibranch => TboVariant::MultiBranch,
        VariantName::Adaptive => {
            if let Some(bad) = t.branching.iter().chain([&t.branching_then]).find(|&&a| a < 2) {
                return Err(at.error("tbo.branching", format!("branching factors must be at least 2, got {bad}")));
            }
            TboVariant::Adaptive(BranchingSchedule::steps(t.branching.clone(), t.branching_then))
        }
    };
    let window = SplitWindow::new(S::of(t.window[0]), S::of(t.window[1])).map_err(|e| at.error("tbo.window", e))?;
    if t.particle_floor == 0 || t.subiter_floor == 0 {
        return Err(at.error("tbo.particle_floor", "schedule floors must be at least 1"));
    }
    let mut config = TboConfig::new(variant, t.depth, sub).with_restarts(t.restarts);
    config.split_window = window;
    config.split_point = match t.split_point {
        SplitPointName::Uniform => SplitPointRule::Uniform,
        SplitPointName::Midpoint => SplitPointRule::Midpoint,
    };
    config.particle_schedule = Schedule::new(t.particle_step, t.particle_floor);
    config.subiter_schedule = Schedule::new(t.subiter_step, t.subiter_floor);
    config.size_proportional_allocation = t.size_proportional;
    config.validate().map_err(|e| at.error("tbo", e))?;
    Ok(config)
}

fn method<S: Scalar>(
    method: MethodName,
    tbo: &TboSection,
    sub: &SubSection,
    allow_match: bool,
    at: &Located<'_>,
) -> Result<Method<S>, CliError> {
    let sub_cfg = sub_config(sub, at)?;
    Ok(match method {
        MethodName::Tbo => Method::Tbo(tbo_config(tbo, sub_cfg, at)?),
        MethodName::Bare => {
            let default = if allow_match { BudgetName::Match } else { BudgetName::Iterations };
            let budget = match sub.budget.unwrap_or(default) {
                BudgetName::Iterations => BareBudget::Iterations,
                BudgetName::Evaluations => BareBudget::Evaluations(
                    sub.evaluations
                        .ok_or_else(|| at.error("sub.budget", "`evaluations` budget needs `sub.evaluations`"))?,
                ),
                BudgetName::Match if allow_match => BareBudget::MatchTbo,
                BudgetName::Match => {
                    return Err(at.error("sub.budget", "a matched budget needs a TBO column; use `tbo compare`"))
                }
            };
            Method::Bare { sub: sub_cfg, budget }
        }
    })
}

impl RunConfig {
    pub fn spec<S: Scalar>(&self, at: &Located<'_>) -> Result<ExperimentSpec<S>, CliError> {
        if self.repetitions == 0 {
            return Err(at.error("repetitions", "must be at least 1"));
        }
        let problem = ProblemSection {
            benchmark: self.benchmark,
            dim: self.dim,
            lower: self.lower,
            upper: self.upper,
            step: self.step,
            grid: self.grid,
        };
        let benchmark = benchmark(&problem, at)?;
        let method = method(self.method, &self.tbo, &self.sub, false, at)?;
        Ok(ExperimentSpec::new(benchmark, method, self.seed).with_repetitions(self.repetitions))
    }
}

impl CompareConfig {
    /// Rows of the grid, one per benchmark.
    pub fn grid<S: Scalar>(&self, at: &Located<'_>) -> Result<Vec<Vec<ExperimentSpec<S>>>, CliError> {
        if self.benchmarks.is_empty() {
            return Err(at.error("benchmarks", "the grid has no benchmarks"));
        }
        if self.columns.is_empty() {
            return Err(at.error("column", "the grid has no columns"));
        }
        if self.particles.is_empty() {
            return Err(at.error("particles", "the grid has no particle counts"));
        }
        if self.repetitions == 0 {
            return Err(at.error("repetitions", "must be at least 1"));
        }
        self.benchmarks
            .iter()
            .map(|&name| {
                let problem = ProblemSection {
                    benchmark: name,
                    dim: self.dim,
                    lower: self.lower,
                    upper: self.upper,
                    step: self.step,
                    grid: self.grid,
                };
                let benchmark = benchmark(&problem, at)?;
                let mut row = Vec::new();
                for &particles in &self.particles {
                    for column in &self.columns {
                        let sub = SubSection {
                            particles,
                            ..column.sub.clone()
                        };
                        let method = method::<S>(column.method, &column.tbo, &sub, true, at)?;
                        let name = column.name.clone().unwrap_or_else(|| method.describe());
                        row.push(
                            ExperimentSpec::new(benchmark, method, self.seed)
                                .with_repetitions(self.repetitions)
                                .with_label(format!("{name}/{particles}p")),
                        );
                    }
                }
                Ok(row)
            })
            .collect()
    }
}
