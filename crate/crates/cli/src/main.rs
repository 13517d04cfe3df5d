mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tbo::harness::{compare_grid, run_experiment, ExperimentReport};
use tbo::tbo::{required_depth, TreeKind};

use config::{
    merge_tables, parse_file, BenchmarkName, CompareConfig, EngineName, Located, MethodName, OrientationName,
    Precision, RunConfig, VariantName,
};
use error::CliError;

#[derive(Parser)]
#[command(name = "tbo", version, about = "Tree-based search-space partitioning around population optimizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method on one benchmark for several repetitions.
    Run(RunArgs),
    /// Run a grid of benchmarks, methods and particle counts.
    Compare(CompareArgs),
    /// Print the tree depth needed to shrink the domain to a fraction eps.
    Depth(DepthArgs),
    /// Print the JSON schema of a configuration file.
    Schema {
        #[arg(value_enum, default_value = "run")]
        document: Document,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Document {
    Run,
    Compare,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    benchmark: Option<BenchmarkName>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodName>,
    #[arg(long, value_enum)]
    variant: Option<VariantName>,
    /// Axis choice for binary trees.
    #[arg(long, value_enum)]
    orientation: Option<OrientationName>,
    /// Probability of cutting axis 0 under random orientation.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum)]
    sub: Option<EngineName>,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    sub_iterations: Option<usize>,
    /// Evaluation budget for bare runs.
    #[arg(long)]
    evaluations: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    precision: Option<Precision>,
    /// Output directory; defaults to $TBO_OUTPUT_DIR, then ./tbo-output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CompareArgs {
    /// TOML description of the grid.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    precision: Option<Precision>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct DepthArgs {
    #[arg(long, value_enum, default_value = "multibranch")]
    variant: DepthVariant,
    #[arg(long)]
    dim: usize,
    /// Target fraction of each side, in (0, 0.5). Accepts `2^-9` style powers.
    #[arg(long, value_parser = parse_fraction)]
    epsilon: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum DepthVariant {
    Binary,
    Multibranch,
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let value = match s.split_once('^') {
        Some((base, exp)) => {
            let base: f64 = base.trim().parse().map_err(|e| format!("bad base `{base}`: {e}"))?;
            let exp: f64 = exp.trim().parse().map_err(|e| format!("bad exponent `{exp}`: {e}"))?;
            base.powf(exp)
        }
        None => s.trim().parse().map_err(|e| format!("bad number `{s}`: {e}"))?,
    };
    Ok(value)
}

/// A TOML table holding only the values given on the command line.
#[derive(Default)]
struct Overrides(toml::Table);

impl Overrides {
    fn set(&mut self, key: &str, value: Option<impl Into<toml::Value>>) {
        let Some(value) = value else { return };
        let mut table = &mut self.0;
        let mut parts = key.split('.').peekable();
        while let Some(part) = parts.next() {
            if parts.peek().is_none() {
                table.insert(part.to_string(), value.into());
                return;
            }
            table = table
                .entry(part)
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .expect("override paths are tables");
        }
    }

    fn set_name<T: serde::Serialize>(&mut self, key: &str, value: Option<T>) {
        self.set(key, value.map(|v| toml::Value::try_from(v).expect("names serialize to strings")));
    }

    fn set_count(&mut self, key: &str, value: Option<impl TryInto<i64>>, flag: &str) -> Result<(), CliError> {
        if let Some(v) = value {
            let v = v
                .try_into()
                .map_err(|_| CliError::Config(format!("--{flag} is too large")))?;
            self.set(key, Some(v));
        }
        Ok(())
    }
}

struct Loaded {
    path: Option<String>,
    source: Option<String>,
    table: toml::Table,
}

impl Loaded {
    fn read<T: serde::de::DeserializeOwned>(path: Option<&PathBuf>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self {
                path: None,
                source: None,
                table: toml::Table::new(),
            });
        };
        let name = path.display().to_string();
        let source = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        let table = parse_file::<T>(&name, &source)?;
        Ok(Self {
            path: Some(name),
            source: Some(source),
            table,
        })
    }

    fn located(&self) -> Located<'_> {
        Located {
            path: self.path.as_deref(),
            source: self.source.as_deref(),
        }
    }

    fn resolve<T: serde::de::DeserializeOwned>(&self, overrides: Overrides) -> Result<T, CliError> {
        let mut table = self.table.clone();
        merge_tables(&mut table, overrides.0);
        T::deserialize(toml::Value::Table(table)).map_err(|e| CliError::Config(format!("invalid option: {e}")))
    }
}

fn run_overrides(a: &RunArgs) -> Result<Overrides, CliError> {
    let mut o = Overrides::default();
    o.set_name("benchmark", a.benchmark);
    o.set_count("dim", a.dim, "dim")?;
    o.set_name("method", a.method);
    o.set_name("tbo.variant", a.variant);
    o.set_name("tbo.orientation", a.orientation);
    o.set("tbo.p", a.p);
    o.set_count("tbo.depth", a.depth, "depth")?;
    o.set_count("tbo.restarts", a.restarts, "restarts")?;
    o.set_name("sub.algorithm", a.sub);
    o.set_count("sub.particles", a.particles, "particles")?;
    o.set_count("sub.iterations", a.sub_iterations, "sub-iterations")?;
    if a.evaluations.is_some() {
        o.set("sub.budget", Some("evaluations"));
        o.set_count("sub.evaluations", a.evaluations, "evaluations")?;
    }
    o.set_count("repetitions", a.repetitions, "repetitions")?;
    o.set_count("seed", a.seed, "seed")?;
    o.set_name("precision", a.precision);
    Ok(o)
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let file = Loaded::read::<RunConfig>(args.config.as_ref())?;
    let config: RunConfig = file.resolve(run_overrides(&args)?)?;
    let at = file.located();
    let report: ExperimentReport = match config.precision {
        Precision::F64 => run_experiment(&config.spec::<f64>(&at)?)?,
        Precision::F32 => run_experiment(&config.spec::<f32>(&at)?)?,
    };
    let dir = output::output_dir(args.out);
    let written = output::write_run(&dir, &config, &report)?;
    println!(
        "{}: mean error {:.4}% (sd {:.4}, best {:.4}%, worst {:.4}%) over {} repetitions, {:.0} evaluations each",
        report.label,
        report.mean_error,
        report.std_error,
        report.min_error,
        report.max_error,
        report.repetitions,
        report.mean_evaluations
    );
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), CliError> {
    let file = Loaded::read::<CompareConfig>(Some(&args.config))?;
    let mut o = Overrides::default();
    o.set_count("repetitions", args.repetitions, "repetitions")?;
    o.set_count("seed", args.seed, "seed")?;
    o.set_name("precision", args.precision);
    let config: CompareConfig = file.resolve(o)?;
    let at = file.located();
    let table = match config.precision {
        Precision::F64 => compare_grid(&config.grid::<f64>(&at)?)?,
        Precision::F32 => compare_grid(&config.grid::<f32>(&at)?)?,
    };
    let dir = output::output_dir(args.out);
    let written = output::write_comparison(&dir, &config, &table)?;
    print!("{}", output::render_table(&table));
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn depth(args: DepthArgs) -> Result<(), CliError> {
    let kind = match args.variant {
        DepthVariant::Binary => TreeKind::Binary,
        DepthVariant::Multibranch => TreeKind::MultiBranch,
    };
    let d = required_depth(kind, args.dim, args.epsilon)?;
    println!("k = {}", d.exact);
    println!("depth = {}", d.depth);
    Ok(())
}

fn schema(document: Document) -> Result<(), CliError> {
    let schema = match document {
        Document::Run => schemars::schema_for!(RunConfig),
        Document::Compare => schemars::schema_for!(CompareConfig),
    };
    let text = serde_json::to_string_pretty(&schema)?;
    match writeln!(std::io::stdout(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => compare(a),
        Command::Depth(a) => depth(a),
        Command::Schema { document } => schema(document),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
