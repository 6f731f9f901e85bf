//! Command-line front end: single experiments and config-driven suites.
//!
//! Exit status is 0 when every criterion passes, 1 when a criterion fails
//! or a computation errors, 2 on usage or configuration errors.

mod config;
mod error;
mod report;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use localtime::chain::Label;

use config::{BoundConfig, DensityConfig, Experiment, GeneratorInput, Method, RateConfig, SuiteConfig};
use error::CliError;
use report::{write_summary, Report};

#[derive(Parser)]
#[command(
    name = "localtime",
    version,
    about = "Local-time densities, bounds and Monte Carlo checks for finite Markov chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Experiment config (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV tables and summary.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    samples: Option<u64>,
}

#[derive(Args, Clone, Default)]
struct PointArgs {
    /// Generator document (TOML or JSON).
    #[arg(long)]
    generator: Option<PathBuf>,
    /// Range states, comma separated.
    #[arg(long = "R", value_delimiter = ',')]
    range: Vec<String>,
    /// Start state.
    #[arg(long)]
    a: Option<String>,
    /// End state.
    #[arg(long)]
    b: Option<String>,
    /// Local times aligned with the range.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    l: Vec<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Joint local-time density at a point.
    Density {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[command(flatten)]
        common: Common,
    },
    /// Pointwise upper bound next to the density.
    Bound {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Rate function of an occupation measure.
    Rate {
        #[arg(long)]
        generator: Option<PathBuf>,
        /// Measure aligned with the generator's states.
        #[arg(long, value_delimiter = ',')]
        mu: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Large-deviation bounds against Monte Carlo and exact moments.
    Ldp(Common),
    /// Simulate paths and write their local times.
    Simulate(Common),
    /// Monte Carlo check of the density on the simplex.
    VerifyDensity(Common),
    /// Inverse-local-time simulation against the Ray-Knight chains.
    VerifyRayknight(Common),
    /// Discrete rescaled variational problem on a lattice box.
    ChiDiscrete(Common),
    /// Run every experiment of a suite config.
    Suite(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn label(s: &str) -> Label {
    s.parse().map(Label::Int).unwrap_or_else(|_| Label::Text(s.to_string()))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::usage(format!("missing --{flag} (or pass --config)")))
}

/// Build a density or bound config from flags, layered over `--config`.
fn point_config(point: PointArgs, common: &Common) -> Result<(DensityConfig, PathBuf), CliError> {
    let (mut c, base) = match &common.config {
        Some(p) => (config::load::<DensityConfig>(p)?, base_dir(p)),
        None => {
            let generator = required(point.generator.clone(), "generator")?;
            let c = DensityConfig {
                generator: GeneratorInput::File(generator),
                range: Vec::new(),
                a: Label::Int(0),
                b: Label::Int(0),
                l: Vec::new(),
                tol: 1e-13,
                method: Method::Series,
            };
            if point.range.is_empty() || point.l.is_empty() {
                return Err(CliError::usage("missing --R or --l (or pass --config)"));
            }
            (c, PathBuf::new())
        }
    };
    if let Some(g) = point.generator {
        c.generator = GeneratorInput::File(g);
    }
    if !point.range.is_empty() {
        c.range = point.range.iter().map(|s| label(s)).collect();
    }
    if !point.l.is_empty() {
        c.l = point.l;
    }
    match (point.a, &common.config) {
        (Some(a), _) => c.a = label(&a),
        (None, None) => return Err(CliError::usage("missing --a (or pass --config)")),
        _ => {}
    }
    match (point.b, &common.config) {
        (Some(b), _) => c.b = label(&b),
        (None, None) => return Err(CliError::usage("missing --b (or pass --config)")),
        _ => {}
    }
    Ok((c, base))
}

fn dispatch(command: Command) -> Result<bool, CliError> {
    let (name, experiment, base, common) = match command {
        Command::Density { point, method, common } => {
            let (mut c, base) = point_config(point, &common)?;
            if let Some(m) = method {
                c.method = m;
            }
            ("density", Experiment::Density(c), base, common)
        }
        Command::Bound { point, common } => {
            let (c, base) = point_config(point, &common)?;
            let c = BoundConfig { generator: c.generator, range: c.range, a: c.a, b: c.b, l: c.l, tol: c.tol };
            ("bound", Experiment::Bound(c), base, common)
        }
        Command::Rate { generator, mu, common } => {
            let (mut c, base) = match &common.config {
                Some(p) => (config::load::<RateConfig>(p)?, base_dir(p)),
                None => {
                    let g = required(generator.clone(), "generator")?;
                    (RateConfig { generator: GeneratorInput::File(g), mu: Vec::new(), tol: 1e-12 }, PathBuf::new())
                }
            };
            if let Some(g) = generator {
                c.generator = GeneratorInput::File(g);
            }
            if !mu.is_empty() {
                c.mu = mu;
            }
            if c.mu.is_empty() {
                return Err(CliError::usage("missing --mu (or pass --config)"));
            }
            ("rate", Experiment::Rate(c), base, common)
        }
        Command::Suite(common) => return suite(&common),
        Command::Ldp(common) => from_config("ldp", common)?,
        Command::Simulate(common) => from_config("simulate", common)?,
        Command::VerifyDensity(common) => from_config("verify-density", common)?,
        Command::VerifyRayknight(common) => from_config("verify-rayknight", common)?,
        Command::ChiDiscrete(common) => from_config("chi-discrete", common)?,
    };
    let mut experiment = experiment;
    experiment.override_with(common.seed, common.samples, common.tol);
    let report = run::run(name, &experiment, &base)?;
    emit(&[report], common.out.as_deref())
}

fn from_config(kind: &'static str, common: Common) -> Result<(&'static str, Experiment, PathBuf, Common), CliError> {
    let path = required(common.config.clone(), "config")?;
    let experiment = config::parse_experiment(kind, &path)?;
    Ok((kind, experiment, base_dir(&path), common))
}

fn suite(common: &Common) -> Result<bool, CliError> {
    let path = required(common.config.clone(), "config")?;
    let suite: SuiteConfig = config::load(&path)?;
    let base = base_dir(&path);
    let mut names = std::collections::HashSet::new();
    for e in &suite.experiments {
        if !names.insert(e.name.as_str()) {
            return Err(CliError::usage(format!("{}: duplicate experiment name '{}'", path.display(), e.name)));
        }
    }
    let mut reports = Vec::with_capacity(suite.experiments.len());
    for (i, named) in suite.experiments.iter().enumerate() {
        let mut experiment = named.experiment.clone();
        // a suite-wide seed gives each experiment its own stream
        experiment.override_with(common.seed.map(|s| s.wrapping_add(i as u64)), common.samples, common.tol);
        let report = run::run(&named.name, &experiment, &base).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("experiment '{}': {m}", named.name)),
            CliError::Runtime(m) => CliError::Runtime(format!("experiment '{}': {m}", named.name)),
        })?;
        reports.push(report);
    }
    emit(&reports, common.out.as_deref())
}

fn emit(reports: &[Report], out: Option<&Path>) -> Result<bool, CliError> {
    let mut stdout = std::io::stdout().lock();
    for r in reports {
        r.print(&mut stdout)?;
    }
    stdout.flush()?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        for r in reports {
            r.write_csv(dir)?;
        }
        write_summary(dir, reports)?;
    }
    Ok(reports.iter().all(|r| r.pass))
}
