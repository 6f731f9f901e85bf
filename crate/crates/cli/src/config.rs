use std::fmt;
use std::path::{Path, PathBuf};

use localtime::chain::Label;
use localtime::{Generator, GeneratorSpec};
use serde::de::{self, DeserializeOwned, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::CliError;

/// A generator given inline or as a path to a separate document. Relative
/// paths resolve against the directory of the file that names them.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GeneratorInput {
    File(PathBuf),
    Inline(GeneratorSpec),
}

impl<'de> Deserialize<'de> for GeneratorInput {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = GeneratorInput;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a generator file path or a table with `states` and `rates`")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<Self::Value, E> {
                Ok(GeneratorInput::File(PathBuf::from(s)))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<Self::Value, A::Error> {
                GeneratorSpec::deserialize(de::value::MapAccessDeserializer::new(map)).map(GeneratorInput::Inline)
            }
        }
        d.deserialize_any(V)
    }
}

impl GeneratorInput {
    pub fn build(&self, base: &Path) -> Result<Generator, CliError> {
        match self {
            GeneratorInput::Inline(spec) => spec.build().map_err(|e| CliError::usage(format!("generator: {e}"))),
            GeneratorInput::File(p) => {
                let path = base.join(p);
                let spec: GeneratorSpec = load(&path)?;
                spec.build().map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
            }
        }
    }
}

/// Parse a JSON or TOML document, chosen by extension (TOML otherwise).
/// Errors carry the path and the parser's line and column.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    parse(&text, path)
}

pub fn parse<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, CliError> {
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if json {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(text).map_err(|e| CliError::usage(format!("{}: {}", path.display(), e.to_string().trim_end())))
    }
}

pub fn resolve(g: &Generator, field: &str, label: &Label) -> Result<usize, CliError> {
    g.index_of(&label.to_string()).map_err(|_| CliError::usage(format!("{field}: unknown state label '{label}'")))
}

pub fn resolve_all(g: &Generator, field: &str, labels: &[Label]) -> Result<Vec<usize>, CliError> {
    labels.iter().enumerate().map(|(i, l)| resolve(g, &format!("{field}[{i}]"), l)).collect()
}

fn default_tol() -> f64 {
    1e-13
}

fn default_seed() -> u64 {
    0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Series,
    Quadrature,
    Tridiagonal,
    /// Every applicable method, checked against each other.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub generator: GeneratorInput,
    pub range: Vec<Label>,
    pub a: Label,
    pub b: Label,
    pub l: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub generator: GeneratorInput,
    pub range: Vec<Label>,
    pub a: Label,
    pub b: Label,
    pub l: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    pub generator: GeneratorInput,
    /// Probability vector aligned with the generator's states.
    pub mu: Vec<f64>,
    #[serde(default = "default_rate_tol")]
    pub tol: f64,
}

fn default_rate_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfSpace {
    /// Aligned with `subset`.
    pub coefficients: Vec<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdpConfig {
    pub generator: GeneratorInput,
    pub subset: Vec<Label>,
    pub start: Label,
    pub horizons: Vec<f64>,
    #[serde(default)]
    pub halfspace: Option<HalfSpace>,
    /// Linear functional aligned with `subset`.
    #[serde(default)]
    pub potential: Option<Vec<f64>>,
    #[serde(default = "default_ldp_samples")]
    pub samples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_ldp_samples() -> u64 {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub generator: GeneratorInput,
    pub start: Label,
    /// Fixed horizon; exclusive with `pivot` and `level`.
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub pivot: Option<Label>,
    #[serde(default)]
    pub level: Option<f64>,
    #[serde(default = "default_simulate_samples")]
    pub samples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub max_jumps: Option<u64>,
}

fn default_simulate_samples() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyDensityConfig {
    pub generator: GeneratorInput,
    pub range: Vec<Label>,
    pub start: Label,
    pub end: Label,
    pub horizon: f64,
    #[serde(default = "default_mc_samples")]
    pub samples: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_mc_tol")]
    pub tol: f64,
    /// Required chi-square p-value.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_mc_samples() -> u64 {
    1_000_000
}

fn default_bins() -> usize {
    7
}

fn default_mc_tol() -> f64 {
    1e-12
}

fn default_alpha() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyRayKnightConfig {
    pub pivot: i64,
    pub level: f64,
    #[serde(default = "default_rk_samples")]
    pub samples: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub max_jumps: Option<u64>,
}

fn default_rk_samples() -> u64 {
    200_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiConfig {
    pub radius: usize,
    pub dim: usize,
    pub alpha: f64,
    /// Weight of a point potential at the origin; ignored if `potential`
    /// is given.
    #[serde(default)]
    pub delta: f64,
    /// Full linear potential over the box sites in lexicographic order.
    #[serde(default)]
    pub potential: Option<Vec<f64>>,
    #[serde(default = "default_chi_tol")]
    pub tol: f64,
}

fn default_chi_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Density(DensityConfig),
    Bound(BoundConfig),
    Rate(RateConfig),
    Ldp(LdpConfig),
    Simulate(SimulateConfig),
    VerifyDensity(VerifyDensityConfig),
    VerifyRayknight(VerifyRayKnightConfig),
    ChiDiscrete(ChiConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedExperiment {
    pub name: String,
    #[serde(flatten)]
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(rename = "experiment")]
    pub experiments: Vec<NamedExperiment>,
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Density(_) => "density",
            Experiment::Bound(_) => "bound",
            Experiment::Rate(_) => "rate",
            Experiment::Ldp(_) => "ldp",
            Experiment::Simulate(_) => "simulate",
            Experiment::VerifyDensity(_) => "verify-density",
            Experiment::VerifyRayknight(_) => "verify-rayknight",
            Experiment::ChiDiscrete(_) => "chi-discrete",
        }
    }

    /// Apply `--seed`, `--samples` and `--tol` where the experiment has
    /// such a field.
    pub fn override_with(&mut self, seed: Option<u64>, samples: Option<u64>, tol: Option<f64>) {
        match self {
            Experiment::Density(c) => set(&mut c.tol, tol),
            Experiment::Bound(c) => set(&mut c.tol, tol),
            Experiment::Rate(c) => set(&mut c.tol, tol),
            Experiment::Ldp(c) => {
                set(&mut c.seed, seed);
                set(&mut c.samples, samples);
            }
            Experiment::Simulate(c) => {
                set(&mut c.seed, seed);
                set(&mut c.samples, samples);
            }
            Experiment::VerifyDensity(c) => {
                set(&mut c.seed, seed);
                set(&mut c.samples, samples);
                set(&mut c.tol, tol);
            }
            Experiment::VerifyRayknight(c) => {
                set(&mut c.seed, seed);
                set(&mut c.samples, samples);
            }
            Experiment::ChiDiscrete(c) => set(&mut c.tol, tol),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Experiment::Ldp(c) => Some(c.seed),
            Experiment::Simulate(c) => Some(c.seed),
            Experiment::VerifyDensity(c) => Some(c.seed),
            Experiment::VerifyRayknight(c) => Some(c.seed),
            _ => None,
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Parse a single-experiment document of the given kind.
pub fn parse_experiment(kind: &str, path: &Path) -> Result<Experiment, CliError> {
    Ok(match kind {
        "density" => Experiment::Density(load(path)?),
        "bound" => Experiment::Bound(load(path)?),
        "rate" => Experiment::Rate(load(path)?),
        "ldp" => Experiment::Ldp(load(path)?),
        "simulate" => Experiment::Simulate(load(path)?),
        "verify-density" => Experiment::VerifyDensity(load(path)?),
        "verify-rayknight" => Experiment::VerifyRayknight(load(path)?),
        "chi-discrete" => Experiment::ChiDiscrete(load(path)?),
        other => return Err(CliError::usage(format!("unknown experiment kind '{other}'"))),
    })
}
