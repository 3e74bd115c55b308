//! Run configuration.
//!
//! A configuration file is a flat list of `key = value` lines (TOML). Every
//! run writes the configuration it used to `<output>.meta` in the same form,
//! together with the crate version and RNG identifier, so `tardis run
//! <output>.meta` repeats it.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tardis_core::datasets::{DEFAULT_TORUS_MAJOR, DEFAULT_TORUS_MINOR};
use tardis_core::euclidicity::{DEFAULT_K, DEFAULT_STEPS};
use tardis_core::pid::DEFAULT_MAX_SEARCH_DIM;
use tardis_core::sampler::RNG_ALGORITHM;

use crate::error::{CliError, Result};
use crate::queries::QuerySelection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Pid,
    Euclidicity,
    Baseline,
    Generate,
    Bottleneck,
    Diagram,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pid => "pid",
            Self::Euclidicity => "euclidicity",
            Self::Baseline => "baseline",
            Self::Generate => "generate",
            Self::Bottleneck => "bottleneck",
            Self::Diagram => "diagram",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// `.f64` and `.bin` files are raw, everything else CSV.
    #[default]
    Auto,
    Csv,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Space {
    PinchedTorus,
    #[default]
    WedgedSpheres,
    CircleWedgeSphere,
    FlatDisc,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Self::PinchedTorus => "pinched-torus",
            Self::WedgedSpheres => "wedged-spheres",
            Self::CircleWedgeSphere => "circle-wedge-sphere",
            Self::FlatDisc => "flat-disc",
        }
    }
}

/// Neighbourhood sizes; the PID sweep uses all of them, Euclidicity the
/// first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct KList(pub Vec<usize>);

impl Default for KList {
    fn default() -> Self {
        Self(vec![DEFAULT_K])
    }
}

impl FromStr for KList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let ks = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad neighbour count {p:?}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self(ks))
    }
}

impl TryFrom<String> for KList {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<KList> for String {
    fn from(k: KList) -> String {
        k.to_string()
    }
}

impl fmt::Display for KList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Where intrinsic dimensions come from: a fixed value, the rounded PID of
/// each point, or a file with one integer per cloud point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DimSpec {
    Fixed(usize),
    Pid,
    File(PathBuf),
}

impl FromStr for DimSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "pid" {
            return Ok(Self::Pid);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(Self::File(path.into()));
        }
        match s.parse() {
            Ok(0) | Err(_) => Err(format!("expected a positive integer, `pid` or `file:<path>`, got {s:?}")),
            Ok(n) => Ok(Self::Fixed(n)),
        }
    }
}

impl TryFrom<String> for DimSpec {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<DimSpec> for String {
    fn from(d: DimSpec) -> String {
        match d {
            DimSpec::Fixed(n) => n.to_string(),
            DimSpec::Pid => "pid".into(),
            DimSpec::File(p) => format!("file:{}", p.display()),
        }
    }
}

impl Serialize for QuerySelection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for QuerySelection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub input: Option<PathBuf>,
    /// Second diagram file of `bottleneck`.
    pub other: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub input_format: InputFormat,
    pub header: bool,
    /// Dimension of raw `f64` input.
    pub raw_dim: Option<usize>,
    /// Labels file; defaults to `<input stem>.labels.csv` when that exists.
    pub labels: Option<PathBuf>,
    pub k: KList,
    pub steps: usize,
    /// Intrinsic dimension for scoring; sphere or disc dimension for
    /// `generate`.
    pub dim: Option<DimSpec>,
    pub max_search_dim: usize,
    pub threshold: bool,
    pub samples: usize,
    pub seed: u64,
    pub queries: QuerySelection,
    pub single_scale: bool,
    pub inner: Option<f64>,
    pub outer: Option<f64>,
    pub normalize: bool,
    /// Long-format per-cell output of `euclidicity`.
    pub per_pair: Option<PathBuf>,
    pub output_format: OutputFormat,
    /// Worker count; not recorded since results do not depend on it.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    pub space: Space,
    pub count: usize,
    pub ambient: Option<usize>,
    pub radius: f64,
    pub major: f64,
    pub minor: f64,
    /// Homology degree for `bottleneck`; all shared degrees when unset.
    pub degree: Option<usize>,
    /// Filtration cap for `diagram`.
    pub cap: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            input: None,
            other: None,
            output: None,
            input_format: InputFormat::Auto,
            header: false,
            raw_dim: None,
            labels: None,
            k: KList::default(),
            steps: DEFAULT_STEPS,
            dim: None,
            max_search_dim: DEFAULT_MAX_SEARCH_DIM,
            threshold: true,
            samples: 1,
            seed: 0,
            queries: QuerySelection::default(),
            single_scale: false,
            inner: None,
            outer: None,
            normalize: false,
            per_pair: None,
            output_format: OutputFormat::Csv,
            threads: None,
            space: Space::WedgedSpheres,
            count: 2000,
            ambient: None,
            radius: 1.0,
            major: DEFAULT_TORUS_MAJOR,
            minor: DEFAULT_TORUS_MINOR,
            degree: None,
            cap: None,
        }
    }
}

/// Keys written to metadata records in addition to the configuration.
const VERSION_KEY: &str = "version";
const RNG_KEY: &str = "rng";

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        table.remove(VERSION_KEY);
        if let Some(rng) = table.remove(RNG_KEY) {
            if rng.as_str() != Some(RNG_ALGORITHM) {
                return Err(format!("recorded RNG {rng} differs from this build's {RNG_ALGORITHM:?}"));
            }
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| e.message().to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|m| CliError::config("config", format!("{}: {m}", path.display())))
    }

    /// Metadata record: the configuration plus version and RNG identifiers.
    pub fn to_metadata(&self) -> String {
        let mut table = match toml::Value::try_from(self).expect("configuration serializes") {
            toml::Value::Table(t) => t,
            _ => unreachable!("structs serialize to tables"),
        };
        table.insert(VERSION_KEY.into(), env!("CARGO_PKG_VERSION").into());
        table.insert(RNG_KEY.into(), RNG_ALGORITHM.into());
        toml::to_string(&table).expect("table serializes")
    }

    pub fn command(&self) -> Result<Command> {
        self.command.ok_or_else(|| CliError::config("command", "no command given"))
    }

    pub fn input(&self) -> Result<&Path> {
        self.input.as_deref().ok_or_else(|| CliError::config("input", "no input file given"))
    }

    /// First neighbour count.
    pub fn k(&self) -> usize {
        self.k.0[0]
    }

    /// Checks the fields the given command reads.
    pub fn validate(&self) -> Result<()> {
        let command = self.command()?;
        if self.k.0.is_empty() || self.k.0.iter().any(|&k| k < 3) {
            return Err(CliError::config("k", "neighbour counts must be at least 3"));
        }
        if self.steps < 2 {
            return Err(CliError::config("steps", "need at least 2 steps per axis"));
        }
        if self.max_search_dim == 0 {
            return Err(CliError::config("max_search_dim", "must be at least 1"));
        }
        let min_samples = if command == Command::Baseline { 2 } else { 1 };
        if self.samples < min_samples {
            return Err(CliError::config("samples", format!("must be at least {min_samples}")));
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        if self.input_format == InputFormat::Raw && self.raw_dim.is_none() {
            return Err(CliError::config("raw_dim", "raw input needs its dimension"));
        }
        match (self.inner, self.outer) {
            (Some(_), None) | (None, Some(_)) => {
                return Err(CliError::config("inner", "inner and outer radii must be given together"))
            }
            (Some(r), Some(s)) if !(r >= 0.0 && s > r && s.is_finite()) => {
                return Err(CliError::config("outer", format!("need 0 <= inner < outer, got {r} and {s}")))
            }
            _ => {}
        }
        if command == Command::Generate {
            if self.count < 2 {
                return Err(CliError::config("count", "must be at least 2"));
            }
            if matches!(self.dim, Some(DimSpec::Pid | DimSpec::File(_))) {
                return Err(CliError::config("dim", "generate needs a numeric dimension"));
            }
        } else if command == Command::Bottleneck && self.other.is_none() {
            return Err(CliError::config("other", "bottleneck needs two diagram files"));
        }
        if command != Command::Generate {
            self.input()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_round_trip() {
        let cfg = RunConfig {
            command: Some(Command::Euclidicity),
            input: Some("cloud.csv".into()),
            output: Some("scores.csv".into()),
            k: "25,50".parse().unwrap(),
            dim: Some(DimSpec::Fixed(2)),
            queries: "random:50,+singular".parse().unwrap(),
            inner: Some(0.1),
            outer: Some(0.25),
            threads: Some(8),
            seed: 7,
            ..RunConfig::default()
        };
        let meta = cfg.to_metadata();
        assert!(meta.contains("queries = \"random:50,+singular\""));
        assert!(meta.contains(RNG_ALGORITHM));
        assert!(!meta.contains("threads"));
        let back = RunConfig::from_toml(&meta).unwrap();
        assert_eq!(back, RunConfig { threads: None, ..cfg });
    }

    #[test]
    fn unknown_keys_and_bad_values_name_the_field() {
        assert!(RunConfig::from_toml("kk = 3").unwrap_err().contains("kk"));
        assert!(RunConfig::from_toml("dim = \"zero\"").unwrap_err().contains("zero"));
        let cfg = RunConfig::from_toml("command = \"pid\"\ninput = \"a.csv\"\nk = \"2\"").unwrap();
        match cfg.validate() {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "k"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dim_spec_forms() {
        assert_eq!("pid".parse::<DimSpec>().unwrap(), DimSpec::Pid);
        assert_eq!("3".parse::<DimSpec>().unwrap(), DimSpec::Fixed(3));
        assert_eq!("file:d.csv".parse::<DimSpec>().unwrap(), DimSpec::File("d.csv".into()));
        assert!("0".parse::<DimSpec>().is_err());
    }

    #[test]
    fn foreign_rng_is_rejected() {
        assert!(RunConfig::from_toml("rng = \"mt19937\"").is_err());
    }
}
