//! Command-line front-end.
//!
//! Settings are layered: defaults, then the `--config` file, then the
//! thread count from the environment, then explicit flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Command, DimSpec, InputFormat, KList, OutputFormat, RunConfig, Space};
use crate::error::Result;
use crate::exec::threads_from_env;
use crate::queries::QuerySelection;

#[derive(Debug, Parser)]
#[command(name = "tardis", version, about = "Local intrinsic dimension and Euclidicity of point clouds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    /// Suppress progress reports on standard error.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Persistent intrinsic dimension profile of each query point.
    Pid(AnalysisArgs),
    /// Euclidicity score of each query point.
    Euclidicity(AnalysisArgs),
    /// Model-vs-model distances: the score a perfectly Euclidean point would get.
    Baseline(AnalysisArgs),
    /// Sample a synthetic space with tagged singular points.
    Generate(GenerateArgs),
    /// Bottleneck distance between two diagram files.
    Bottleneck(BottleneckArgs),
    /// Vietoris-Rips persistence diagram of a whole cloud.
    Diagram(DiagramArgs),
    /// Repeat a run from a configuration or metadata file.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Configuration file (key = value lines); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Point cloud: CSV, or raw little-endian f64 (`.f64`, `.bin`).
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub input_format: Option<InputFormat>,
    /// Skip one header row of CSV input.
    #[arg(long)]
    pub header: bool,
    /// Dimension of raw input.
    #[arg(long)]
    pub raw_dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// Labels file with singular tags (default: `<input stem>.labels.csv`).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Neighbour count, or a comma separated list for the PID sweep.
    #[arg(long)]
    pub k: Option<KList>,
    /// Grid steps per radius axis.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Intrinsic dimension: an integer, `pid`, or `file:<path>`.
    #[arg(long)]
    pub dim: Option<DimSpec>,
    #[arg(long)]
    pub max_search_dim: Option<usize>,
    /// Keep short-lived intervals when estimating dimensions.
    #[arg(long)]
    pub no_threshold: bool,
    /// Euclidean model samples per grid cell.
    #[arg(long)]
    pub samples: Option<usize>,
    /// `all`, an id list, or `random:N`, optionally followed by `,+singular`.
    #[arg(long)]
    pub queries: Option<QuerySelection>,
    /// Score every point on one global cell instead of its own grid.
    #[arg(long)]
    pub single_scale: bool,
    #[arg(long, requires = "outer")]
    pub inner: Option<f64>,
    #[arg(long, requires = "inner")]
    pub outer: Option<f64>,
    /// Divide scores by the largest one.
    #[arg(long)]
    pub normalize: bool,
    /// Also write per-cell distances in long format.
    #[arg(long)]
    pub per_pair: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub space: Option<Space>,
    /// Sphere or disc dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Ambient dimension of the flat disc.
    #[arg(long)]
    pub ambient: Option<usize>,
    /// Flat disc radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Pinched torus major radius.
    #[arg(long)]
    pub major: Option<f64>,
    /// Pinched torus tube radius.
    #[arg(long)]
    pub minor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BottleneckArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    /// Compare a single homology degree.
    #[arg(long)]
    pub degree: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// Highest homology degree.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Largest filtration value.
    #[arg(long)]
    pub cap: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

fn base(config: Option<&PathBuf>, command: Command) -> Result<RunConfig> {
    let mut cfg = match config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.command = Some(command);
    if let Some(t) = threads_from_env() {
        cfg.threads = Some(t);
    }
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

impl CommonArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set_opt(&mut cfg.output, self.output);
        set(&mut cfg.seed, self.seed);
        set_opt(&mut cfg.threads, self.threads);
    }
}

impl InputArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set_opt(&mut cfg.input, self.input);
        set(&mut cfg.input_format, self.input_format);
        cfg.header |= self.header;
        set_opt(&mut cfg.raw_dim, self.raw_dim);
    }
}

impl AnalysisArgs {
    fn into_config(self, command: Command) -> Result<RunConfig> {
        let mut cfg = base(self.common.config.as_ref(), command)?;
        self.common.apply(&mut cfg);
        self.input.apply(&mut cfg);
        set_opt(&mut cfg.labels, self.labels);
        set(&mut cfg.k, self.k);
        set(&mut cfg.steps, self.steps);
        set_opt(&mut cfg.dim, self.dim);
        set(&mut cfg.max_search_dim, self.max_search_dim);
        cfg.threshold &= !self.no_threshold;
        set(&mut cfg.samples, self.samples);
        set(&mut cfg.queries, self.queries);
        cfg.single_scale |= self.single_scale;
        set_opt(&mut cfg.inner, self.inner);
        set_opt(&mut cfg.outer, self.outer);
        cfg.normalize |= self.normalize;
        set_opt(&mut cfg.per_pair, self.per_pair);
        set(&mut cfg.output_format, self.format);
        Ok(cfg)
    }
}

impl Sub {
    /// The run configuration this invocation describes.
    pub fn into_config(self) -> Result<RunConfig> {
        match self {
            Sub::Pid(a) => a.into_config(Command::Pid),
            Sub::Euclidicity(a) => a.into_config(Command::Euclidicity),
            Sub::Baseline(a) => a.into_config(Command::Baseline),
            Sub::Generate(g) => {
                let mut cfg = base(g.common.config.as_ref(), Command::Generate)?;
                g.common.apply(&mut cfg);
                set(&mut cfg.space, g.space);
                set_opt(&mut cfg.dim, g.dim.map(DimSpec::Fixed));
                set(&mut cfg.count, g.count);
                set_opt(&mut cfg.ambient, g.ambient);
                set(&mut cfg.radius, g.radius);
                set(&mut cfg.major, g.major);
                set(&mut cfg.minor, g.minor);
                Ok(cfg)
            }
            Sub::Bottleneck(b) => Ok(RunConfig {
                command: Some(Command::Bottleneck),
                input: Some(b.first),
                other: Some(b.second),
                degree: b.degree,
                ..RunConfig::default()
            }),
            Sub::Diagram(d) => {
                let mut cfg = base(d.common.config.as_ref(), Command::Diagram)?;
                d.common.apply(&mut cfg);
                d.input.apply(&mut cfg);
                set_opt(&mut cfg.degree, d.degree);
                set_opt(&mut cfg.cap, d.cap);
                Ok(cfg)
            }
            Sub::Run(r) => {
                let mut cfg = RunConfig::load(&r.config)?;
                cfg.command()?;
                if let Some(t) = threads_from_env() {
                    cfg.threads = Some(t);
                }
                set_opt(&mut cfg.output, r.output);
                set_opt(&mut cfg.threads, r.threads);
                Ok(cfg)
            }
        }
    }
}
