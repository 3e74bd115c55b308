//! Command execution on a validated [`RunConfig`].

use std::path::{Path, PathBuf};

use tardis_core::datasets::{gen_circle_wedge_sphere, gen_flat_disc, gen_pinched_torus, gen_wedged_spheres};
use tardis_core::euclidicity::{
    baseline_mean, baseline_pairwise, default_single_scale, euclidicity_batch, grid_from_neighbourhood,
    normalize_by_max, single_scale_batch, DimensionSource, EuclidicityConfig,
};
use tardis_core::exec::Executor;
use tardis_core::matching::bottleneck_distance;
use tardis_core::persistence::rips_persistence;
use tardis_core::pid::{pid_batch, pid_with_neighbourhood, PidConfig};
use tardis_core::pointcloud::Neighbourhood;
use tardis_core::{DistanceMatrix, PersistenceDiagram, PointCloud};

use crate::config::{Command, DimSpec, InputFormat, OutputFormat, RunConfig, Space};
use crate::diagram::{read_diagrams, write_diagrams};
use crate::error::{CliError, Result};
use crate::exec::{Progress, ThreadPoolExecutor};
use crate::io::{labels_path, read_cloud, read_labels, write_cloud_csv, write_cloud_raw, write_labels, CloudFormat, Labels};
use crate::output::{self, BaselineRow, Outcome};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub processed: usize,
    pub failed: usize,
    /// Files written, results first.
    pub outputs: Vec<PathBuf>,
    /// Text meant for standard output.
    pub stdout: String,
}

/// Runs the configured command. `progress` enables per-point reports on
/// standard error.
pub fn execute(cfg: &RunConfig, progress: bool) -> Result<RunSummary> {
    cfg.validate()?;
    let threads = cfg.threads.unwrap_or(0);
    let pool = ThreadPoolExecutor::new(threads);
    let command = cfg.command()?;
    let exec = Progress { inner: &pool, label: command.name(), enabled: progress };
    match command {
        Command::Generate => generate(cfg),
        Command::Bottleneck => bottleneck(cfg),
        Command::Diagram => diagram(cfg),
        Command::Pid => pid(cfg, &exec),
        Command::Euclidicity => euclidicity(cfg, &exec),
        Command::Baseline => baseline(cfg, &exec),
    }
}

fn is_raw(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("f64" | "bin"))
}

pub fn load_input(cfg: &RunConfig) -> Result<PointCloud> {
    let path = cfg.input()?;
    let raw = match cfg.input_format {
        InputFormat::Csv => false,
        InputFormat::Raw => true,
        InputFormat::Auto => is_raw(path),
    };
    let format = if raw {
        CloudFormat::Raw { dim: cfg.raw_dim.ok_or_else(|| CliError::config("raw_dim", "raw input needs its dimension"))? }
    } else {
        CloudFormat::Csv { header: cfg.header }
    };
    read_cloud(path, format)
}

fn load_labels(cfg: &RunConfig, len: usize) -> Result<Option<Labels>> {
    let path = match &cfg.labels {
        Some(p) => p.clone(),
        None => {
            let p = labels_path(cfg.input()?);
            if !p.exists() {
                return Ok(None);
            }
            p
        }
    };
    let labels = read_labels(&path)?;
    if labels.strata.len() != len {
        return Err(CliError::format(&path, format!("{} labels for {len} points", labels.strata.len())));
    }
    Ok(Some(labels))
}

fn query_ids(cfg: &RunConfig, cloud: &PointCloud) -> Result<Vec<usize>> {
    let labels = load_labels(cfg, cloud.len())?;
    let singular = labels.map(|l| l.singular).unwrap_or_default();
    cfg.queries.resolve(cloud.len(), &singular, cfg.seed).map_err(|m| CliError::config("queries", m))
}

fn output_path(cfg: &RunConfig, command: Command) -> Result<PathBuf> {
    if let Some(p) = &cfg.output {
        return Ok(p.clone());
    }
    let ext = match cfg.output_format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let input = cfg.input()?;
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(input.with_file_name(format!("{stem}.{}.{ext}", command.name())))
}

fn stringify<T>(results: Vec<tardis_core::Result<T>>) -> Vec<Outcome<T>> {
    results.into_iter().map(|r| r.map_err(|e| e.to_string())).collect()
}

/// Writes metadata next to `output` and checks for total failure.
fn finish<T>(cfg: &RunConfig, output: PathBuf, results: &[Outcome<T>]) -> Result<RunSummary> {
    let recorded = RunConfig { output: Some(output.clone()), ..cfg.clone() };
    output::write_metadata(&output, &recorded.to_metadata())?;
    let failed = results.iter().filter(|r| r.is_err()).count();
    let outputs = vec![output.clone(), output::metadata_path(&output)];
    if failed == results.len() && failed > 0 {
        let first = results.iter().find_map(|r| r.as_ref().err()).cloned().unwrap_or_default();
        return Err(CliError::AllFailed(first));
    }
    Ok(RunSummary { processed: results.len() - failed, failed, outputs, stdout: String::new() })
}

fn pid<E: Executor>(cfg: &RunConfig, exec: &E) -> Result<RunSummary> {
    let cloud = load_input(cfg)?;
    let ids = query_ids(cfg, &cloud)?;
    let pid_cfg = PidConfig { max_search_dim: cfg.max_search_dim, use_threshold: cfg.threshold };
    let results = stringify(pid_batch(&cloud, &ids, &cfg.k.0, cfg.steps, &pid_cfg, exec));
    let out = output_path(cfg, Command::Pid)?;
    output::write_pid(&out, cfg.output_format == OutputFormat::Json, &ids, &results)?;
    finish(cfg, out, &results)
}

/// One integer per cloud point, one per line.
fn read_dimension_file(path: &Path, len: usize) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let dims = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| match l.parse::<usize>() {
            Ok(d) if d > 0 => Ok(d),
            _ => Err(CliError::format(path, format!("line {}: expected a positive integer, got {l:?}", i + 1))),
        })
        .collect::<Result<Vec<_>>>()?;
    if dims.len() != len {
        return Err(CliError::format(path, format!("{} dimensions for {len} points", dims.len())));
    }
    Ok(dims)
}

fn dimension_source(cfg: &RunConfig, cloud: &PointCloud, ids: &[usize]) -> Result<DimensionSource> {
    Ok(match cfg.dim.as_ref().unwrap_or(&DimSpec::Pid) {
        DimSpec::Fixed(n) => DimensionSource::Fixed(*n),
        DimSpec::Pid => DimensionSource::Pid { max_search_dim: cfg.max_search_dim },
        DimSpec::File(path) => {
            let dims = read_dimension_file(path, cloud.len())?;
            DimensionSource::PerPoint(ids.iter().map(|&x| dims[x]).collect())
        }
    })
}

fn euclidicity<E: Executor>(cfg: &RunConfig, exec: &E) -> Result<RunSummary> {
    let cloud = load_input(cfg)?;
    let ids = query_ids(cfg, &cloud)?;
    let source = dimension_source(cfg, &cloud, &ids)?;
    let ecfg = EuclidicityConfig { k: cfg.k(), steps: cfg.steps, model_samples: cfg.samples, seed: cfg.seed };
    let mut recorded = cfg.clone();
    let raw = if cfg.single_scale {
        let (r, s) = match (cfg.inner, cfg.outer) {
            (Some(r), Some(s)) => (r, s),
            _ => default_single_scale(&cloud, &ids, cfg.k()).map_err(|e| CliError::config("k", e.to_string()))?,
        };
        recorded.inner = Some(r);
        recorded.outer = Some(s);
        single_scale_batch(&cloud, &ids, &source, r, s, &ecfg, exec)
    } else {
        euclidicity_batch(&cloud, &ids, &source, &ecfg, exec)
    };
    let mut results = stringify(raw);
    if cfg.normalize {
        let mut scores: Vec<f64> = results.iter().flatten().map(|r| r.score).collect();
        normalize_by_max(&mut scores);
        for (r, s) in results.iter_mut().flatten().zip(scores) {
            r.score = s;
        }
    }
    let out = output_path(cfg, Command::Euclidicity)?;
    output::write_euclidicity(&out, cfg.output_format == OutputFormat::Json, &ids, &results)?;
    if let Some(path) = &cfg.per_pair {
        output::write_per_pair(path, &results)?;
    }
    let mut summary = finish(&recorded, out, &results)?;
    summary.outputs.extend(cfg.per_pair.clone());
    Ok(summary)
}

fn baseline<E: Executor>(cfg: &RunConfig, exec: &E) -> Result<RunSummary> {
    let cloud = load_input(cfg)?;
    let ids = query_ids(cfg, &cloud)?;
    let source = dimension_source(cfg, &cloud, &ids)?;
    let results = exec.map_indexed(ids.len(), |i| -> Outcome<BaselineRow> {
        let x = ids[i];
        let run = || -> tardis_core::Result<BaselineRow> {
            if x >= cloud.len() {
                return Err(tardis_core::Error::IndexOutOfRange { index: x, len: cloud.len() });
            }
            let nb = Neighbourhood::new(&cloud, x);
            let grid = grid_from_neighbourhood(&nb, cfg.k(), cfg.steps)?;
            let n = match &source {
                DimensionSource::Fixed(n) => *n,
                DimensionSource::PerPoint(d) => d[i],
                DimensionSource::Pid { max_search_dim } => {
                    let pcfg = PidConfig { max_search_dim: *max_search_dim, use_threshold: true };
                    (pid_with_neighbourhood(&cloud, &nb, &grid, &pcfg)?.aggregate.round() as usize).max(1)
                }
            };
            let matrix = baseline_pairwise(&cloud, x, n, &grid, cfg.samples, cfg.seed)?;
            Ok(BaselineRow { n_used: n, null_mean: baseline_mean(&matrix), matrix })
        };
        run().map_err(|e| e.to_string())
    });
    let out = output_path(cfg, Command::Baseline)?;
    output::write_baseline(&out, cfg.output_format == OutputFormat::Json, &ids, &results)?;
    finish(cfg, out, &results)
}

fn generate(cfg: &RunConfig) -> Result<RunSummary> {
    let dim = match cfg.dim {
        Some(DimSpec::Fixed(n)) => n,
        _ => 2,
    };
    let generated = match cfg.space {
        Space::PinchedTorus => gen_pinched_torus(cfg.count, cfg.major, cfg.minor, cfg.seed),
        Space::WedgedSpheres => gen_wedged_spheres(dim, cfg.count, cfg.seed),
        Space::CircleWedgeSphere => gen_circle_wedge_sphere(cfg.count, cfg.seed),
        Space::FlatDisc => gen_flat_disc(dim, cfg.ambient.unwrap_or(dim), cfg.count, cfg.radius, cfg.seed),
    }
    .map_err(|e| CliError::config("space", e.to_string()))?;
    let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", cfg.space.name())));
    if is_raw(&out) {
        write_cloud_raw(&out, &generated.cloud)?;
    } else {
        write_cloud_csv(&out, &generated.cloud)?;
    }
    let labels = labels_path(&out);
    write_labels(&labels, &Labels::from(&generated))?;
    let recorded = RunConfig { output: Some(out.clone()), dim: Some(DimSpec::Fixed(dim)), ..cfg.clone() };
    output::write_metadata(&out, &recorded.to_metadata())?;
    let meta = output::metadata_path(&out);
    Ok(RunSummary { processed: generated.cloud.len(), failed: 0, outputs: vec![out, labels, meta], stdout: String::new() })
}

fn diagram_for(diagrams: &[PersistenceDiagram], degree: usize) -> PersistenceDiagram {
    diagrams.iter().find(|d| d.degree == degree).cloned().unwrap_or_else(|| PersistenceDiagram::empty(degree))
}

fn bottleneck(cfg: &RunConfig) -> Result<RunSummary> {
    let a = read_diagrams(cfg.input()?)?;
    let other = cfg.other.as_deref().ok_or_else(|| CliError::config("other", "second diagram file missing"))?;
    let b = read_diagrams(other)?;
    let degrees: Vec<usize> = match cfg.degree {
        Some(d) => vec![d],
        None => {
            let mut all: Vec<usize> = a.iter().chain(&b).map(|d| d.degree).collect();
            all.sort_unstable();
            all.dedup();
            all
        }
    };
    let stdout = match degrees.as_slice() {
        [] => "0\n".to_string(),
        [d] => format!("{}\n", bottleneck_distance(&diagram_for(&a, *d), &diagram_for(&b, *d))),
        many => many
            .iter()
            .map(|&d| format!("{d} {}\n", bottleneck_distance(&diagram_for(&a, d), &diagram_for(&b, d))))
            .collect(),
    };
    Ok(RunSummary { processed: degrees.len(), failed: 0, outputs: Vec::new(), stdout })
}

fn diagram(cfg: &RunConfig) -> Result<RunSummary> {
    let cloud = load_input(cfg)?;
    let ids: Vec<usize> = (0..cloud.len()).collect();
    let dist = DistanceMatrix::from_cloud(&cloud, &ids);
    let top = cfg.degree.unwrap_or(1);
    let barcodes = rips_persistence(&dist, top + 1, cfg.cap.unwrap_or(f64::INFINITY))?;
    let out = cfg.output.clone().unwrap_or_else(|| {
        let input = cfg.input.clone().unwrap_or_default();
        let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        input.with_file_name(format!("{stem}.diagram.json"))
    });
    write_diagrams(&out, &barcodes.diagrams)?;
    let recorded = RunConfig { output: Some(out.clone()), ..cfg.clone() };
    output::write_metadata(&out, &recorded.to_metadata())?;
    let meta = output::metadata_path(&out);
    Ok(RunSummary { processed: cloud.len(), failed: 0, outputs: vec![out, meta], stdout: String::new() })
}
