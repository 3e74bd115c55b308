//! Result tables.
//!
//! Every table has one row per point (PID: per point and scale). Failed
//! points keep their row with empty value columns and the error message in
//! the `failure` column.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tardis_core::{EuclidicityReport, PidProfile};

use crate::error::{CliError, Result};
use crate::io::create;

pub type Outcome<T> = std::result::Result<T, String>;

/// CSV field quoting for free-form messages.
fn quote(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn pid_csv(ids: &[usize], results: &[Outcome<PidProfile>]) -> String {
    let mut out = String::from("point_id,scale,i_x,aggregate,failure\n");
    for (&id, r) in ids.iter().zip(results) {
        match r {
            Ok(p) => {
                for (scale, est) in p.scales.iter().zip(&p.estimates) {
                    writeln!(out, "{id},{scale},{est},{},", p.aggregate).unwrap();
                }
            }
            Err(e) => writeln!(out, "{id},,,,{}", quote(e)).unwrap(),
        }
    }
    out
}

#[derive(Serialize)]
struct PidRecord<'a> {
    point_id: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    scales: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimates: Option<&'a [usize]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aggregate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    search_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    all_empty: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<&'a str>,
}

pub fn write_pid(path: &Path, json: bool, ids: &[usize], results: &[Outcome<PidProfile>]) -> Result<()> {
    if !json {
        return write_text(path, &pid_csv(ids, results));
    }
    let records: Vec<PidRecord> = ids
        .iter()
        .zip(results)
        .map(|(&point_id, r)| match r {
            Ok(p) => PidRecord {
                point_id,
                scales: Some(&p.scales),
                estimates: Some(&p.estimates),
                aggregate: Some(p.aggregate),
                search_dim: Some(p.search_dim),
                all_empty: Some(p.all_empty),
                failure: None,
            },
            Err(e) => PidRecord {
                point_id,
                scales: None,
                estimates: None,
                aggregate: None,
                search_dim: None,
                all_empty: None,
                failure: Some(e),
            },
        })
        .collect();
    write_json(path, &records)
}

pub fn euclidicity_csv(ids: &[usize], results: &[Outcome<EuclidicityReport>]) -> String {
    let mut out = String::from("point_id,score,n_used,coverage,low_coverage,grid_cells,r_min,r_max,s_min,s_max,failure\n");
    for (&id, r) in ids.iter().zip(results) {
        match r {
            Ok(e) => writeln!(
                out,
                "{id},{},{},{},{},{},{},{},{},{},",
                e.score,
                e.intrinsic_dim,
                e.coverage,
                u8::from(e.low_coverage),
                e.grid_cells,
                e.r_min,
                e.r_max,
                e.s_min,
                e.s_max
            )
            .unwrap(),
            Err(e) => writeln!(out, "{id},,,,,,,,,,{}", quote(e)).unwrap(),
        }
    }
    out
}

pub fn per_pair_csv(results: &[Outcome<EuclidicityReport>]) -> String {
    let mut out = String::from("point_id,inner,outer,annulus_size,draw,distance\n");
    for e in results.iter().flatten() {
        for p in &e.per_pair {
            for (draw, d) in p.distances.iter().enumerate() {
                writeln!(out, "{},{},{},{},{draw},{d}", e.point, p.inner, p.outer, p.annulus_size).unwrap();
            }
        }
    }
    out
}

#[derive(Serialize)]
struct CellRecord<'a> {
    inner: f64,
    outer: f64,
    annulus_size: usize,
    distances: &'a [f64],
    value: f64,
}

#[derive(Serialize)]
struct EuclidicityRecord<'a> {
    point_id: usize,
    #[serde(flatten)]
    report: Option<ReportFields<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<&'a str>,
}

#[derive(Serialize)]
struct ReportFields<'a> {
    score: f64,
    n_used: usize,
    coverage: f64,
    low_coverage: bool,
    grid_cells: usize,
    r_min: f64,
    r_max: f64,
    s_min: f64,
    s_max: f64,
    model_samples: usize,
    seed: u64,
    per_pair: Vec<CellRecord<'a>>,
}

pub fn write_euclidicity(path: &Path, json: bool, ids: &[usize], results: &[Outcome<EuclidicityReport>]) -> Result<()> {
    if !json {
        return write_text(path, &euclidicity_csv(ids, results));
    }
    let records: Vec<EuclidicityRecord> = ids
        .iter()
        .zip(results)
        .map(|(&point_id, r)| match r {
            Ok(e) => EuclidicityRecord {
                point_id,
                report: Some(ReportFields {
                    score: e.score,
                    n_used: e.intrinsic_dim,
                    coverage: e.coverage,
                    low_coverage: e.low_coverage,
                    grid_cells: e.grid_cells,
                    r_min: e.r_min,
                    r_max: e.r_max,
                    s_min: e.s_min,
                    s_max: e.s_max,
                    model_samples: e.model_samples,
                    seed: e.seed,
                    per_pair: e
                        .per_pair
                        .iter()
                        .map(|p| CellRecord {
                            inner: p.inner,
                            outer: p.outer,
                            annulus_size: p.annulus_size,
                            distances: &p.distances,
                            value: p.value,
                        })
                        .collect(),
                }),
                failure: None,
            },
            Err(e) => EuclidicityRecord { point_id, report: None, failure: Some(e) },
        })
        .collect();
    write_json(path, &records)
}

pub fn write_per_pair(path: &Path, results: &[Outcome<EuclidicityReport>]) -> Result<()> {
    write_text(path, &per_pair_csv(results))
}

/// Model-vs-model distances of one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRow {
    pub n_used: usize,
    pub null_mean: f64,
    pub matrix: Vec<Vec<f64>>,
}

pub fn baseline_csv(ids: &[usize], results: &[Outcome<BaselineRow>]) -> String {
    let mut out = String::from("point_id,n_used,null_mean,failure\n");
    for (&id, r) in ids.iter().zip(results) {
        match r {
            Ok(b) => writeln!(out, "{id},{},{},", b.n_used, b.null_mean).unwrap(),
            Err(e) => writeln!(out, "{id},,,{}", quote(e)).unwrap(),
        }
    }
    out
}

#[derive(Serialize)]
struct BaselineRecord<'a> {
    point_id: usize,
    #[serde(flatten)]
    row: Option<&'a BaselineRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<&'a str>,
}

pub fn write_baseline(path: &Path, json: bool, ids: &[usize], results: &[Outcome<BaselineRow>]) -> Result<()> {
    if !json {
        return write_text(path, &baseline_csv(ids, results));
    }
    let records: Vec<BaselineRecord> = ids
        .iter()
        .zip(results)
        .map(|(&point_id, r)| match r {
            Ok(row) => BaselineRecord { point_id, row: Some(row), failure: None },
            Err(e) => BaselineRecord { point_id, row: None, failure: Some(e) },
        })
        .collect();
    write_json(path, &records)
}

pub fn write_metadata(output: &Path, record: &str) -> Result<()> {
    write_text(&metadata_path(output), record)
}

/// `scores.csv` becomes `scores.csv.meta`.
pub fn metadata_path(output: &Path) -> std::path::PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta");
    name.into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_keep_their_row() {
        let profile = PidProfile {
            point: 3,
            scales: vec![0.5, 1.0],
            estimates: vec![1, 2],
            aggregate: 1.5,
            search_dim: 3,
            all_empty: false,
        };
        let csv = pid_csv(&[3, 9], &[Ok(profile), Err("point 9, out of range".into())]);
        assert_eq!(
            csv,
            "point_id,scale,i_x,aggregate,failure\n3,0.5,1,1.5,\n3,1,2,1.5,\n9,,,,\"point 9, out of range\"\n"
        );
    }

    #[test]
    fn baseline_table() {
        let row = BaselineRow { n_used: 2, null_mean: 0.25, matrix: vec![vec![0.0, 0.25], vec![0.25, 0.0]] };
        assert_eq!(baseline_csv(&[1], &[Ok(row)]), "point_id,n_used,null_mean,failure\n1,2,0.25,\n");
    }

    #[test]
    fn metadata_sits_next_to_output() {
        assert_eq!(metadata_path(Path::new("out/s.csv")), Path::new("out/s.csv.meta"));
    }
}
