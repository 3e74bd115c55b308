//! Point cloud and label files.
//!
//! Clouds are read either as CSV (one point per row, comma separated,
//! optionally preceded by a single header row) or as raw little-endian
//! `f64` values in row-major order, with the dimension supplied separately.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use tardis_core::datasets::LabeledCloud;
use tardis_core::PointCloud;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Csv { header: bool },
    Raw { dim: usize },
}

pub fn read_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    match format {
        CloudFormat::Csv { header } => {
            let file = File::open(path).map_err(|e| CliError::io(path, e))?;
            parse_csv_cloud(file, header).map_err(|m| CliError::format(path, m))
        }
        CloudFormat::Raw { dim } => {
            let mut bytes = Vec::new();
            File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| CliError::io(path, e))?;
            parse_raw_cloud(&bytes, dim).map_err(|m| CliError::format(path, m))
        }
    }
}

pub fn parse_csv_cloud<R: Read>(input: R, header: bool) -> std::result::Result<PointCloud, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut coords = Vec::new();
    let mut dim = None;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(format!("row {}: expected {expected} values, found {}", row + 1, record.len()));
        }
        for (column, field) in record.iter().enumerate() {
            let value: f64 = field
                .parse()
                .map_err(|_| format!("row {}, column {}: cannot parse {field:?} as a number", row + 1, column + 1))?;
            coords.push(value);
        }
    }
    let dim = dim.ok_or("no points")?;
    PointCloud::new(dim, coords).map_err(|e| e.to_string())
}

pub fn parse_raw_cloud(bytes: &[u8], dim: usize) -> std::result::Result<PointCloud, String> {
    if bytes.len() % 8 != 0 {
        return Err(format!("length {} is not a multiple of 8 bytes", bytes.len()));
    }
    let coords = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    PointCloud::new(dim, coords).map_err(|e| e.to_string())
}

pub fn write_cloud_csv(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut out = create(path)?;
    let mut line = String::new();
    for p in cloud.points() {
        line.clear();
        for (i, c) in p.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&c.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(|e| CliError::io(path, e))?;
    }
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_cloud_raw(path: &Path, cloud: &PointCloud) -> Result<()> {
    let bytes: Vec<u8> = cloud.coords().iter().flat_map(|c| c.to_le_bytes()).collect();
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// `dir/name.csv` becomes `dir/name.labels.csv`.
pub fn labels_path(cloud_path: &Path) -> PathBuf {
    let stem = cloud_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    cloud_path.with_file_name(format!("{stem}.labels.csv"))
}

/// Per-point stratum labels and singular tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub strata: Vec<usize>,
    pub singular: Vec<usize>,
}

impl From<&LabeledCloud> for Labels {
    fn from(c: &LabeledCloud) -> Self {
        Self { strata: c.strata_labels.clone(), singular: c.singular_ids.clone() }
    }
}

pub fn write_labels(path: &Path, labels: &Labels) -> Result<()> {
    let mut out = create(path)?;
    let mut text = String::from("point_id,stratum,singular\n");
    for (i, s) in labels.strata.iter().enumerate() {
        let flag = u8::from(labels.singular.contains(&i));
        text.push_str(&format!("{i},{s},{flag}\n"));
    }
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Labels> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(e) => CliError::io(path, e),
        other => CliError::format(path, format!("{other:?}")),
    })?;
    let mut strata = Vec::new();
    let mut singular = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::format(path, e.to_string()))?;
        let field = |i: usize| -> Result<usize> {
            record
                .get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| CliError::format(path, format!("row {}: malformed label record", row + 1)))
        };
        let id = field(0)?;
        if id != strata.len() {
            return Err(CliError::format(path, format!("row {}: expected point_id {}, found {id}", row + 1, strata.len())));
        }
        strata.push(field(1)?);
        if field(2)? != 0 {
            singular.push(id);
        }
    }
    Ok(Labels { strata, singular })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_and_without_header() {
        let c = parse_csv_cloud("1,2\n3.5, 4\n".as_bytes(), false).unwrap();
        assert_eq!(c.coords(), &[1.0, 2.0, 3.5, 4.0]);
        let h = parse_csv_cloud("x,y\n1,2\n".as_bytes(), true).unwrap();
        assert_eq!(h.len(), 1);
        assert!(parse_csv_cloud("x,y\n1,2\n".as_bytes(), false).unwrap_err().contains("row 1, column 1"));
    }

    #[test]
    fn csv_errors() {
        assert!(parse_csv_cloud("1,2\n3\n".as_bytes(), false).unwrap_err().contains("row 2"));
        assert!(parse_csv_cloud("".as_bytes(), false).is_err());
        assert!(parse_csv_cloud("1,nan\n".as_bytes(), false).is_err());
    }

    #[test]
    fn raw_little_endian() {
        let bytes: Vec<u8> = [1.0f64, -2.0, 0.5, 8.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        let c = parse_raw_cloud(&bytes, 2).unwrap();
        assert_eq!(c.point(1), &[0.5, 8.0]);
        assert!(parse_raw_cloud(&bytes[..7], 1).is_err());
        assert!(parse_raw_cloud(&bytes, 3).is_err());
    }

    #[test]
    fn labels_file_name() {
        assert_eq!(labels_path(Path::new("out/wedge.csv")), Path::new("out/wedge.labels.csv"));
    }
}
