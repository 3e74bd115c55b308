//! Persistence diagram files: a JSON array of `{degree, birth, death}`
//! records, with `"inf"` as the death of essential classes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tardis_core::{Interval, PersistenceDiagram};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Death {
    Finite(f64),
    Infinite(InfTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum InfTag {
    #[serde(rename = "inf")]
    Inf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Record {
    degree: usize,
    birth: f64,
    death: Death,
}

pub fn diagrams_to_json(diagrams: &[PersistenceDiagram]) -> String {
    let records: Vec<Record> = diagrams
        .iter()
        .flat_map(|d| {
            d.intervals.iter().map(move |iv| Record {
                degree: d.degree,
                birth: iv.birth,
                death: if iv.is_essential() { Death::Infinite(InfTag::Inf) } else { Death::Finite(iv.death) },
            })
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("finite values serialize")
}

/// Parses a diagram file; the result holds one diagram per degree present,
/// in ascending degree order.
pub fn diagrams_from_json(text: &str) -> std::result::Result<Vec<PersistenceDiagram>, String> {
    let records: Vec<Record> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut by_degree: BTreeMap<usize, Vec<Interval>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let death = match r.death {
            Death::Finite(d) => d,
            Death::Infinite(_) => f64::INFINITY,
        };
        if !r.birth.is_finite() || death < r.birth {
            return Err(format!("record {i}: invalid interval ({}, {death})", r.birth));
        }
        by_degree.entry(r.degree).or_default().push(Interval::new(r.birth, death));
    }
    Ok(by_degree.into_iter().map(|(d, iv)| PersistenceDiagram::new(d, iv)).collect())
}

pub fn read_diagrams(path: &Path) -> Result<Vec<PersistenceDiagram>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    diagrams_from_json(&text).map_err(|m| CliError::format(path, m))
}

pub fn write_diagrams(path: &Path, diagrams: &[PersistenceDiagram]) -> Result<()> {
    std::fs::write(path, diagrams_to_json(diagrams) + "\n").map_err(|e| CliError::io(path, e))
}
