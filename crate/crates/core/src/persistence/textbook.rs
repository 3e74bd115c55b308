//! Unoptimised boundary-matrix reduction.
//!
//! Left-to-right column additions over Z/2Z with no clearing, no cohomology
//! and no shortcuts. Kept as a reference for the optimised reducer.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::{Interval, PersistenceDiagram};
use crate::vr::Filtration;

/// Diagrams in every degree `0..=max_dim` by the standard algorithm.
pub fn reference_diagrams(f: &Filtration) -> Vec<PersistenceDiagram> {
    let codec = f.codec();
    let index = f.index_map();
    let entries = f.entries();

    let mut columns: Vec<Vec<u32>> = Vec::with_capacity(entries.len());
    let mut verts = Vec::new();
    let mut face = Vec::new();
    for e in entries {
        let mut col = Vec::new();
        if e.dim > 0 {
            verts.clear();
            codec.decode_into(e.key, &mut verts);
            for skip in 0..verts.len() {
                face.clear();
                face.extend(verts.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                col.push(index[&codec.encode(&face)]);
            }
            col.sort_unstable();
        }
        columns.push(col);
    }

    let mut low_owner: HashMap<u32, usize> = HashMap::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match low_owner.get(&low) {
                Some(&k) => {
                    let other = columns[k].clone();
                    let col = &mut columns[j];
                    for x in other {
                        match col.binary_search(&x) {
                            Ok(p) => {
                                col.remove(p);
                            }
                            Err(p) => col.insert(p, x),
                        }
                    }
                }
                None => {
                    low_owner.insert(low, j);
                    break;
                }
            }
        }
    }

    let mut diagrams: Vec<Vec<Interval>> = vec![Vec::new(); f.max_dim() + 1];
    let mut is_low = vec![false; columns.len()];
    for (&low, &j) in &low_owner {
        is_low[low as usize] = true;
        let (b, d) = (entries[low as usize].value, entries[j].value);
        if b != d {
            diagrams[entries[low as usize].dim as usize].push(Interval::new(b, d));
        }
    }
    for (i, col) in columns.iter().enumerate() {
        if col.is_empty() && !is_low[i] {
            diagrams[entries[i].dim as usize].push(Interval::new(entries[i].value, f64::INFINITY));
        }
    }
    diagrams.into_iter().enumerate().map(|(d, v)| PersistenceDiagram::new(d, v)).collect()
}
