//! Coboundary-matrix reduction with clearing.

use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hash;
use core::cell::RefCell;
use core::mem;

use hashbrown::HashMap;

use super::{BarcodeSet, Interval, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::vr::{enumerate_cliques, DistanceMatrix, Filtration, KeyCodec};

/// Output of reducing the columns of one dimension.
struct DimPairs<C> {
    pairs: Vec<(C, C)>,
    essential: Vec<C>,
    /// Every death cell, which the next dimension can skip.
    pivots: HashMap<C, usize>,
}

/// Reduces the coboundary columns of one dimension.
///
/// `columns` must yield the (uncleared) cells of the dimension in decreasing
/// filtration order; `coboundary` appends the cofacets of a cell in any
/// order. Pivots are the smallest cofacet in filtration order.
///
/// A column whose smallest cofacet is still free needs no reduction; it is
/// paired at once and only regenerated if a later column has to add it.
/// `shortcut` may return the smallest cofacet when it is cheap to find, which
/// avoids generating the full coboundary for such columns.
fn reduce_dimension<C, I, S, F>(columns: I, mut shortcut: S, mut coboundary: F) -> DimPairs<C>
where
    C: Copy + Ord + Hash,
    I: Iterator<Item = C>,
    S: FnMut(C) -> Option<C>,
    F: FnMut(C, &mut Vec<C>),
{
    let mut owner: HashMap<C, usize> = HashMap::new();
    let mut stored: Vec<(C, Option<Vec<C>>)> = Vec::new();
    let mut out = DimPairs { pairs: Vec::new(), essential: Vec::new(), pivots: HashMap::new() };
    let mut col: Vec<C> = Vec::new();
    let mut scratch: Vec<C> = Vec::new();
    for cell in columns {
        if let Some(first) = shortcut(cell) {
            if !owner.contains_key(&first) {
                owner.insert(first, stored.len());
                stored.push((cell, None));
                out.pairs.push((cell, first));
                continue;
            }
        }
        col.clear();
        coboundary(cell, &mut col);
        let Some(&first) = col.iter().min() else {
            out.essential.push(cell);
            continue;
        };
        if !owner.contains_key(&first) {
            owner.insert(first, stored.len());
            stored.push((cell, None));
            out.pairs.push((cell, first));
            continue;
        }
        col.sort_unstable();
        loop {
            let Some(&pivot) = col.first() else {
                out.essential.push(cell);
                break;
            };
            match owner.get(&pivot) {
                Some(&j) => {
                    let (source, cached) = &mut stored[j];
                    let other = cached.get_or_insert_with(|| {
                        let mut v = Vec::new();
                        coboundary(*source, &mut v);
                        v.sort_unstable();
                        v
                    });
                    add_mod2(&col, other, &mut scratch);
                    mem::swap(&mut col, &mut scratch);
                }
                None => {
                    owner.insert(pivot, stored.len());
                    stored.push((cell, Some(col.clone())));
                    out.pairs.push((cell, pivot));
                    break;
                }
            }
        }
    }
    out.pivots = owner;
    out
}

/// Symmetric difference of two sorted lists.
fn add_mod2<C: Copy + Ord>(a: &[C], b: &[C], out: &mut Vec<C>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

fn push_interval(diagrams: &mut [Vec<Interval>], degree: usize, birth: f64, death: f64) {
    if birth != death {
        diagrams[degree].push(Interval::new(birth, death));
    }
}

fn finish(diagrams: Vec<Vec<Interval>>) -> Vec<PersistenceDiagram> {
    diagrams.into_iter().enumerate().map(|(d, v)| PersistenceDiagram::new(d, v)).collect()
}

/// All-degree diagrams of an explicit filtration; cells are filtration indices.
pub(super) fn explicit_diagrams(f: &Filtration) -> Vec<PersistenceDiagram> {
    let entries = f.entries();
    let codec = f.codec();
    let max_dim = f.max_dim();
    let index = f.index_map();

    let mut cofaces: Vec<Vec<u32>> = vec![Vec::new(); entries.len()];
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); max_dim + 1];
    let mut verts = Vec::new();
    let mut face = Vec::new();
    for (pos, e) in entries.iter().enumerate() {
        by_dim[e.dim as usize].push(pos as u32);
        if e.dim == 0 {
            continue;
        }
        verts.clear();
        codec.decode_into(e.key, &mut verts);
        for skip in 0..verts.len() {
            face.clear();
            face.extend(verts.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
            let facet = index[&codec.encode(&face)];
            cofaces[facet as usize].push(pos as u32);
        }
    }

    let mut diagrams: Vec<Vec<Interval>> = vec![Vec::new(); max_dim + 1];
    let mut cleared: HashMap<u32, usize> = HashMap::new();
    for (dim, cells) in by_dim.iter().enumerate() {
        let columns = cells.iter().rev().copied().filter(|c| !cleared.contains_key(c));
        let result = reduce_dimension(columns, |_| None, |c, out| out.extend_from_slice(&cofaces[c as usize]));
        for &(b, d) in &result.pairs {
            push_interval(&mut diagrams, dim, entries[b as usize].value, entries[d as usize].value);
        }
        cleared = result.pivots;
        for &c in &result.essential {
            diagrams[dim].push(Interval::new(entries[c as usize].value, f64::INFINITY));
        }
    }
    finish(diagrams)
}

/// Coboundaries are generated for simplices of at most this many vertices
/// after insertion.
const MAX_COFACE_VERTICES: usize = 32;

/// A simplex of an implicit Rips complex: filtration value and vertex key.
///
/// Within one dimension the derived order is the filtration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Cell {
    order: u64,
    key: u128,
}

impl Cell {
    fn new(value: f64, key: u128) -> Self {
        let bits = value.to_bits();
        let order = if bits >> 63 == 1 { !bits } else { bits | (1 << 63) };
        Self { order, key }
    }

    fn value(self) -> f64 {
        let bits = if self.order >> 63 == 1 { self.order & !(1 << 63) } else { !self.order };
        f64::from_bits(bits)
    }
}

/// Rips persistence without materialising the top-dimensional simplices.
///
/// Simplices of dimension below `max_dim` are enumerated explicitly; the
/// `max_dim`-simplices only ever appear as cofacets generated on demand.
/// The result equals `compute_persistence(build_vietoris_rips(..))`.
pub fn rips_persistence(dist: &DistanceMatrix, max_dim: usize, cap: f64) -> Result<BarcodeSet> {
    rips_persistence_with_limit(dist, max_dim, cap, crate::vr::DEFAULT_SIMPLEX_LIMIT)
}

pub fn rips_persistence_with_limit(
    dist: &DistanceMatrix,
    max_dim: usize,
    cap: f64,
    limit: usize,
) -> Result<BarcodeSet> {
    if dist.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !(cap > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("diameter cap {cap} must be positive")));
    }
    // past the enclosing radius the complex is a cone and nothing changes
    let cap = cap.min(dist.enclosing_radius());
    if max_dim >= MAX_COFACE_VERTICES {
        return Err(Error::InvalidParameter(alloc::format!(
            "max_dim {max_dim} exceeds the supported {}",
            MAX_COFACE_VERTICES - 1
        )));
    }
    if max_dim == 0 {
        return Ok(BarcodeSet::default());
    }
    let n = dist.len();
    let codec = KeyCodec::new(n, max_dim)?;
    let explicit_dim = (max_dim - 1).max(1);
    let mut cells: Vec<Vec<Cell>> = vec![Vec::new(); explicit_dim + 1];
    enumerate_cliques(dist, explicit_dim, cap, codec, limit, |dim, value, key| {
        cells[dim].push(Cell::new(value, key))
    })?;
    for c in cells.iter_mut().skip(1) {
        c.sort_unstable();
    }

    let mut diagrams: Vec<Vec<Interval>> = vec![Vec::new(); max_dim];

    // Degree 0: Kruskal with the elder rule. All vertices are born at 0.
    let mut uf = UnionFind::new(n);
    let mut cleared: HashMap<Cell, usize> = HashMap::new();
    for &edge in &cells[1] {
        let (a, b) = edge_vertices(edge.key, n);
        if uf.union(a, b) {
            push_interval(&mut diagrams, 0, 0.0, edge.value());
            cleared.insert(edge, 0);
        }
    }
    for _ in 0..uf.components {
        diagrams[0].push(Interval::new(0.0, f64::INFINITY));
    }

    for dim in 1..max_dim {
        let columns = cells[dim].iter().rev().copied().filter(|c| !cleared.contains_key(c));
        let verts = RefCell::new(Vec::with_capacity(max_dim + 1));
        let result = reduce_dimension(
            columns,
            |cell| {
                let mut v = verts.borrow_mut();
                v.clear();
                codec.decode_into(cell.key, &mut v);
                smallest_equal_cofacet(dist, codec, cell, &v)
            },
            |cell, out| {
                let mut v = verts.borrow_mut();
                v.clear();
                codec.decode_into(cell.key, &mut v);
                rips_coboundary(dist, codec, cap, cell, &v, out);
            },
        );
        for &(b, d) in &result.pairs {
            push_interval(&mut diagrams, dim, b.value(), d.value());
        }
        cleared = result.pivots;
        for &c in &result.essential {
            diagrams[dim].push(Interval::new(c.value(), f64::INFINITY));
        }
    }
    Ok(BarcodeSet { diagrams: finish(diagrams) })
}

fn edge_vertices(key: u128, n: usize) -> (usize, usize) {
    let base = n as u128 + 1;
    (((key / base) - 1) as usize, ((key % base) - 1) as usize)
}

/// The first cofacet, in vertex order, whose diameter equals the cell's.
/// Keys grow with the inserted vertex, so when it exists it is the smallest
/// cofacet in filtration order.
fn smallest_equal_cofacet(dist: &DistanceMatrix, codec: KeyCodec, cell: Cell, verts: &[u32]) -> Option<Cell> {
    let value = cell.value();
    let mut next = 0usize;
    for v in 0..dist.len() {
        if next < verts.len() && verts[next] as usize == v {
            next += 1;
            continue;
        }
        let row = dist.row(v);
        if verts.iter().all(|&u| row[u as usize] <= value) {
            let mut key = 0u128;
            for &u in &verts[..next] {
                key = codec.push(key, u as usize);
            }
            key = codec.push(key, v);
            for &u in &verts[next..] {
                key = codec.push(key, u as usize);
            }
            return Some(Cell::new(value, key));
        }
    }
    None
}

fn rips_coboundary(dist: &DistanceMatrix, codec: KeyCodec, cap: f64, cell: Cell, verts: &[u32], out: &mut Vec<Cell>) {
    let base_value = cell.value();
    let n = dist.len();
    // inserting v before position p gives key = fixed[p] + (v + 1) * scale[p]
    let len = verts.len();
    let mut fixed = [0u128; MAX_COFACE_VERTICES];
    let mut scale = [0u128; MAX_COFACE_VERTICES];
    let mut low = 0u128;
    let mut pow = 1u128;
    for p in (0..=len).rev() {
        scale[p] = pow;
        let high = codec.encode(&verts[..p]);
        fixed[p] = high * pow * codec.base() + low;
        if p > 0 {
            low += (verts[p - 1] as u128 + 1) * pow;
            pow *= codec.base();
        }
    }
    out.reserve(n.saturating_sub(len));
    let mut next = 0usize;
    for v in 0..n {
        if next < len && verts[next] as usize == v {
            next += 1;
            continue;
        }
        let row = dist.row(v);
        let mut diam = base_value;
        let mut within = true;
        for &u in verts {
            let d = row[u as usize];
            if d > cap {
                within = false;
                break;
            }
            diam = diam.max(d);
        }
        if within {
            out.push(Cell::new(diam, fixed[next] + (v as u128 + 1) * scale[next]));
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), components: n }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // the older root (smaller index) survives
        let (keep, drop) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop] = keep;
        self.components -= 1;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_value_roundtrip() {
        for v in [0.0, 1e-300, 0.5, 3.25, 1e300, f64::INFINITY] {
            assert_eq!(Cell::new(v, 0).value(), v);
        }
        assert!(Cell::new(0.5, 99) < Cell::new(0.75, 1));
        assert!(Cell::new(0.5, 1) < Cell::new(0.5, 2));
    }

    #[test]
    fn mod2_addition() {
        let mut out = Vec::new();
        add_mod2(&[1, 3, 5, 7], &[3, 4, 7, 9], &mut out);
        assert_eq!(out, vec![1, 4, 5, 9]);
    }
}
