//! Vietoris–Rips filtrations.
//!
//! The filtration parameter is the simplex *diameter*: a simplex enters at the
//! largest pairwise distance among its vertices. Simplices are ordered by
//! `(value, dimension, lexicographic vertices)`, which is total and makes
//! every downstream pairing reproducible.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::pointcloud::{euclidean, PointCloud};

/// Default bound on the number of simplices a single construction may emit.
pub const DEFAULT_SIMPLEX_LIMIT: usize = 50_000_000;

/// Dense symmetric distance matrix over `n` points.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Euclidean distances between row-major points of dimension `dim`.
    pub fn from_points(dim: usize, coords: &[f64]) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0);
        let n = coords.len() / dim;
        Self::from_fn(n, |i, j| euclidean(&coords[i * dim..(i + 1) * dim], &coords[j * dim..(j + 1) * dim]))
    }

    /// Distances among the selected points of a cloud, in selection order.
    pub fn from_cloud(cloud: &PointCloud, ids: &[usize]) -> Self {
        Self::from_fn(ids.len(), |i, j| euclidean(cloud.point(ids[i]), cloud.point(ids[j])))
    }

    /// Builds the matrix from `f(i, j)` for `i < j`; the diagonal is zero.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    /// Smallest eccentricity: at this scale some vertex is adjacent to all.
    pub fn enclosing_radius(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).iter().copied().fold(0.0, f64::max)).fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

/// Encodes an ascending vertex list as base-`(n + 1)` digits `v + 1`.
///
/// For lists of equal length, numeric order of keys is lexicographic order of
/// vertices; leading digits are never zero, so keys of different lengths
/// never collide.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KeyCodec {
    base: u128,
}

impl KeyCodec {
    pub(crate) fn new(n_vertices: usize, max_dim: usize) -> Result<Self> {
        let base = n_vertices as u128 + 1;
        let mut acc: u128 = 1;
        for _ in 0..=max_dim {
            acc = acc
                .checked_mul(base)
                .ok_or(Error::KeyOverflow { vertices: n_vertices, dim: max_dim })?;
        }
        Ok(Self { base })
    }

    pub(crate) fn base(&self) -> u128 {
        self.base
    }

    #[inline]
    pub(crate) fn push(&self, key: u128, vertex: usize) -> u128 {
        key * self.base + vertex as u128 + 1
    }

    pub(crate) fn encode(&self, vertices: &[u32]) -> u128 {
        vertices.iter().fold(0, |k, &v| self.push(k, v as usize))
    }

    /// Appends the vertices of `key` (ascending) to `out`.
    pub(crate) fn decode_into(&self, mut key: u128, out: &mut Vec<u32>) {
        let start = out.len();
        while key > 0 {
            out.push(((key % self.base) - 1) as u32);
            key /= self.base;
        }
        out[start..].reverse();
    }
}

/// A simplex with its filtration value (its diameter for Rips filtrations).
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<u32>,
    pub value: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Entry {
    pub value: f64,
    pub dim: u32,
    pub key: u128,
}

fn entry_order(a: &Entry, b: &Entry) -> Ordering {
    a.value.total_cmp(&b.value).then(a.dim.cmp(&b.dim)).then(a.key.cmp(&b.key))
}

/// A simplicial filtration stored in its total order.
#[derive(Debug, Clone)]
pub struct Filtration {
    n_vertices: usize,
    max_dim: usize,
    cap: f64,
    codec: KeyCodec,
    entries: Vec<Entry>,
}

impl Filtration {
    /// Builds a filtration from arbitrary simplices.
    ///
    /// Vertex lists must be strictly ascending, every face of every simplex
    /// must be present with a value no larger than the simplex's, and values
    /// must be finite and nonnegative.
    pub fn from_simplices(n_vertices: usize, simplices: Vec<Simplex>) -> Result<Self> {
        let max_dim = simplices.iter().map(|s| s.vertices.len().saturating_sub(1)).max().unwrap_or(0);
        let codec = KeyCodec::new(n_vertices, max_dim)?;
        let mut entries = Vec::with_capacity(simplices.len());
        for s in &simplices {
            if s.vertices.is_empty() {
                return Err(Error::InvalidFiltration("empty simplex".into()));
            }
            if s.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidFiltration(alloc::format!(
                    "vertices {:?} not strictly ascending",
                    s.vertices
                )));
            }
            if s.vertices.iter().any(|&v| v as usize >= n_vertices) {
                return Err(Error::InvalidFiltration(alloc::format!(
                    "vertex out of range in {:?}",
                    s.vertices
                )));
            }
            if !(s.value >= 0.0) || !s.value.is_finite() {
                return Err(Error::InvalidFiltration(alloc::format!(
                    "bad value {} for {:?}",
                    s.value,
                    s.vertices
                )));
            }
            entries.push(Entry { value: s.value, dim: s.dim() as u32, key: codec.encode(&s.vertices) });
        }
        entries.sort_unstable_by(entry_order);
        if entries.windows(2).any(|w| w[0].dim == w[1].dim && w[0].key == w[1].key) {
            return Err(Error::InvalidFiltration("duplicate simplex".into()));
        }
        let f = Self { n_vertices, max_dim, cap: f64::INFINITY, codec, entries };
        f.check_faces()?;
        Ok(f)
    }

    fn check_faces(&self) -> Result<()> {
        let index = self.index_map();
        let mut verts = Vec::new();
        let mut face = Vec::new();
        for (pos, e) in self.entries.iter().enumerate() {
            if e.dim == 0 {
                continue;
            }
            verts.clear();
            self.codec.decode_into(e.key, &mut verts);
            for skip in 0..verts.len() {
                face.clear();
                face.extend(verts.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                match index.get(&self.codec.encode(&face)) {
                    Some(&p) if (p as usize) < pos => {}
                    _ => {
                        return Err(Error::InvalidFiltration(alloc::format!(
                            "face {face:?} of {verts:?} missing or out of order"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn index_map(&self) -> hashbrown::HashMap<u128, u32> {
        self.entries.iter().enumerate().map(|(i, e)| (e.key, i as u32)).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn diameter_cap(&self) -> f64 {
        self.cap
    }

    pub(crate) fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub(crate) fn codec(&self) -> KeyCodec {
        self.codec
    }

    pub fn simplex(&self, index: usize) -> Simplex {
        let e = &self.entries[index];
        let mut vertices = Vec::with_capacity(e.dim as usize + 1);
        self.codec.decode_into(e.key, &mut vertices);
        Simplex { vertices, value: e.value }
    }

    /// Simplices in filtration order.
    pub fn simplices(&self) -> impl ExactSizeIterator<Item = Simplex> + '_ {
        (0..self.entries.len()).map(move |i| self.simplex(i))
    }

    /// Number of simplices per dimension, without trailing zeros.
    pub fn simplex_count(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.max_dim + 1];
        for e in &self.entries {
            counts[e.dim as usize] += 1;
        }
        while counts.len() > 1 && counts.last() == Some(&0) {
            counts.pop();
        }
        counts
    }
}

/// Per-dimension simplex counts of a filtration.
pub fn simplex_count(f: &Filtration) -> Vec<usize> {
    f.simplex_count()
}

/// Every simplex of dimension `<= max_dim` with diameter `<= diameter_cap`.
pub fn build_vietoris_rips(dist: &DistanceMatrix, max_dim: usize, diameter_cap: f64) -> Result<Filtration> {
    build_vietoris_rips_with_limit(dist, max_dim, diameter_cap, DEFAULT_SIMPLEX_LIMIT)
}

pub fn build_vietoris_rips_with_limit(
    dist: &DistanceMatrix,
    max_dim: usize,
    diameter_cap: f64,
    limit: usize,
) -> Result<Filtration> {
    if dist.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !(diameter_cap > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("diameter cap {diameter_cap} must be positive")));
    }
    let codec = KeyCodec::new(dist.len(), max_dim)?;
    let mut entries = Vec::new();
    enumerate_cliques(dist, max_dim, diameter_cap, codec, limit, |dim, value, key| {
        entries.push(Entry { value, dim: dim as u32, key })
    })?;
    entries.sort_unstable_by(entry_order);
    Ok(Filtration { n_vertices: dist.len(), max_dim, cap: diameter_cap, codec, entries })
}

/// Sorted neighbours `u > v` within the cap, for every `v`.
pub(crate) fn upper_neighbours(dist: &DistanceMatrix, cap: f64) -> Vec<Vec<u32>> {
    let n = dist.len();
    (0..n)
        .map(|v| {
            let row = dist.row(v);
            (v + 1..n).filter(|&u| row[u] <= cap).map(|u| u as u32).collect()
        })
        .collect()
}

/// Calls `emit(dim, diameter, key)` for every clique of at most `max_dim + 1`
/// vertices whose diameter is within the cap.
pub(crate) fn enumerate_cliques<F: FnMut(usize, f64, u128)>(
    dist: &DistanceMatrix,
    max_dim: usize,
    cap: f64,
    codec: KeyCodec,
    limit: usize,
    mut emit: F,
) -> Result<usize> {
    let upper = upper_neighbours(dist, cap);
    let mut count = 0usize;
    let mut stack_vertices: Vec<u32> = Vec::with_capacity(max_dim + 1);
    for v in 0..dist.len() {
        count += 1;
        if count > limit {
            return Err(Error::SimplexLimit { limit });
        }
        emit(0, 0.0, codec.push(0, v));
        if max_dim == 0 {
            continue;
        }
        stack_vertices.clear();
        stack_vertices.push(v as u32);
        expand(
            dist,
            &upper,
            codec,
            max_dim,
            limit,
            &mut count,
            &mut stack_vertices,
            codec.push(0, v),
            0.0,
            &upper[v],
            &mut emit,
        )?;
    }
    Ok(count)
}

#[allow(clippy::too_many_arguments)]
fn expand<F: FnMut(usize, f64, u128)>(
    dist: &DistanceMatrix,
    upper: &[Vec<u32>],
    codec: KeyCodec,
    max_dim: usize,
    limit: usize,
    count: &mut usize,
    vertices: &mut Vec<u32>,
    key: u128,
    value: f64,
    candidates: &[u32],
    emit: &mut F,
) -> Result<()> {
    let dim = vertices.len();
    for (i, &u) in candidates.iter().enumerate() {
        let row = dist.row(u as usize);
        let diam = vertices.iter().fold(value, |m, &w| m.max(row[w as usize]));
        *count += 1;
        if *count > limit {
            return Err(Error::SimplexLimit { limit });
        }
        let k = codec.push(key, u as usize);
        emit(dim, diam, k);
        if dim < max_dim {
            let next: Vec<u32> = intersect_sorted(&candidates[i + 1..], &upper[u as usize]);
            if !next.is_empty() {
                vertices.push(u);
                expand(dist, upper, codec, max_dim, limit, count, vertices, k, diam, &next, emit)?;
                vertices.pop();
            }
        }
    }
    Ok(())
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral() -> DistanceMatrix {
        DistanceMatrix::from_fn(3, |_, _| 1.0)
    }

    #[test]
    fn equilateral_triangle() {
        let f = build_vietoris_rips(&equilateral(), 2, 2.0).unwrap();
        assert_eq!(f.simplex_count(), vec![3, 3, 1]);
        let s: Vec<_> = f.simplices().collect();
        assert!(s[..3].iter().all(|x| x.value == 0.0 && x.dim() == 0));
        assert!(s[3..6].iter().all(|x| x.value == 1.0 && x.dim() == 1));
        assert_eq!(s[6], Simplex { vertices: vec![0, 1, 2], value: 1.0 });
        assert_eq!(s[3].vertices, vec![0, 1]);
        assert_eq!(s[4].vertices, vec![0, 2]);
        assert_eq!(s[5].vertices, vec![1, 2]);
    }

    #[test]
    fn cap_excludes_long_edge() {
        let d = DistanceMatrix::from_fn(2, |_, _| 3.0);
        let f = build_vietoris_rips(&d, 2, 2.0).unwrap();
        assert_eq!(f.simplex_count(), vec![2]);
    }

    #[test]
    fn single_point() {
        let d = DistanceMatrix::from_fn(1, |_, _| 0.0);
        assert_eq!(build_vietoris_rips(&d, 3, 1.0).unwrap().simplex_count(), vec![1]);
    }

    #[test]
    fn limit_guard() {
        let d = DistanceMatrix::from_fn(10, |_, _| 1.0);
        assert_eq!(
            build_vietoris_rips_with_limit(&d, 3, 2.0, 100).unwrap_err(),
            Error::SimplexLimit { limit: 100 }
        );
    }

    #[test]
    fn codec_roundtrip() {
        let c = KeyCodec::new(7, 3).unwrap();
        let mut out = Vec::new();
        c.decode_into(c.encode(&[0, 3, 6]), &mut out);
        assert_eq!(out, vec![0, 3, 6]);
        assert!(c.encode(&[0, 6]) < c.encode(&[1, 2]));
        assert!(KeyCodec::new(usize::MAX / 2, 8).is_err());
    }

    #[test]
    fn from_simplices_validates_faces() {
        let s = |v: &[u32], x: f64| Simplex { vertices: v.to_vec(), value: x };
        let ok = Filtration::from_simplices(2, vec![s(&[0], 0.0), s(&[1], 0.5), s(&[0, 1], 1.0)]).unwrap();
        assert_eq!(ok.simplex_count(), vec![2, 1]);
        assert!(Filtration::from_simplices(2, vec![s(&[0], 0.0), s(&[0, 1], 1.0)]).is_err());
        assert!(Filtration::from_simplices(2, vec![s(&[0], 0.0), s(&[1], 2.0), s(&[0, 1], 1.0)]).is_err());
        assert!(Filtration::from_simplices(2, vec![s(&[1, 0], 1.0)]).is_err());
    }
}
