//! Point storage, metric queries and intrinsic annuli.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Relative slack applied to both annulus boundaries.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-12;

/// A finite metric space with points addressed by `0..len()`.
///
/// k-NN and annulus queries are written against this trait only, so a
/// precomputed distance matrix can stand in for coordinates.
pub trait FiniteMetric {
    fn len(&self) -> usize;

    /// Distance between two valid indices.
    fn distance(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Points in `R^N` with the Euclidean metric.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from row-major coordinates.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if coords.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if coords.len() % dim != 0 {
            return Err(Error::RaggedCoordinates { len: coords.len(), dim });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { row: pos / dim, column: pos % dim });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyCloud)?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(dim * rows.len());
        for (row, values) in rows.iter().enumerate() {
            let values = values.as_ref();
            if values.len() != dim {
                return Err(Error::RaggedRow { row, expected: dim, found: values.len() });
            }
            coords.extend_from_slice(values);
        }
        Self::new(dim, coords)
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.len() })
        }
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn pairwise_distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        Ok(euclidean(self.point(i), self.point(j)))
    }

    /// Ascending distances from `x` to its `k` nearest other points.
    pub fn knn_distances(&self, x: usize, k: usize) -> Result<Vec<f64>> {
        self.check(x)?;
        knn_distances(self, x, k)
    }

    /// The intrinsic annulus `{ y : r <= d(x, y) <= s }`.
    pub fn extract_annulus(&self, x: usize, r: f64, s: f64) -> Result<AnnulusSelection> {
        self.check(x)?;
        extract_annulus(self, x, r, s)
    }

    /// Copies the selected points into a new cloud.
    pub fn select(&self, ids: &[usize]) -> Result<PointCloud> {
        let mut coords = Vec::with_capacity(ids.len() * self.dim);
        for &i in ids {
            self.check(i)?;
            coords.extend_from_slice(self.point(i));
        }
        PointCloud::new(self.dim, coords)
    }

    /// Every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<PointCloud> {
        PointCloud::new(self.dim, self.coords.iter().map(|c| c * factor).collect())
    }
}

impl FiniteMetric for PointCloud {
    fn len(&self) -> usize {
        PointCloud::len(self)
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    libm::sqrt(sum)
}

/// Whether a distance lies in the closed interval `[r, s]`, up to
/// [`MEMBERSHIP_TOLERANCE`].
#[inline]
pub fn in_annulus(d: f64, r: f64, s: f64) -> bool {
    d >= r * (1.0 - MEMBERSHIP_TOLERANCE) && d <= s * (1.0 + MEMBERSHIP_TOLERANCE)
}

/// Points of an intrinsic annulus around `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusSelection {
    pub center: usize,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Ascending point ids.
    pub members: Vec<usize>,
}

impl AnnulusSelection {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn check_radii(r: f64, s: f64) -> Result<()> {
    if !(r >= 0.0) || !(s >= r) || !s.is_finite() {
        return Err(Error::InvalidRadii { inner: r, outer: s });
    }
    Ok(())
}

pub fn extract_annulus<M: FiniteMetric + ?Sized>(
    metric: &M,
    x: usize,
    r: f64,
    s: f64,
) -> Result<AnnulusSelection> {
    if x >= metric.len() {
        return Err(Error::IndexOutOfRange { index: x, len: metric.len() });
    }
    check_radii(r, s)?;
    let members = (0..metric.len())
        .filter(|&y| in_annulus(metric.distance(x, y), r, s))
        .collect();
    Ok(AnnulusSelection { center: x, inner_radius: r, outer_radius: s, members })
}

pub fn knn_distances<M: FiniteMetric + ?Sized>(metric: &M, x: usize, k: usize) -> Result<Vec<f64>> {
    let n = metric.len();
    if x >= n {
        return Err(Error::IndexOutOfRange { index: x, len: n });
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidK { k, len: n });
    }
    let mut all = Neighbourhood::new(metric, x);
    all.entries.truncate(k);
    Ok(all.entries.into_iter().map(|(d, _)| d).collect())
}

/// All other points of a cloud sorted by `(distance, id)` from a centre.
///
/// Annuli of the centre are contiguous runs of this list, which makes grid
/// scans cheap once the list is built.
#[derive(Debug, Clone)]
pub struct Neighbourhood {
    pub center: usize,
    entries: Vec<(f64, usize)>,
}

impl Neighbourhood {
    pub fn new<M: FiniteMetric + ?Sized>(metric: &M, center: usize) -> Self {
        let mut entries: Vec<(f64, usize)> = (0..metric.len())
            .filter(|&y| y != center)
            .map(|y| (metric.distance(center, y), y))
            .collect();
        entries.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Self { center, entries }
    }

    /// `(distance, id)` pairs, nearest first; the centre itself is excluded.
    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    /// Distance to the `k`-th nearest neighbour (1-based).
    pub fn kth(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.entries.get(i)).map(|e| e.0)
    }

    /// Smallest strictly positive neighbour distance.
    pub fn smallest_nonzero(&self) -> Option<f64> {
        self.entries.iter().map(|e| e.0).find(|&d| d > 0.0)
    }

    /// Position of the annulus `[r, s]` in [`Self::entries`], plus whether the
    /// centre belongs to it. Equal spans mean equal member sets.
    pub fn annulus_span(&self, r: f64, s: f64) -> (bool, usize, usize) {
        let lo = self.entries.partition_point(|e| !in_annulus_lower(e.0, r));
        let hi = self.entries.partition_point(|e| in_annulus_upper(e.0, s));
        (in_annulus(0.0, r, s), lo, hi.max(lo))
    }

    /// Members of the annulus `[r, s]`, in `(distance, id)` order. The centre
    /// is prepended when `r` admits distance 0.
    pub fn annulus(&self, r: f64, s: f64) -> Vec<usize> {
        let lo = self.entries.partition_point(|e| !in_annulus_lower(e.0, r));
        let hi = self.entries.partition_point(|e| in_annulus_upper(e.0, s));
        let mut out = Vec::with_capacity(hi.saturating_sub(lo) + 1);
        if in_annulus(0.0, r, s) {
            out.push(self.center);
        }
        if hi > lo {
            out.extend(self.entries[lo..hi].iter().map(|e| e.1));
        }
        out
    }

    /// Number of annulus members, without collecting them.
    pub fn annulus_len(&self, r: f64, s: f64) -> usize {
        let lo = self.entries.partition_point(|e| !in_annulus_lower(e.0, r));
        let hi = self.entries.partition_point(|e| in_annulus_upper(e.0, s));
        hi.saturating_sub(lo) + usize::from(in_annulus(0.0, r, s))
    }
}

#[inline]
fn in_annulus_lower(d: f64, r: f64) -> bool {
    d >= r * (1.0 - MEMBERSHIP_TOLERANCE)
}

#[inline]
fn in_annulus_upper(d: f64, s: f64) -> bool {
    d <= s * (1.0 + MEMBERSHIP_TOLERANCE)
}

/// Sorts ids by distance from `x`, breaking ties by id.
pub fn compare_by_distance(a: (f64, usize), b: (f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}
