//! Persistent homology over Z/2Z.
//!
//! Diagrams are computed by reducing the coboundary matrix with clearing:
//! dimensions are processed bottom-up and every simplex that already killed a
//! class one degree lower is skipped. The pairing is identical to the one
//! produced by the plain boundary-matrix reduction kept in [`textbook`].

mod reduce;
pub mod textbook;

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::vr::{DistanceMatrix, Filtration, DEFAULT_SIMPLEX_LIMIT};

pub use reduce::{rips_persistence, rips_persistence_with_limit};

/// A half-open persistence interval `[birth, death)`; `death` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub birth: f64,
    pub death: f64,
}

impl Interval {
    pub fn new(birth: f64, death: f64) -> Self {
        Self { birth, death }
    }

    pub fn lifetime(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    /// Whether the class is alive at parameter `t`.
    pub fn contains(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.birth, self.death)
    }
}

/// Multiset of intervals in one homology degree.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pub degree: usize,
    pub intervals: Vec<Interval>,
}

impl PersistenceDiagram {
    pub fn new(degree: usize, mut intervals: Vec<Interval>) -> Self {
        sort_intervals(&mut intervals);
        Self { degree, intervals }
    }

    pub fn empty(degree: usize) -> Self {
        Self { degree, intervals: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn essential(&self) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(|i| i.is_essential())
    }

    pub fn finite(&self) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(|i| !i.is_essential())
    }

    /// Longest finite lifetime, if any finite interval exists.
    pub fn max_finite_lifetime(&self) -> Option<f64> {
        self.finite().map(Interval::lifetime).fold(None, |m, l| Some(m.map_or(l, |m: f64| m.max(l))))
    }

    /// Number of intervals alive at `t`.
    pub fn betti_at(&self, t: f64) -> usize {
        self.intervals.iter().filter(|i| i.contains(t)).count()
    }

    /// Multiplies every birth and death by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.degree,
            self.intervals.iter().map(|i| Interval::new(i.birth * factor, i.death * factor)).collect(),
        )
    }
}

pub(crate) fn sort_intervals(intervals: &mut [Interval]) {
    intervals.sort_unstable_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
}

/// Diagrams for degrees `0..max_dim`.
///
/// Degree `max_dim` is never included: without `(max_dim + 1)`-simplices its
/// classes cannot die.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BarcodeSet {
    pub diagrams: Vec<PersistenceDiagram>,
}

impl BarcodeSet {
    pub fn degrees(&self) -> usize {
        self.diagrams.len()
    }

    pub fn get(&self, degree: usize) -> Result<&PersistenceDiagram> {
        self.diagrams
            .get(degree)
            .ok_or(Error::DegreeOutOfRange { degree, available: self.diagrams.len() })
    }
}

/// Persistence diagrams of a filtration in degrees `0..max_dim`.
pub fn compute_persistence(f: &Filtration) -> BarcodeSet {
    let mut diagrams = reduce::explicit_diagrams(f);
    diagrams.truncate(f.max_dim());
    BarcodeSet { diagrams }
}

/// Diagrams in every degree `0..=max_dim`, including the top degree whose
/// classes never die inside the filtration.
pub fn compute_persistence_all_degrees(f: &Filtration) -> Vec<PersistenceDiagram> {
    reduce::explicit_diagrams(f)
}

/// Shorthand for the Rips persistence of a point set given by distances.
pub fn rips_barcodes(dist: &DistanceMatrix, max_dim: usize, cap: f64) -> Result<BarcodeSet> {
    rips_persistence_with_limit(dist, max_dim, cap, DEFAULT_SIMPLEX_LIMIT)
}

/// Drops short-lived features degree by degree.
///
/// Degree 0 passes unchanged. In degree `i >= 1` every interval whose
/// lifetime is below the longest *finite* lifetime of degree `i - 1` is
/// removed. The lower degree is taken as computed, before its own filtering,
/// so a degree emptied by the filter still shields the one above it. A lower
/// degree without finite intervals gives a threshold of zero.
pub fn apply_lifetime_threshold(b: &BarcodeSet) -> BarcodeSet {
    let mut out: Vec<PersistenceDiagram> = Vec::with_capacity(b.diagrams.len());
    for (i, d) in b.diagrams.iter().enumerate() {
        if i == 0 {
            out.push(d.clone());
            continue;
        }
        let threshold = b.diagrams[i - 1].max_finite_lifetime().unwrap_or(0.0);
        out.push(PersistenceDiagram {
            degree: d.degree,
            intervals: d.intervals.iter().copied().filter(|iv| iv.lifetime() >= threshold).collect(),
        });
    }
    BarcodeSet { diagrams: out }
}

/// Whether the diagram in `degree` has an interval of positive persistence.
pub fn has_nontrivial_ph(b: &BarcodeSet, degree: usize) -> Result<bool> {
    Ok(b.get(degree)?.intervals.iter().any(|i| i.lifetime() > 0.0))
}
