//! Persistent intrinsic dimension.
//!
//! Dimension `i` is witnessed at a cell `(r, s)` when the annulus `B_r^s(x)`
//! carries non-trivial persistent homology in degree `i - 1`. The estimate at
//! scale `s` is the largest dimension witnessed by any cell whose outer radius
//! is at most `s`.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::euclidicity::{grid_from_neighbourhood, ParameterGrid};
use crate::exec::Executor;
use crate::persistence::{apply_lifetime_threshold, rips_persistence, BarcodeSet};
use crate::pointcloud::{Neighbourhood, PointCloud};
use crate::vr::DistanceMatrix;

pub const DEFAULT_MAX_SEARCH_DIM: usize = 4;
/// Neighbourhood sizes of the multi-scale sweep.
pub const DEFAULT_K_LIST: [usize; 8] = [25, 50, 75, 100, 125, 150, 175, 200];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PidConfig {
    /// Largest dimension searched; further capped by the ambient dimension.
    pub max_search_dim: usize,
    pub use_threshold: bool,
}

impl Default for PidConfig {
    fn default() -> Self {
        Self { max_search_dim: DEFAULT_MAX_SEARCH_DIM, use_threshold: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PidProfile {
    pub point: usize,
    /// Distinct outer radii of the grid, ascending.
    pub scales: Vec<f64>,
    /// Estimate per scale; non-decreasing.
    pub estimates: Vec<usize>,
    /// Mean of `estimates` for a single grid; see [`pid_batch`] for several.
    pub aggregate: f64,
    /// Dimension bound actually searched.
    pub search_dim: usize,
    /// Set when every annulus of the grid was empty.
    pub all_empty: bool,
}

/// Largest `i <= search_dim` whose degree `i - 1` is non-trivial, or 0.
///
/// Degree 0 counts as non-trivial with at least two intervals, i.e. when the
/// annulus is disconnected at some scale.
pub fn fired_dimension(b: &BarcodeSet, search_dim: usize) -> usize {
    (1..=search_dim.min(b.degrees()))
        .rev()
        .find(|&i| match i {
            1 => b.diagrams[0].len() >= 2,
            _ => b.diagrams[i - 1].intervals.iter().any(|iv| iv.lifetime() > 0.0),
        })
        .unwrap_or(0)
}

/// Dimension witnessed by a single annulus, given by its distances.
pub fn cell_dimension(dist: &DistanceMatrix, cap: f64, search_dim: usize, use_threshold: bool) -> Result<usize> {
    let raw = rips_persistence(dist, search_dim, cap)?;
    let b = if use_threshold { apply_lifetime_threshold(&raw) } else { raw };
    Ok(fired_dimension(&b, search_dim))
}

pub fn compute_pid(
    cloud: &PointCloud,
    x: usize,
    grid: &ParameterGrid,
    max_search_dim: usize,
    use_threshold: bool,
) -> Result<PidProfile> {
    if x >= cloud.len() {
        return Err(Error::IndexOutOfRange { index: x, len: cloud.len() });
    }
    let cfg = PidConfig { max_search_dim, use_threshold };
    pid_with_neighbourhood(cloud, &Neighbourhood::new(cloud, x), grid, &cfg)
}

pub fn pid_with_neighbourhood(
    cloud: &PointCloud,
    nb: &Neighbourhood,
    grid: &ParameterGrid,
    cfg: &PidConfig,
) -> Result<PidProfile> {
    profile(cloud, nb, grid, cfg, &mut HashMap::new())
}

type CellCache = HashMap<(bool, usize, usize), usize>;

fn profile(
    cloud: &PointCloud,
    nb: &Neighbourhood,
    grid: &ParameterGrid,
    cfg: &PidConfig,
    cache: &mut CellCache,
) -> Result<PidProfile> {
    if cfg.max_search_dim == 0 {
        return Err(Error::InvalidParameter("max_search_dim must be at least 1".into()));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid { point: nb.center });
    }
    let search_dim = cfg.max_search_dim.min(cloud.ambient_dim());
    let mut scales = Vec::new();
    let mut estimates = Vec::new();
    let mut running = 0usize;
    let mut seen_members = false;
    let pairs = &grid.pairs;
    let mut start = 0;
    while start < pairs.len() {
        let s = pairs[start].1;
        let end = start + pairs[start..].iter().take_while(|p| p.1 == s).count();
        for &(r, _) in &pairs[start..end] {
            if running == search_dim {
                break;
            }
            let span = nb.annulus_span(r, s);
            if !span.0 && span.1 == span.2 {
                continue;
            }
            seen_members = true;
            let dim = match cache.get(&span) {
                Some(&d) => d,
                None => {
                    let members = nb.annulus(r, s);
                    let dist = DistanceMatrix::from_cloud(cloud, &members);
                    let d = cell_dimension(&dist, grid.vr_cap(s), search_dim, cfg.use_threshold)?;
                    cache.insert(span, d);
                    d
                }
            };
            running = running.max(dim);
        }
        scales.push(s);
        estimates.push(running);
        start = end;
    }
    let aggregate = estimates.iter().sum::<usize>() as f64 / estimates.len() as f64;
    Ok(PidProfile { point: nb.center, scales, estimates, aggregate, search_dim, all_empty: !seen_members })
}

/// Profiles for every query point on its nearest-neighbour grids.
///
/// With several neighbourhood sizes, the reported estimates run over the
/// union of the per-`k` grids, and the aggregate is the mean over `k` of the
/// aggregate of each `k`'s own grid.
pub fn pid_batch<E: Executor>(
    cloud: &PointCloud,
    query_ids: &[usize],
    k_list: &[usize],
    steps: usize,
    cfg: &PidConfig,
    exec: &E,
) -> Vec<Result<PidProfile>> {
    exec.map_indexed(query_ids.len(), |i| {
        let x = query_ids[i];
        if x >= cloud.len() {
            return Err(Error::IndexOutOfRange { index: x, len: cloud.len() });
        }
        if k_list.is_empty() {
            return Err(Error::InvalidParameter("empty k list".into()));
        }
        let nb = Neighbourhood::new(cloud, x);
        let grids = k_list.iter().map(|&k| grid_from_neighbourhood(&nb, k, steps)).collect::<Result<Vec<_>>>()?;
        let mut cache = CellCache::new();
        let mut sum = 0.0;
        for grid in &grids {
            sum += profile(cloud, &nb, grid, cfg, &mut cache)?.aggregate;
        }
        let mut joint = profile(cloud, &nb, &ParameterGrid::union(&grids)?, cfg, &mut cache)?;
        joint.aggregate = sum / grids.len() as f64;
        Ok(joint)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidicity::grid_from_knn;
    use crate::exec::Sequential;
    use crate::persistence::{Interval, PersistenceDiagram};
    use alloc::vec;

    fn circle(count: usize) -> PointCloud {
        let rows: Vec<[f64; 2]> = (0..count)
            .map(|i| {
                let t = core::f64::consts::TAU * i as f64 / count as f64;
                [libm::cos(t), libm::sin(t)]
            })
            .collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    fn set(diagrams: Vec<Vec<(f64, f64)>>) -> BarcodeSet {
        BarcodeSet {
            diagrams: diagrams
                .into_iter()
                .enumerate()
                .map(|(d, iv)| PersistenceDiagram::new(d, iv.into_iter().map(|(b, e)| Interval::new(b, e)).collect()))
                .collect(),
        }
    }

    #[test]
    fn firing_rule() {
        let inf = f64::INFINITY;
        assert_eq!(fired_dimension(&set(vec![vec![(0.0, inf)], vec![]]), 2), 0);
        assert_eq!(fired_dimension(&set(vec![vec![(0.0, 1.0), (0.0, inf)], vec![]]), 2), 1);
        assert_eq!(fired_dimension(&set(vec![vec![(0.0, inf)], vec![(1.0, 2.0)]]), 2), 2);
        // the search bound caps the answer
        assert_eq!(fired_dimension(&set(vec![vec![(0.0, inf)], vec![(1.0, 2.0)]]), 1), 0);
    }

    #[test]
    fn circle_is_one_dimensional() {
        let c = circle(200);
        let g = grid_from_knn(&c, 0, 25, 20).unwrap();
        let p = compute_pid(&c, 0, &g, 4, true).unwrap();
        assert_eq!(p.search_dim, 2);
        assert!(p.estimates.iter().all(|&e| e == 1), "{:?}", p.estimates);
        assert_eq!(p.aggregate, 1.0);
        assert!(!p.all_empty);
    }

    #[test]
    fn empty_annuli_give_zero() {
        let c = PointCloud::new(2, vec![0.0, 0.0, 10.0, 0.0, 10.0, 1.0, 11.0, 0.0]).unwrap();
        let g = ParameterGrid::new(0.5, 1.0, 1.0, 2.0, 3).unwrap();
        let p = compute_pid(&c, 0, &g, 4, true).unwrap();
        assert!(p.all_empty);
        assert!(p.estimates.iter().all(|&e| e == 0));
        assert_eq!(p.aggregate, 0.0);
    }

    #[test]
    fn monotone_and_bounded() {
        let c = circle(150);
        let g = grid_from_knn(&c, 10, 40, 6).unwrap();
        for thr in [true, false] {
            let p = compute_pid(&c, 10, &g, 1, thr).unwrap();
            assert!(p.estimates.windows(2).all(|w| w[0] <= w[1]));
            assert!(p.estimates.iter().all(|&e| e <= 1));
        }
    }

    #[test]
    fn batch_matches_single() {
        let c = circle(120);
        let out = pid_batch(&c, &[7, 500], &[20], 5, &PidConfig::default(), &Sequential);
        let g = grid_from_knn(&c, 7, 20, 5).unwrap();
        assert_eq!(out[0].as_ref().unwrap(), &compute_pid(&c, 7, &g, 4, true).unwrap());
        assert!(out[1].is_err());
        assert!(compute_pid(&c, 7, &g, 0, true).is_err());
    }

    #[test]
    fn several_k_average_their_aggregates() {
        let c = circle(120);
        let cfg = PidConfig { max_search_dim: 2, use_threshold: false };
        let joint = pid_batch(&c, &[3], &[9, 24], 5, &cfg, &Sequential).remove(0).unwrap();
        let single: Vec<f64> = [9, 24]
            .iter()
            .map(|&k| compute_pid(&c, 3, &grid_from_knn(&c, 3, k, 5).unwrap(), 2, false).unwrap().aggregate)
            .collect();
        assert_eq!(joint.aggregate, (single[0] + single[1]) / 2.0);
        let union = ParameterGrid::union(&[grid_from_knn(&c, 3, 9, 5).unwrap(), grid_from_knn(&c, 3, 24, 5).unwrap()]).unwrap();
        assert_eq!(joint.estimates, compute_pid(&c, 3, &union, 2, false).unwrap().estimates);
    }
}
