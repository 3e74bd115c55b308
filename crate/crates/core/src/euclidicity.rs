//! Multi-scale Euclidicity.
//!
//! For a query point `x`, every annulus `B_r^s(x)` of a parameter grid is
//! compared with uniform samples of the Euclidean annulus of the same radii
//! and cardinality in `R^n`. Each comparison is a bottleneck distance between
//! degree `n - 1` Vietoris–Rips diagrams; the score is their mean.

use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::HashMap;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::matching::bottleneck_distance;
use crate::persistence::{rips_persistence, PersistenceDiagram};
use crate::pid::{pid_with_neighbourhood, PidConfig};
use crate::pointcloud::{Neighbourhood, PointCloud};
use crate::sampler::{derive_seed, sample_annulus};
use crate::vr::DistanceMatrix;

pub const DEFAULT_K: usize = 50;
pub const DEFAULT_STEPS: usize = 20;
/// Filtration cap of a cell, as a multiple of its outer radius. An annulus of
/// outer radius `s` has diameter at most `2s`.
pub const VR_CAP_FACTOR: f64 = 2.0;
/// Reports whose fraction of non-empty cells falls below this are flagged.
pub const MIN_COVERAGE: f64 = 0.5;

/// `steps` evenly spaced values from `lo` to `hi`, both endpoints exact.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let last = steps - 1;
            (0..steps)
                .map(|i| if i == last { hi } else { lo + (hi - lo) * (i as f64 / last as f64) })
                .collect()
        }
    }
}

/// The `(r, s)` cells scanned for one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterGrid {
    /// Distinct cells with `r < s`, sorted by `(s, r)`.
    pub pairs: Vec<(f64, f64)>,
    pub r_min: f64,
    pub r_max: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub steps: usize,
    pub vr_cap_factor: f64,
}

fn cmp_cell(a: &(f64, f64), b: &(f64, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0))
}

impl ParameterGrid {
    /// Product of `steps` inner radii in `[r_min, r_max]` and `steps` outer
    /// radii in `[s_min, s_max]`, keeping cells with `r < s`.
    pub fn new(r_min: f64, r_max: f64, s_min: f64, s_max: f64, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidParameter(alloc::format!("steps must be at least 2, got {steps}")));
        }
        let finite = [r_min, r_max, s_min, s_max].iter().all(|v| v.is_finite());
        if !finite || !(r_min >= 0.0) || r_max < r_min || s_max < s_min || r_max > s_max || r_min > s_min {
            return Err(Error::InvalidParameter(alloc::format!(
                "radii must satisfy 0 <= r_min <= r_max <= s_max and r_min <= s_min <= s_max, got \
                 r in [{r_min}, {r_max}], s in [{s_min}, {s_max}]"
            )));
        }
        let rs = linspace(r_min, r_max, steps);
        let ss = linspace(s_min, s_max, steps);
        let pairs = ss.iter().flat_map(|&s| rs.iter().map(move |&r| (r, s))).collect();
        let mut grid = Self { pairs, r_min, r_max, s_min, s_max, steps, vr_cap_factor: VR_CAP_FACTOR };
        grid.normalise();
        Ok(grid)
    }

    /// A grid of one cell.
    pub fn single(r: f64, s: f64) -> Result<Self> {
        if !(r >= 0.0) || !(s > r) || !s.is_finite() {
            return Err(Error::InvalidRadii { inner: r, outer: s });
        }
        Ok(Self { pairs: alloc::vec![(r, s)], r_min: r, r_max: r, s_min: s, s_max: s, steps: 1, vr_cap_factor: VR_CAP_FACTOR })
    }

    /// All cells of several grids, duplicates removed.
    pub fn union(grids: &[ParameterGrid]) -> Result<Self> {
        let first = grids.first().ok_or_else(|| Error::InvalidParameter("union of no grids".into()))?;
        let mut out = first.clone();
        for g in &grids[1..] {
            out.pairs.extend_from_slice(&g.pairs);
            out.r_min = out.r_min.min(g.r_min);
            out.r_max = out.r_max.max(g.r_max);
            out.s_min = out.s_min.min(g.s_min);
            out.s_max = out.s_max.max(g.s_max);
            out.steps = out.steps.max(g.steps);
        }
        out.normalise();
        Ok(out)
    }

    fn normalise(&mut self) {
        self.pairs.retain(|&(r, s)| r < s);
        self.pairs.sort_unstable_by(cmp_cell);
        self.pairs.dedup();
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct outer radii, ascending.
    pub fn outer_scales(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.pairs.iter().map(|p| p.1).collect();
        s.dedup();
        s
    }

    /// Diameter cap for the cell with outer radius `s`.
    pub fn vr_cap(&self, s: f64) -> f64 {
        self.vr_cap_factor * s
    }

    /// The same grid with every radius multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut g = self.clone();
        g.pairs.iter_mut().for_each(|p| *p = (p.0 * factor, p.1 * factor));
        g.r_min *= factor;
        g.r_max *= factor;
        g.s_min *= factor;
        g.s_max *= factor;
        g
    }
}

/// Grid from nearest-neighbour distances: `s_max` is the distance to the
/// `k`-th neighbour, `r_max = s_min` the distance to the `⌊k/3⌋`-th, and
/// `r_min` the smallest non-zero neighbour distance.
pub fn grid_from_knn(cloud: &PointCloud, x: usize, k: usize, steps: usize) -> Result<ParameterGrid> {
    if x >= cloud.len() {
        return Err(Error::IndexOutOfRange { index: x, len: cloud.len() });
    }
    grid_from_neighbourhood(&Neighbourhood::new(cloud, x), k, steps)
}

pub fn grid_from_neighbourhood(nb: &Neighbourhood, k: usize, steps: usize) -> Result<ParameterGrid> {
    let len = nb.entries().len() + 1;
    if k < 3 || k >= len {
        return Err(Error::InvalidK { k, len });
    }
    let r_min = nb.smallest_nonzero().ok_or(Error::DegenerateNeighbourhood { point: nb.center })?;
    let s_max = nb.kth(k).unwrap_or(0.0);
    let mid = nb.kth(k / 3).unwrap_or(0.0);
    if s_max < r_min {
        return Err(Error::DegenerateNeighbourhood { point: nb.center });
    }
    // duplicates can put the ⌊k/3⌋-th neighbour at distance 0
    let mid = mid.max(r_min);
    let grid = ParameterGrid::new(r_min, mid, mid, s_max, steps)?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid { point: nb.center });
    }
    Ok(grid)
}

/// Bottleneck distances of one grid cell, one per model draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub inner: f64,
    pub outer: f64,
    pub annulus_size: usize,
    pub distances: Vec<f64>,
    /// Mean of `distances`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EuclidicityReport {
    pub point: usize,
    pub intrinsic_dim: usize,
    /// Mean over every scored `(cell, draw)` combination.
    pub score: f64,
    /// Scored cells in grid order; cells with empty annuli are absent.
    pub per_pair: Vec<PairScore>,
    pub model_samples: usize,
    pub seed: u64,
    pub grid_cells: usize,
    pub coverage: f64,
    pub low_coverage: bool,
    pub r_min: f64,
    pub r_max: f64,
    pub s_min: f64,
    pub s_max: f64,
}

impl EuclidicityReport {
    /// Mean of the per-cell values.
    pub fn recomputed_score(&self) -> f64 {
        mean(self.per_pair.iter().map(|p| p.value))
    }

    pub fn skipped(&self) -> usize {
        self.grid_cells - self.per_pair.len()
    }
}

fn mean(it: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = it.len();
    if n == 0 {
        return 0.0;
    }
    it.sum::<f64>() / n as f64
}

/// What a model space is asked for: a point set for one cell and draw.
#[derive(Debug, Clone, Copy)]
pub struct ModelRequest<'a> {
    pub inner: f64,
    pub outer: f64,
    /// Ids of the intrinsic annulus being compared.
    pub members: &'a [usize],
    pub draw: usize,
    pub seed: u64,
}

/// Seed of the model draw for cell `(r, s)` of point `x`. It does not depend
/// on the grid the cell belongs to.
pub fn model_seed(seed: u64, x: usize, draw: usize, r: f64, s: f64) -> u64 {
    derive_seed(seed, &[x as u64, draw as u64, r.to_bits(), s.to_bits()])
}

/// Uniform sample of the Euclidean annulus in `R^n` matching the request.
pub fn euclidean_model(n: usize, req: &ModelRequest<'_>) -> Result<DistanceMatrix> {
    let sample = sample_annulus(n, req.inner, req.outer, req.members.len(), req.seed)?;
    Ok(DistanceMatrix::from_points(n, &sample.points))
}

/// Thresholded Rips diagram of one degree.
pub fn local_diagram(dist: &DistanceMatrix, degree: usize, cap: f64) -> Result<PersistenceDiagram> {
    let b = rips_persistence(dist, degree + 1, cap)?;
    Ok(b.get(degree)?.clone())
}

/// Intrinsic diagrams keyed by annulus span; equal spans share a diagram.
struct IntrinsicCache<'a> {
    cloud: &'a PointCloud,
    degree: usize,
    map: HashMap<(bool, usize, usize), PersistenceDiagram>,
}

impl<'a> IntrinsicCache<'a> {
    fn new(cloud: &'a PointCloud, degree: usize) -> Self {
        Self { cloud, degree, map: HashMap::new() }
    }

    fn get(&mut self, members: &[usize], span: (bool, usize, usize), cap: f64) -> Result<&PersistenceDiagram> {
        // the cap never binds inside an annulus, so the diagram depends on
        // the member set only
        if !self.map.contains_key(&span) {
            let d = local_diagram(&DistanceMatrix::from_cloud(self.cloud, members), self.degree, cap)?;
            self.map.insert(span, d);
        }
        Ok(&self.map[&span])
    }
}

fn check_query(cloud: &PointCloud, x: usize, n: usize, grid: &ParameterGrid) -> Result<()> {
    if x >= cloud.len() {
        return Err(Error::IndexOutOfRange { index: x, len: cloud.len() });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("intrinsic dimension must be at least 1".into()));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid { point: x });
    }
    Ok(())
}

/// Euclidicity of point `x` against uniform samples of Euclidean annuli in
/// `R^n`, averaged over `m` model draws per cell.
pub fn euclidicity_score(
    cloud: &PointCloud,
    x: usize,
    n: usize,
    grid: &ParameterGrid,
    m: usize,
    seed: u64,
) -> Result<EuclidicityReport> {
    euclidicity_score_with(cloud, x, n, grid, m, seed, |req| euclidean_model(n, req))
}

/// [`euclidicity_score`] with a caller-supplied model space.
pub fn euclidicity_score_with<F>(
    cloud: &PointCloud,
    x: usize,
    n: usize,
    grid: &ParameterGrid,
    m: usize,
    seed: u64,
    model: F,
) -> Result<EuclidicityReport>
where
    F: FnMut(&ModelRequest<'_>) -> Result<DistanceMatrix>,
{
    check_query(cloud, x, n, grid)?;
    let nb = Neighbourhood::new(cloud, x);
    score_in_neighbourhood(cloud, &nb, n, grid, m, seed, model)
}

fn score_in_neighbourhood<F>(
    cloud: &PointCloud,
    nb: &Neighbourhood,
    n: usize,
    grid: &ParameterGrid,
    m: usize,
    seed: u64,
    mut model: F,
) -> Result<EuclidicityReport>
where
    F: FnMut(&ModelRequest<'_>) -> Result<DistanceMatrix>,
{
    let x = nb.center;
    if m == 0 {
        return Err(Error::InvalidParameter("at least one model sample is required".into()));
    }
    let degree = n - 1;
    let mut cache = IntrinsicCache::new(cloud, degree);
    let mut per_pair = Vec::new();
    for &(r, s) in &grid.pairs {
        let members = nb.annulus(r, s);
        if members.is_empty() {
            continue;
        }
        let cap = grid.vr_cap(s);
        let intrinsic = cache.get(&members, nb.annulus_span(r, s), cap)?.clone();
        let mut distances = Vec::with_capacity(m);
        for draw in 0..m {
            let req = ModelRequest { inner: r, outer: s, members: &members, draw, seed: model_seed(seed, x, draw, r, s) };
            let modelled = local_diagram(&model(&req)?, degree, cap)?;
            distances.push(bottleneck_distance(&intrinsic, &modelled));
        }
        let value = mean(distances.iter().copied());
        per_pair.push(PairScore { inner: r, outer: s, annulus_size: members.len(), distances, value });
    }
    if per_pair.is_empty() {
        return Err(Error::EmptyGrid { point: x });
    }
    let coverage = per_pair.len() as f64 / grid.len() as f64;
    let mut report = EuclidicityReport {
        point: x,
        intrinsic_dim: n,
        score: 0.0,
        per_pair,
        model_samples: m,
        seed,
        grid_cells: grid.len(),
        coverage,
        low_coverage: coverage < MIN_COVERAGE,
        r_min: grid.r_min,
        r_max: grid.r_max,
        s_min: grid.s_min,
        s_max: grid.s_max,
    };
    report.score = report.recomputed_score();
    Ok(report)
}

/// Pairwise distances between `m` Euclidean model samples of the annuli of
/// `x`: entry `(j, k)` is the mean over non-empty cells of the bottleneck
/// distance between draws `j` and `k`. The draws are the ones
/// [`euclidicity_score`] uses with the same seed.
pub fn baseline_pairwise(
    cloud: &PointCloud,
    x: usize,
    n: usize,
    grid: &ParameterGrid,
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_query(cloud, x, n, grid)?;
    if m < 2 {
        return Err(Error::InvalidParameter(alloc::format!("baseline needs at least 2 model samples, got {m}")));
    }
    let nb = Neighbourhood::new(cloud, x);
    let mut sums = alloc::vec![alloc::vec![0.0; m]; m];
    let mut cells = 0usize;
    for &(r, s) in &grid.pairs {
        let members = nb.annulus(r, s);
        if members.is_empty() {
            continue;
        }
        let cap = grid.vr_cap(s);
        let diagrams = (0..m)
            .map(|draw| {
                let req = ModelRequest { inner: r, outer: s, members: &members, draw, seed: model_seed(seed, x, draw, r, s) };
                local_diagram(&euclidean_model(n, &req)?, n - 1, cap)
            })
            .collect::<Result<Vec<_>>>()?;
        for j in 0..m {
            for k in j + 1..m {
                let d = bottleneck_distance(&diagrams[j], &diagrams[k]);
                sums[j][k] += d;
                sums[k][j] += d;
            }
        }
        cells += 1;
    }
    if cells == 0 {
        return Err(Error::EmptyGrid { point: x });
    }
    sums.iter_mut().flatten().for_each(|v| *v /= cells as f64);
    Ok(sums)
}

/// Mean of the off-diagonal entries of a [`baseline_pairwise`] matrix.
pub fn baseline_mean(matrix: &[Vec<f64>]) -> f64 {
    let m = matrix.len();
    if m < 2 {
        return 0.0;
    }
    let total: f64 = matrix.iter().enumerate().map(|(j, row)| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v).sum::<f64>()).sum();
    total / (m * (m - 1)) as f64
}

/// Euclidicity restricted to the single cell `(r, s)`.
pub fn single_scale_score(
    cloud: &PointCloud,
    x: usize,
    n: usize,
    r: f64,
    s: f64,
    m: usize,
    seed: u64,
) -> Result<f64> {
    Ok(euclidicity_score(cloud, x, n, &ParameterGrid::single(r, s)?, m, seed)?.score)
}

/// Global radii for single-scale runs: medians over the query points of the
/// `⌊k/3⌋`-th and `k`-th neighbour distances.
pub fn default_single_scale(cloud: &PointCloud, query_ids: &[usize], k: usize) -> Result<(f64, f64)> {
    if query_ids.is_empty() {
        return Err(Error::InvalidParameter("no query points".into()));
    }
    if k < 3 || k >= cloud.len() {
        return Err(Error::InvalidK { k, len: cloud.len() });
    }
    let mut inner = Vec::with_capacity(query_ids.len());
    let mut outer = Vec::with_capacity(query_ids.len());
    for &x in query_ids {
        let d = cloud.knn_distances(x, k)?;
        inner.push(d[k / 3 - 1]);
        outer.push(d[k - 1]);
    }
    let (r, s) = (median(&mut inner), median(&mut outer));
    if !(s > r) {
        return Err(Error::InvalidRadii { inner: r, outer: s });
    }
    Ok((r, s))
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Divides every score by the largest one; all-zero input is left as is.
pub fn normalize_by_max(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        scores.iter_mut().for_each(|s| *s /= max);
    }
}

/// Where the intrinsic dimension of each query point comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DimensionSource {
    Fixed(usize),
    /// Rounded persistent intrinsic dimension on the same grid, at least 1.
    Pid { max_search_dim: usize },
    /// One value per query point, in query order.
    PerPoint(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclidicityConfig {
    pub k: usize,
    pub steps: usize,
    pub model_samples: usize,
    pub seed: u64,
}

impl Default for EuclidicityConfig {
    fn default() -> Self {
        Self { k: DEFAULT_K, steps: DEFAULT_STEPS, model_samples: 1, seed: 0 }
    }
}

/// Euclidicity of every query point; failures are reported per point.
pub fn euclidicity_batch<E: Executor>(
    cloud: &PointCloud,
    query_ids: &[usize],
    source: &DimensionSource,
    config: &EuclidicityConfig,
    exec: &E,
) -> Vec<Result<EuclidicityReport>> {
    run_batch(cloud, query_ids, source, config, None, exec)
}

/// Scores every query point on the single cell `(inner, outer)`. A PID
/// dimension source still estimates dimensions on each point's own grid.
pub fn single_scale_batch<E: Executor>(
    cloud: &PointCloud,
    query_ids: &[usize],
    source: &DimensionSource,
    inner: f64,
    outer: f64,
    config: &EuclidicityConfig,
    exec: &E,
) -> Vec<Result<EuclidicityReport>> {
    match ParameterGrid::single(inner, outer) {
        Ok(cell) => run_batch(cloud, query_ids, source, config, Some(&cell), exec),
        Err(e) => query_ids.iter().map(|_| Err(e.clone())).collect(),
    }
}

fn run_batch<E: Executor>(
    cloud: &PointCloud,
    query_ids: &[usize],
    source: &DimensionSource,
    config: &EuclidicityConfig,
    fixed_grid: Option<&ParameterGrid>,
    exec: &E,
) -> Vec<Result<EuclidicityReport>> {
    if let DimensionSource::PerPoint(dims) = source {
        if dims.len() != query_ids.len() {
            let e = Error::InvalidParameter(alloc::format!(
                "{} dimensions given for {} query points",
                dims.len(),
                query_ids.len()
            ));
            return query_ids.iter().map(|_| Err(e.clone())).collect();
        }
    }
    exec.map_indexed(query_ids.len(), |i| {
        let x = query_ids[i];
        if x >= cloud.len() {
            return Err(Error::IndexOutOfRange { index: x, len: cloud.len() });
        }
        let nb = Neighbourhood::new(cloud, x);
        let knn_grid = match (fixed_grid, source) {
            (Some(_), DimensionSource::Fixed(_) | DimensionSource::PerPoint(_)) => None,
            _ => Some(grid_from_neighbourhood(&nb, config.k, config.steps)?),
        };
        let n = match source {
            DimensionSource::Fixed(n) => *n,
            DimensionSource::PerPoint(dims) => dims[i],
            DimensionSource::Pid { max_search_dim } => {
                let cfg = PidConfig { max_search_dim: *max_search_dim, use_threshold: true };
                let grid = knn_grid.as_ref().expect("PID needs the neighbour grid");
                let profile = pid_with_neighbourhood(cloud, &nb, grid, &cfg)?;
                (libm::round(profile.aggregate) as usize).max(1)
            }
        };
        let grid = fixed_grid.or(knn_grid.as_ref()).expect("a grid is always available");
        check_query(cloud, x, n, grid)?;
        score_in_neighbourhood(cloud, &nb, n, grid, config.model_samples, config.seed, |req| euclidean_model(n, req))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use alloc::vec;

    fn line(n: usize) -> PointCloud {
        PointCloud::new(1, (0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn knn_grid_on_a_line() {
        let g = grid_from_knn(&line(61), 0, 9, 3).unwrap();
        assert_eq!((g.r_min, g.r_max, g.s_min, g.s_max), (1.0, 3.0, 3.0, 9.0));
        assert_eq!(g.len(), 8);
        assert!(!g.pairs.contains(&(3.0, 3.0)));
        assert!(g.pairs.contains(&(1.0, 3.0)) && g.pairs.contains(&(3.0, 9.0)));
        assert_eq!(g.outer_scales(), vec![3.0, 6.0, 9.0]);
    }

    #[test]
    fn small_grid() {
        let g = grid_from_knn(&line(5), 0, 3, 2).unwrap();
        // r in {1, 1}, s in {1, 3}: only (1, 3) survives
        assert_eq!(g.pairs, vec![(1.0, 3.0)]);
    }

    #[test]
    fn grid_errors() {
        assert!(matches!(grid_from_knn(&line(5), 0, 5, 2), Err(Error::InvalidK { .. })));
        assert!(matches!(grid_from_knn(&line(5), 0, 2, 2), Err(Error::InvalidK { .. })));
        assert!(grid_from_knn(&line(10), 0, 3, 1).is_err());
        let dup = PointCloud::new(1, vec![0.0; 6]).unwrap();
        assert_eq!(grid_from_knn(&dup, 2, 3, 2), Err(Error::DegenerateNeighbourhood { point: 2 }));
    }

    #[test]
    fn union_deduplicates() {
        let a = ParameterGrid::new(1.0, 2.0, 2.0, 4.0, 3).unwrap();
        let b = ParameterGrid::new(1.0, 2.0, 2.0, 6.0, 3).unwrap();
        let u = ParameterGrid::union(&[a.clone(), b]).unwrap();
        assert_eq!(u.s_max, 6.0);
        let mut sorted = u.pairs.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), u.len());
        assert!(a.pairs.iter().all(|p| u.pairs.contains(p)));
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.1, 0.7, 7);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[6], 0.7);
        assert_eq!(linspace(2.0, 2.0, 3), vec![2.0; 3]);
    }

    fn circle(count: usize) -> PointCloud {
        let rows: Vec<[f64; 2]> = (0..count)
            .map(|i| {
                let t = core::f64::consts::TAU * i as f64 / count as f64;
                [libm::cos(t), libm::sin(t)]
            })
            .collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    #[test]
    fn identical_model_scores_zero() {
        let c = circle(100);
        let g = grid_from_knn(&c, 0, 20, 5).unwrap();
        let rep = euclidicity_score_with(&c, 0, 1, &g, 2, 5, |req| Ok(DistanceMatrix::from_cloud(&c, req.members))).unwrap();
        assert_eq!(rep.score, 0.0);
        assert_eq!(rep.coverage, 1.0);
        assert!(rep.per_pair.iter().all(|p| p.distances == vec![0.0, 0.0]));
    }

    #[test]
    fn report_is_mean_of_cells() {
        let c = circle(120);
        let g = grid_from_knn(&c, 3, 20, 4).unwrap();
        let rep = euclidicity_score(&c, 3, 1, &g, 3, 11).unwrap();
        assert!((rep.score - rep.recomputed_score()).abs() <= 1e-12);
        let all: Vec<f64> = rep.per_pair.iter().flat_map(|p| p.distances.iter().copied()).collect();
        assert!((rep.score - all.iter().sum::<f64>() / all.len() as f64).abs() <= 1e-12);
        assert!(all.iter().all(|&d| d >= 0.0));
        assert_eq!(rep, euclidicity_score(&c, 3, 1, &g, 3, 11).unwrap());
    }

    #[test]
    fn single_cell_matches_grid() {
        let c = circle(80);
        let (r, s) = (0.1, 0.4);
        let a = single_scale_score(&c, 0, 2, r, s, 2, 9).unwrap();
        let b = euclidicity_score(&c, 0, 2, &ParameterGrid::single(r, s).unwrap(), 2, 9).unwrap();
        assert_eq!(a, b.score);
        let cfg = EuclidicityConfig { model_samples: 2, seed: 9, ..EuclidicityConfig::default() };
        let batch = single_scale_batch(&c, &[0], &DimensionSource::Fixed(2), r, s, &cfg, &Sequential);
        assert_eq!(batch[0].as_ref().unwrap(), &b);
    }

    #[test]
    fn baseline_shape() {
        let c = circle(100);
        let g = grid_from_knn(&c, 0, 20, 3).unwrap();
        let m = baseline_pairwise(&c, 0, 1, &g, 3, 4).unwrap();
        for j in 0..3 {
            assert_eq!(m[j][j], 0.0);
            for k in 0..3 {
                assert_eq!(m[j][k], m[k][j]);
            }
        }
        assert!(baseline_pairwise(&c, 0, 1, &g, 1, 4).is_err());
    }

    #[test]
    fn empty_annuli_are_skipped() {
        // x = 0 has neighbours at 1, 2, 10, 11: the cell (3, 9) is empty
        let c = PointCloud::new(1, vec![0.0, 1.0, 2.0, 10.0, 11.0]).unwrap();
        let g = ParameterGrid::new(1.0, 3.0, 3.0, 9.0, 2).unwrap();
        let rep = euclidicity_score(&c, 0, 1, &g, 1, 0).unwrap();
        assert_eq!(rep.grid_cells, 3);
        assert_eq!(rep.skipped(), 1);
        let far = ParameterGrid::single(3.0, 9.0).unwrap();
        assert_eq!(euclidicity_score(&c, 0, 1, &far, 1, 0), Err(Error::EmptyGrid { point: 0 }));
    }

    #[test]
    fn batch_singleton_and_errors() {
        let c = circle(90);
        let cfg = EuclidicityConfig { k: 15, steps: 3, model_samples: 1, seed: 3 };
        let out = euclidicity_batch(&c, &[4, 1000], &DimensionSource::Fixed(1), &cfg, &Sequential);
        let g = grid_from_knn(&c, 4, 15, 3).unwrap();
        assert_eq!(out[0].as_ref().unwrap(), &euclidicity_score(&c, 4, 1, &g, 1, 3).unwrap());
        assert!(out[1].is_err());
        let pid = euclidicity_batch(&c, &[4], &DimensionSource::Pid { max_search_dim: 4 }, &cfg, &Sequential);
        assert_eq!(pid[0].as_ref().unwrap().intrinsic_dim, 1);
    }

    #[test]
    fn max_normalisation() {
        let mut s = vec![1.0, 4.0, 2.0];
        normalize_by_max(&mut s);
        assert_eq!(s, vec![0.25, 1.0, 0.5]);
        let mut z = vec![0.0, 0.0];
        normalize_by_max(&mut z);
        assert_eq!(z, vec![0.0, 0.0]);
    }
}
