//! Bottleneck distance between persistence diagrams.
//!
//! Points may be matched to each other at their `L∞` distance or to the
//! diagonal at half their lifetime. Essential intervals (infinite death) are
//! matched among themselves by sorted birth; unequal counts give `+∞`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::persistence::{Interval, PersistenceDiagram};

/// Largest total point count accepted by [`bottleneck_oracle`].
pub const ORACLE_LIMIT: usize = 8;

#[inline]
fn linf(a: &Interval, b: &Interval) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

#[inline]
fn to_diagonal(a: &Interval) -> f64 {
    (a.death - a.birth) / 2.0
}

fn split(d: &PersistenceDiagram) -> (Vec<Interval>, Vec<f64>) {
    let finite = d.finite().copied().collect();
    let mut essential: Vec<f64> = d.essential().map(|i| i.birth).collect();
    essential.sort_unstable_by(f64::total_cmp);
    (finite, essential)
}

/// Exact bottleneck distance.
///
/// The finite part is solved by binary search over all candidate costs with
/// a Hopcroft–Karp perfect-matching test at each probe.
pub fn bottleneck_distance(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    let (fa, ea) = split(a);
    let (fb, eb) = split(b);
    if ea.len() != eb.len() {
        return f64::INFINITY;
    }
    let essential = ea.iter().zip(&eb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    essential.max(finite_bottleneck(&fa, &fb))
}

fn finite_bottleneck(a: &[Interval], b: &[Interval]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut candidates: Vec<f64> = Vec::with_capacity(a.len() * b.len() + a.len() + b.len() + 1);
    candidates.push(0.0);
    candidates.extend(a.iter().map(to_diagonal));
    candidates.extend(b.iter().map(to_diagonal));
    for x in a {
        for y in b {
            candidates.push(linf(x, y));
        }
    }
    candidates.sort_unstable_by(f64::total_cmp);
    candidates.dedup();

    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching_exists(a, b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Whether every point can be matched at cost `<= delta`.
///
/// Left vertices are the points of `a` followed by diagonal copies of `b`;
/// right vertices are the points of `b` followed by diagonal copies of `a`.
fn perfect_matching_exists(a: &[Interval], b: &[Interval], delta: f64) -> bool {
    let (na, nb) = (a.len(), b.len());
    let size = na + nb;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            if linf(x, y) <= delta {
                adj[i].push(j);
            }
        }
        if to_diagonal(x) <= delta {
            adj[i].push(nb + i);
        }
    }
    for (j, y) in b.iter().enumerate() {
        let row = &mut adj[na + j];
        if to_diagonal(y) <= delta {
            row.push(j);
        }
        row.extend(nb..nb + na);
    }
    hopcroft_karp(&adj, size) == size
}

/// Maximum matching size of a bipartite graph with `right` right vertices.
pub(crate) fn hopcroft_karp(adj: &[Vec<usize>], right: usize) -> usize {
    const NONE: usize = usize::MAX;
    let left = adj.len();
    let mut match_l = vec![NONE; left];
    let mut match_r = vec![NONE; right];
    let mut dist = vec![0usize; left];
    let mut queue: Vec<usize> = Vec::with_capacity(left);
    let mut matched = 0;

    loop {
        // BFS layering from free left vertices
        queue.clear();
        let mut found = false;
        for u in 0..left {
            if match_l[u] == NONE {
                dist[u] = 0;
                queue.push(u);
            } else {
                dist[u] = NONE;
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &v in &adj[u] {
                let w = match_r[v];
                if w == NONE {
                    found = true;
                } else if dist[w] == NONE {
                    dist[w] = dist[u] + 1;
                    queue.push(w);
                }
            }
        }
        if !found {
            return matched;
        }
        let mut cursor = vec![0usize; left];
        for u in 0..left {
            if match_l[u] == NONE && augment(u, adj, &mut match_l, &mut match_r, &mut dist, &mut cursor) {
                matched += 1;
            }
        }
    }

    fn augment(
        u: usize,
        adj: &[Vec<usize>],
        match_l: &mut [usize],
        match_r: &mut [usize],
        dist: &mut [usize],
        cursor: &mut [usize],
    ) -> bool {
        while cursor[u] < adj[u].len() {
            let v = adj[u][cursor[u]];
            cursor[u] += 1;
            let w = match_r[v];
            if w == NONE || (dist[w] == dist[u] + 1 && augment(w, adj, match_l, match_r, dist, cursor)) {
                match_l[u] = v;
                match_r[v] = u;
                return true;
            }
        }
        dist[u] = NONE;
        false
    }
}

/// Bottleneck distance by exhaustive enumeration of all matchings.
///
/// Exponential; restricted to at most [`ORACLE_LIMIT`] points in total.
pub fn bottleneck_oracle(a: &PersistenceDiagram, b: &PersistenceDiagram) -> Result<f64> {
    let total = a.len() + b.len();
    if total > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge { limit: ORACLE_LIMIT, found: total });
    }
    let fa: Vec<Interval> = a.finite().copied().collect();
    let fb: Vec<Interval> = b.finite().copied().collect();
    let ea: Vec<f64> = a.essential().map(|i| i.birth).collect();
    let eb: Vec<f64> = b.essential().map(|i| i.birth).collect();
    if ea.len() != eb.len() {
        return Ok(f64::INFINITY);
    }
    let mut used = vec![false; eb.len()];
    let essential = best_permutation(&ea, &eb, 0, &mut used, 0.0);
    let mut used = vec![false; fb.len()];
    let finite = best_partial(&fa, &fb, 0, &mut used, 0.0);
    Ok(essential.max(finite))
}

fn best_permutation(a: &[f64], b: &[f64], i: usize, used: &mut [bool], cost: f64) -> f64 {
    if i == a.len() {
        return cost;
    }
    let mut best = f64::INFINITY;
    for j in 0..b.len() {
        if !used[j] {
            used[j] = true;
            best = best.min(best_permutation(a, b, i + 1, used, cost.max((a[i] - b[j]).abs())));
            used[j] = false;
        }
    }
    best
}

/// Every point of `a` goes to an unused point of `b` or to the diagonal;
/// leftover points of `b` go to the diagonal.
fn best_partial(a: &[Interval], b: &[Interval], i: usize, used: &mut [bool], cost: f64) -> f64 {
    if i == a.len() {
        return b
            .iter()
            .zip(used.iter())
            .filter(|(_, &u)| !u)
            .fold(cost, |c, (y, _)| c.max(to_diagonal(y)));
    }
    let mut best = best_partial(a, b, i + 1, used, cost.max(to_diagonal(&a[i])));
    for j in 0..b.len() {
        if !used[j] {
            used[j] = true;
            best = best.min(best_partial(a, b, i + 1, used, cost.max(linf(&a[i], &b[j]))));
            used[j] = false;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(points: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::new(1, points.iter().map(|&(b, d)| Interval::new(b, d)).collect())
    }

    #[test]
    fn spec_examples() {
        let a = diag(&[(0.0, 4.0), (1.0, 2.0)]);
        assert_eq!(bottleneck_distance(&a, &a), 0.0);
        assert_eq!(bottleneck_distance(&diag(&[(0.0, 2.0)]), &diag(&[])), 1.0);
        let b = diag(&[(0.0, 5.0)]);
        assert_eq!(bottleneck_distance(&a, &b), 1.0);
        assert_eq!(bottleneck_oracle(&a, &b).unwrap(), 1.0);
        assert_eq!(bottleneck_oracle(&a, &a).unwrap(), 0.0);
        assert_eq!(bottleneck_oracle(&diag(&[(0.0, 2.0)]), &diag(&[])).unwrap(), 1.0);
    }

    #[test]
    fn essential_classes() {
        let inf = f64::INFINITY;
        let a = diag(&[(0.0, inf)]);
        assert_eq!(bottleneck_distance(&a, &diag(&[])), inf);
        assert_eq!(bottleneck_oracle(&a, &diag(&[])).unwrap(), inf);
        let b = diag(&[(0.5, inf), (0.0, 0.2)]);
        assert_eq!(bottleneck_distance(&a, &b), 0.5);
        assert_eq!(bottleneck_oracle(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn empty_diagrams() {
        assert_eq!(bottleneck_distance(&diag(&[]), &diag(&[])), 0.0);
    }

    #[test]
    fn oracle_size_guard() {
        let big = diag(&[(0.0, 1.0); 5]);
        assert!(matches!(bottleneck_oracle(&big, &big), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn matching_size() {
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        assert_eq!(hopcroft_karp(&adj, 3), 3);
        let adj = vec![vec![0], vec![0]];
        assert_eq!(hopcroft_karp(&adj, 1), 1);
    }
}
