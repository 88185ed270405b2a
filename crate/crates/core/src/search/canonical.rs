use std::cmp::Ordering;

use super::{SearchStats, VertexSet};
use crate::linalg::in_convex_hull;

/// Relative dedup tolerance; multiplied by the point-cloud diameter.
pub const DEDUP_REL_TOL: f64 = 1e-7;

/// Hull-membership tolerance in normalized coordinates.
const EXTREME_TOL: f64 = 1e-9;

pub fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Whether two point sets are equal up to `tol` (max-norm), as sets.
///
/// Each point of `a` must pair with a distinct point of `b`; greedy matching
/// suffices because canonical sets have no two points closer than their
/// dedup tolerance.
pub fn point_sets_match(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|p| {
        let hit = b.iter().enumerate().position(|(j, q)| {
            !used[j] && p.len() == q.len() && p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol)
        });
        match hit {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        }
    })
}

/// Diagonal of the axis-aligned bounding box.
pub fn diameter(points: &[Vec<f64>]) -> f64 {
    let Some(first) = points.first() else { return 0.0 };
    let dim = first.len();
    (0..dim)
        .map(|c| {
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[c]), hi.max(p[c]))
            });
            (hi - lo).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// Dedup tolerance scaled to the size of the point cloud.
pub fn relative_tol(points: &[Vec<f64>]) -> f64 {
    let diam = diameter(points);
    let mag = points
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    DEDUP_REL_TOL * if diam > 0.0 { diam } else { mag.max(1.0) }
}

/// Sorted, deduplicated extreme points of `raw`.
///
/// Sorting happens before deduplication, so the result depends only on the
/// multiset of inputs and not on the order they were produced in.
pub fn canonicalize_points(mut raw: Vec<Vec<f64>>, dedup_tol: f64) -> Vec<Vec<f64>> {
    raw.sort_by(|a, b| lex_cmp(a, b));
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(raw.len());
    for p in raw {
        let dup = kept.iter().any(|k| {
            k.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= dedup_tol
        });
        if !dup {
            kept.push(p);
        }
    }
    if kept.len() <= 2 {
        return kept;
    }

    // Normalize around the centroid before running the membership programs.
    let dim = kept[0].len();
    let centroid: Vec<f64> = (0..dim)
        .map(|c| kept.iter().map(|p| p[c]).sum::<f64>() / kept.len() as f64)
        .collect();
    let scale = kept
        .iter()
        .flat_map(|p| p.iter().zip(&centroid).map(|(v, c)| (v - c).abs()))
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        kept.truncate(1);
        return kept;
    }
    let normalized: Vec<Vec<f64>> = kept
        .iter()
        .map(|p| p.iter().zip(&centroid).map(|(v, c)| (v - c) / scale).collect())
        .collect();

    let extreme: Vec<bool> = (0..normalized.len())
        .map(|i| {
            let others: Vec<&[f64]> = normalized
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| q.as_slice())
                .collect();
            !in_convex_hull(&normalized[i], &others, EXTREME_TOL)
        })
        .collect();
    kept.into_iter()
        .zip(extreme)
        .filter_map(|(p, e)| e.then_some(p))
        .collect()
}

/// Canonical vertex set (sorted, deduplicated, extreme points only).
pub fn canonicalize(raw: Vec<Vec<f64>>, task_dim: usize, dedup_tol: f64) -> VertexSet {
    VertexSet {
        task_dim,
        vertices: canonicalize_points(raw, dedup_tol),
        stats: SearchStats::default(),
    }
}
