use std::cmp::Ordering;

use super::{Halfspace, Polytope};
use crate::error::{Error, Result};
use crate::search::{canonicalize_points, diameter, lex_cmp, relative_tol};

/// Relative coplanarity/collinearity tolerance (times the point-cloud diameter).
pub const COPLANAR_REL_TOL: f64 = 1e-9;

type P3 = [f64; 3];

fn sub(a: &P3, b: &P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &P3, b: &P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Convex hull of a point cloud in 1, 2 or 3 dimensions.
///
/// Vertices are the sorted extreme points. Flat inputs (all points on a
/// lower-dimensional affine subspace) produce a degenerate polytope without
/// facets or halfspaces.
pub fn hull(points: &[Vec<f64>]) -> Result<Polytope> {
    let Some(first) = points.first() else {
        return Err(Error::Input("hull needs at least one point".into()));
    };
    let dim = first.len();
    if !(1..=3).contains(&dim) {
        return Err(Error::Input(format!("hull supports dimensions 1 to 3, got {dim}")));
    }
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::Dimension {
            what: "hull point",
            expected: dim,
            got: p.len(),
        });
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("hull points must be finite".into()));
    }
    let tol = relative_tol(points);
    let vertices = canonicalize_points(points.to_vec(), tol);
    let plane_tol = COPLANAR_REL_TOL * diameter(&vertices).max(f64::MIN_POSITIVE);
    match dim {
        1 => Ok(hull_1d(vertices)),
        2 => Ok(hull_2d(vertices, plane_tol)),
        _ => Ok(hull_3d(vertices, plane_tol)),
    }
}

fn degenerate(dim: usize, vertices: Vec<Vec<f64>>) -> Polytope {
    Polytope {
        dim,
        vertices,
        facets: None,
        halfspaces: None,
        degenerate: true,
    }
}

fn hull_1d(vertices: Vec<Vec<f64>>) -> Polytope {
    if vertices.len() < 2 {
        return degenerate(1, vertices);
    }
    let (lo, hi) = (vertices[0][0], vertices[1][0]);
    Polytope {
        dim: 1,
        vertices,
        facets: Some(vec![vec![0], vec![1]]),
        halfspaces: Some(vec![
            Halfspace {
                normal: vec![-1.0],
                offset: -lo,
            },
            Halfspace {
                normal: vec![1.0],
                offset: hi,
            },
        ]),
        degenerate: false,
    }
}

fn turn(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn hull_2d(vertices: Vec<Vec<f64>>, tol: f64) -> Polytope {
    if vertices.len() < 3 {
        return degenerate(2, vertices);
    }
    // Monotone chain over the (already sorted) extreme points.
    let n = vertices.len();
    let mut chain: Vec<usize> = Vec::with_capacity(n + 1);
    for pass in 0..2 {
        let start = chain.len();
        let order: Box<dyn Iterator<Item = usize>> = if pass == 0 {
            Box::new(0..n)
        } else {
            Box::new((0..n).rev())
        };
        for i in order {
            while chain.len() >= start + 2 {
                let (a, b) = (chain[chain.len() - 2], chain[chain.len() - 1]);
                let len = norm(&[vertices[b][0] - vertices[a][0], vertices[b][1] - vertices[a][1]]);
                if turn(&vertices[a], &vertices[b], &vertices[i]) <= tol * len {
                    chain.pop();
                } else {
                    break;
                }
            }
            chain.push(i);
        }
        chain.pop();
    }
    if chain.len() < 3 {
        return degenerate(2, vertices);
    }
    // Keep only the cycle's points, in lexicographic order.
    let mut kept = chain.clone();
    kept.sort_unstable();
    let remap = |i: usize| kept.binary_search(&i).expect("chain index");
    let cycle: Vec<usize> = chain.iter().map(|&i| remap(i)).collect();
    let vertices: Vec<Vec<f64>> = kept.iter().map(|&i| vertices[i].clone()).collect();
    // Start the cycle at the lowest index so the output is canonical.
    let start = cycle.iter().position(|&i| i == 0).expect("cycle contains 0");
    let cycle: Vec<usize> = (0..cycle.len()).map(|k| cycle[(start + k) % cycle.len()]).collect();
    let facets: Vec<Vec<usize>> = (0..cycle.len())
        .map(|k| vec![cycle[k], cycle[(k + 1) % cycle.len()]])
        .collect();
    let halfspaces = facets
        .iter()
        .map(|e| {
            let (a, b) = (&vertices[e[0]], &vertices[e[1]]);
            let n = [b[1] - a[1], a[0] - b[0]];
            let len = norm(&n);
            let normal = vec![n[0] / len, n[1] / len];
            let offset = dot(&normal, a);
            Halfspace { normal, offset }
        })
        .collect();
    Polytope {
        dim: 2,
        vertices,
        facets: Some(facets),
        halfspaces: Some(halfspaces),
        degenerate: false,
    }
}

#[derive(Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: P3,
    offset: f64,
}

impl Face {
    fn new(pts: &[P3], v: [usize; 3]) -> Self {
        let n = cross(&sub(&pts[v[1]], &pts[v[0]]), &sub(&pts[v[2]], &pts[v[0]]));
        let len = norm(&n);
        let normal = [n[0] / len, n[1] / len, n[2] / len];
        Face {
            v,
            normal,
            offset: dot(&normal, &pts[v[0]]),
        }
    }

    fn dist(&self, p: &P3) -> f64 {
        dot(&self.normal, p) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        let [a, b, c] = self.v;
        [(a, b), (b, c), (c, a)]
    }
}

fn farthest(candidates: impl Iterator<Item = usize>, score: impl Fn(usize) -> f64) -> Option<(usize, f64)> {
    candidates.fold(None, |best, i| {
        let s = score(i);
        match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((i, s)),
        }
    })
}

fn hull_3d(vertices: Vec<Vec<f64>>, tol: f64) -> Polytope {
    if vertices.len() < 4 {
        return degenerate(3, vertices);
    }
    let pts: Vec<P3> = vertices.iter().map(|p| [p[0], p[1], p[2]]).collect();
    let n = pts.len();

    // Initial tetrahedron from successively farthest points.
    let i0 = 0;
    let (i1, d1) = farthest(1..n, |i| norm(&sub(&pts[i], &pts[i0]))).expect("n ≥ 4");
    if d1 <= tol {
        return degenerate(3, vertices);
    }
    let axis = sub(&pts[i1], &pts[i0]);
    let (i2, d2) = farthest((0..n).filter(|&i| i != i0 && i != i1), |i| {
        norm(&cross(&axis, &sub(&pts[i], &pts[i0]))) / d1
    })
    .expect("n ≥ 4");
    if d2 <= tol {
        return degenerate(3, vertices);
    }
    let base = Face::new(&pts, [i0, i1, i2]);
    let (i3, d3) = farthest((0..n).filter(|&i| ![i0, i1, i2].contains(&i)), |i| base.dist(&pts[i]).abs())
        .expect("n ≥ 4");
    if d3 <= tol {
        return degenerate(3, vertices);
    }
    let mut faces: Vec<Face> = if base.dist(&pts[i3]) > 0.0 {
        vec![
            Face::new(&pts, [i0, i2, i1]),
            Face::new(&pts, [i0, i1, i3]),
            Face::new(&pts, [i1, i2, i3]),
            Face::new(&pts, [i2, i0, i3]),
        ]
    } else {
        vec![
            Face::new(&pts, [i0, i1, i2]),
            Face::new(&pts, [i0, i3, i1]),
            Face::new(&pts, [i1, i3, i2]),
            Face::new(&pts, [i2, i3, i0]),
        ]
    };

    for p in (0..n).filter(|i| ![i0, i1, i2, i3].contains(i)) {
        let visible: Vec<bool> = faces.iter().map(|f| f.dist(&pts[p]) > tol).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut horizon = Vec::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for (a, b) in f.edges() {
                let shared = faces
                    .iter()
                    .zip(&visible)
                    .any(|(g, &gv)| gv && g.edges().contains(&(b, a)));
                if !shared {
                    horizon.push((a, b));
                }
            }
        }
        let mut next: Vec<Face> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| *f)
            .collect();
        next.extend(horizon.into_iter().map(|(a, b)| Face::new(&pts, [a, b, p])));
        faces = next;
    }

    // Drop points no facet references (within tolerance of the surface).
    let mut used: Vec<usize> = faces.iter().flat_map(|f| f.v).collect();
    used.sort_unstable();
    used.dedup();
    let remap = |i: usize| used.binary_search(&i).expect("used index");
    let vertices: Vec<Vec<f64>> = used.iter().map(|&i| vertices[i].clone()).collect();
    let mut facets: Vec<Vec<usize>> = faces
        .iter()
        .map(|f| {
            let v = f.v.map(remap);
            // Rotate so the smallest index leads; orientation is unchanged.
            let k = (0..3).min_by_key(|&k| v[k]).expect("three entries");
            vec![v[k], v[(k + 1) % 3], v[(k + 2) % 3]]
        })
        .collect();
    facets.sort();

    let mut halfspaces: Vec<Halfspace> = Vec::new();
    for f in &faces {
        let h = Halfspace {
            normal: f.normal.to_vec(),
            offset: f.offset,
        };
        let dup = halfspaces.iter().any(|g| {
            g.normal.iter().zip(&h.normal).all(|(a, b)| (a - b).abs() <= 1e-9)
                && (g.offset - h.offset).abs() <= tol
        });
        if !dup {
            halfspaces.push(h);
        }
    }
    halfspaces.sort_by(|a, b| match lex_cmp(&a.normal, &b.normal) {
        Ordering::Equal => a.offset.total_cmp(&b.offset),
        o => o,
    });
    Polytope {
        dim: 3,
        vertices,
        facets: Some(facets),
        halfspaces: Some(halfspaces),
        degenerate: false,
    }
}
