//! Convex hulls, Minkowski sums, intersections and manipulability ellipsoids.

mod ellipsoid;
mod hull;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use ellipsoid::{ellipsoid, Ellipsoid, EllipsoidKind};
pub use hull::{hull, COPLANAR_REL_TOL};

use crate::error::{check_len, Error, Result};
use crate::search::{force_polytope_vertices, JointBox, SearchOptions, VertexSet};

/// `normal · x ≤ offset`, with a unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub dim: usize,
    /// Sorted extreme points.
    pub vertices: Vec<Vec<f64>>,
    /// Boundary segments (dim 2, counterclockwise) or outward triangles (dim 3).
    pub facets: Option<Vec<Vec<usize>>>,
    pub halfspaces: Option<Vec<Halfspace>>,
    /// Set when the points span fewer than `dim` dimensions.
    pub degenerate: bool,
}

impl Polytope {
    /// Polytope with no points, e.g. an infeasible residual region.
    pub fn empty(dim: usize) -> Self {
        Polytope {
            dim,
            vertices: Vec::new(),
            facets: None,
            halfspaces: None,
            degenerate: true,
        }
    }

    pub fn from_vertex_set(set: &VertexSet) -> Result<Self> {
        if set.is_empty() {
            Ok(Self::empty(set.task_dim))
        } else {
            hull(&set.vertices)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Whether `x` satisfies every halfspace within `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        check_len("point", self.dim, x.len())?;
        let Some(hs) = &self.halfspaces else {
            return Err(Error::Degenerate(format!(
                "polytope with {} vertices spans less than {} dimensions and has no halfspaces",
                self.vertices.len(),
                self.dim
            )));
        };
        Ok(hs
            .iter()
            .all(|h| h.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() <= h.offset + tol))
    }

    /// Support function `max_v ⟨v, d⟩`.
    pub fn support(&self, d: &[f64]) -> Result<f64> {
        check_len("direction", self.dim, d.len())?;
        if !d.iter().any(|&v| v != 0.0) || d.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("support direction must be finite and nonzero".into()));
        }
        self.vertices
            .iter()
            .map(|v| v.iter().zip(d).map(|(a, b)| a * b).sum::<f64>())
            .reduce(f64::max)
            .ok_or_else(|| Error::Degenerate("support of an empty polytope".into()))
    }
}

pub fn minkowski_sum(p: &Polytope, q: &Polytope) -> Result<Polytope> {
    check_len("Minkowski operand dimension", p.dim, q.dim)?;
    if p.is_empty() || q.is_empty() {
        return Ok(Polytope::empty(p.dim));
    }
    let sums: Vec<Vec<f64>> = p
        .vertices
        .iter()
        .flat_map(|a| q.vertices.iter().map(move |b| a.iter().zip(b).map(|(x, y)| x + y).collect()))
        .collect();
    hull(&sums)
}

/// `P₁ ∩ P₂` as the force polytope of the stacked system `[J₁ J₂]` with
/// concatenated torque limits.
pub fn intersection_stacked(
    j1: &DMatrix<f64>,
    j2: &DMatrix<f64>,
    box1: &JointBox,
    box2: &JointBox,
    opts: &SearchOptions,
) -> Result<Polytope> {
    Polytope::from_vertex_set(&intersection_vertices(j1, j2, box1, box2, opts)?)
}

/// Vertex set of the stacked intersection (any task dimension).
pub fn intersection_vertices(
    j1: &DMatrix<f64>,
    j2: &DMatrix<f64>,
    box1: &JointBox,
    box2: &JointBox,
    opts: &SearchOptions,
) -> Result<VertexSet> {
    check_len("second Jacobian rows", j1.nrows(), j2.nrows())?;
    check_len("first joint box dimension", j1.ncols(), box1.dim())?;
    check_len("second joint box dimension", j2.ncols(), box2.dim())?;
    for j in [j1, j2] {
        let sv = j.clone().svd(false, false).singular_values;
        let largest = sv.max();
        let rank = sv.iter().filter(|&&s| s > crate::search::SV_TOL * largest).count();
        if largest == 0.0 || rank < j.nrows() {
            return Err(Error::RankDeficient {
                rank: if largest == 0.0 { 0 } else { rank },
                required: j.nrows(),
                singular_values: sv.as_slice().to_vec(),
            });
        }
    }
    let stacked = DMatrix::from_fn(j1.nrows(), j1.ncols() + j2.ncols(), |r, c| {
        if c < j1.ncols() {
            j1[(r, c)]
        } else {
            j2[(r, c - j1.ncols())]
        }
    });
    let bx = JointBox::new(
        box1.lo.iter().chain(&box2.lo).copied().collect(),
        box1.hi.iter().chain(&box2.hi).copied().collect(),
    )?;
    force_polytope_vertices(&stacked, &bx, opts)
}
