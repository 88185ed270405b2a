//! Vertex search for task-space force and velocity polytopes.
//!
//! The force polytope `{f : lo ≤ Jᵀ f ≤ hi}` has its vertices on the
//! (n−m)-dimensional faces of the joint-torque box. [`force_polytope_vertices`]
//! visits the C(n, m) face families, prunes those whose origins cannot reach
//! the image of Jᵀ, and solves an (n−m)×(n−m) system on the rest.
//! [`full_system_solve`] is the unreduced n×n baseline and
//! [`oracle_halfspace_enum`] a brute-force cross-check.

mod canonical;
mod face;
mod oracle;
mod svd;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use canonical::{
    canonicalize, canonicalize_points, diameter, lex_cmp, point_sets_match, relative_tol, DEDUP_REL_TOL,
};
pub use face::{
    binomial, face_bounds, solve_face, AlphaPartition, FaceContext, FaceHit, FaceOutcome, FaceStatus,
    ALPHA_TOL,
};
pub use oracle::oracle_halfspace_enum;
pub use svd::{decompose, SvdFactors, SV_TOL};

use crate::error::{check_len, Error, Result};
use crate::linalg::ScaledLu;

/// Per-joint lower/upper bounds (torques or joint velocities).
#[derive(Debug, Clone, PartialEq)]
pub struct JointBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

pub type TorqueBox = JointBox;

impl JointBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_len("upper bounds", lo.len(), hi.len())?;
        if lo.is_empty() {
            return Err(Error::Input("joint box needs at least one joint".into()));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite()) || l >= h {
                return Err(Error::Input(format!(
                    "joint {i}: bounds must be finite with lo < hi (got [{l}, {h}])"
                )));
            }
        }
        Ok(JointBox { lo, hi })
    }

    pub fn symmetric(half: &[f64]) -> Result<Self> {
        Self::new(half.iter().map(|h| -h).collect(), half.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn max_width(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.lo.iter().map(|v| v * c).collect(),
            self.hi.iter().map(|v| v * c).collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub faces_total: u64,
    pub faces_pruned_bounds: u64,
    pub faces_singular: u64,
    pub systems_solved: u64,
    pub raw_hits: u64,
    pub runtime_ns: u64,
}

impl SearchStats {
    fn record(&mut self, outcome: &FaceOutcome) {
        self.faces_total += 1;
        match outcome.status {
            FaceStatus::Pruned => self.faces_pruned_bounds += 1,
            FaceStatus::Singular => self.faces_singular += 1,
            FaceStatus::Solved => self.systems_solved += 1,
        }
        self.raw_hits += outcome.hits.len() as u64;
    }

    /// Stats with the timing field cleared, for reproducibility comparisons.
    pub fn without_timing(mut self) -> Self {
        self.runtime_ns = 0;
        self
    }
}

/// Canonical vertex list of a task-space polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    pub task_dim: usize,
    /// Lexicographically sorted extreme points.
    pub vertices: Vec<Vec<f64>>,
    pub stats: SearchStats,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub sv_tol: f64,
    pub alpha_tol: f64,
    /// Skip face families whose origins fall outside the `T α` bounds.
    pub prune: bool,
    /// Evaluate face families on the rayon pool.
    pub parallel: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            sv_tol: SV_TOL,
            alpha_tol: ALPHA_TOL,
            prune: true,
            parallel: false,
        }
    }
}

fn check_box(jac: &DMatrix<f64>, bx: &JointBox) -> Result<()> {
    check_len("joint box dimension", jac.ncols(), bx.dim())
}

/// Force polytope vertices via SVD-reduced face solves.
pub fn force_polytope_vertices(jac: &DMatrix<f64>, bx: &JointBox, opts: &SearchOptions) -> Result<VertexSet> {
    let start = Instant::now();
    check_box(jac, bx)?;
    let factors = decompose(jac, opts.sv_tol)?;
    let (m, n) = jac.shape();
    let ctx = FaceContext::new(&factors, bx, opts.alpha_tol, opts.prune);
    let parts = AlphaPartition::enumerate(n, m);
    let outcomes: Vec<FaceOutcome> = if opts.parallel {
        parts.par_iter().map(|p| ctx.solve(p)).collect()
    } else {
        parts.iter().map(|p| ctx.solve(p)).collect()
    };

    let mut stats = SearchStats::default();
    let mut raw = Vec::new();
    for outcome in outcomes {
        stats.record(&outcome);
        raw.extend(outcome.hits.into_iter().map(|h| h.f_vert));
    }
    let tol = relative_tol(&raw);
    let mut set = canonicalize(raw, m, tol);
    stats.runtime_ns = start.elapsed().as_nanos() as u64;
    set.stats = stats;
    Ok(set)
}

/// Unreduced baseline: solves `[Jᵀ, −τ_free] [f; α₂] = τ_o` for every face.
pub fn full_system_solve(jac: &DMatrix<f64>, bx: &JointBox, opts: &SearchOptions) -> Result<VertexSet> {
    let start = Instant::now();
    check_box(jac, bx)?;
    // Same rank gate as the reduced path.
    decompose(jac, opts.sv_tol)?;
    let (m, n) = jac.shape();
    let jt = jac.transpose();
    let mut stats = SearchStats::default();
    let mut raw = Vec::new();
    for part in AlphaPartition::enumerate(n, m) {
        let mut z = DMatrix::zeros(n, n);
        z.columns_mut(0, m).copy_from(&jt);
        for (c, &i) in part.free_idx.iter().enumerate() {
            z[(i, m + c)] = -bx.width(i);
        }
        let outcome = match ScaledLu::factor(z) {
            None => FaceOutcome {
                status: FaceStatus::Singular,
                hits: Vec::new(),
            },
            Some(lu) => {
                let hits = (0..part.origin_count() as u32)
                    .filter_map(|vals| {
                        let tau_o = part.origin(bx, vals);
                        let x = lu.solve(&tau_o);
                        let alpha2: Vec<f64> = x.rows(m, n - m).iter().copied().collect();
                        let inside = alpha2
                            .iter()
                            .all(|&a| a >= -opts.alpha_tol && a <= 1.0 + opts.alpha_tol);
                        inside.then(|| {
                            let mut tau = tau_o.clone();
                            for (c, &i) in part.free_idx.iter().enumerate() {
                                tau[i] += alpha2[c] * bx.width(i);
                            }
                            FaceHit {
                                fixed_vals: vals,
                                alpha2,
                                tau_vert: tau.as_slice().to_vec(),
                                f_vert: x.rows(0, m).iter().copied().collect(),
                            }
                        })
                    })
                    .collect();
                FaceOutcome {
                    status: FaceStatus::Solved,
                    hits,
                }
            }
        };
        stats.record(&outcome);
        raw.extend(outcome.hits.into_iter().map(|h| h.f_vert));
    }
    let tol = relative_tol(&raw);
    let mut set = canonicalize(raw, m, tol);
    stats.runtime_ns = start.elapsed().as_nanos() as u64;
    set.stats = stats;
    Ok(set)
}

/// Largest joint count accepted by the corner-mapping velocity polytope.
pub const MAX_VELOCITY_DOF: usize = 24;

/// Velocity polytope: image of all joint-velocity box corners, hull extremes.
pub fn velocity_polytope_vertices(jac: &DMatrix<f64>, bx: &JointBox) -> Result<VertexSet> {
    let start = Instant::now();
    check_box(jac, bx)?;
    let (m, n) = jac.shape();
    if n > MAX_VELOCITY_DOF {
        return Err(Error::Capacity(format!(
            "velocity polytope enumerates 2^n corners; n = {n} exceeds {MAX_VELOCITY_DOF}"
        )));
    }
    let base = jac * DVector::from_column_slice(&bx.lo);
    let steps: Vec<DVector<f64>> = (0..n).map(|i| jac.column(i) * bx.width(i)).collect();
    let raw: Vec<Vec<f64>> = (0u32..1 << n)
        .map(|mask| {
            let mut v = base.clone();
            for (i, s) in steps.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v += s;
                }
            }
            v.as_slice().to_vec()
        })
        .collect();
    let tol = relative_tol(&raw);
    let mut set = canonicalize(raw, m, tol);
    set.stats = SearchStats {
        faces_total: 1 << n,
        raw_hits: 1 << n,
        runtime_ns: start.elapsed().as_nanos() as u64,
        ..SearchStats::default()
    };
    Ok(set)
}
