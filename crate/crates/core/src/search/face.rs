//! Faces of the joint-torque parallelotope and the reduced per-face solve.
//!
//! A torque in the box is written as `lo + Σ α_i τ_i` with `α ∈ [0,1]^n` and
//! `τ_i = (hi_i − lo_i) e_i`. Fixing m of the α's at 0 or 1 selects one
//! (n−m)-dimensional face; the remaining α's are found by projecting onto the
//! kernel of J, which shrinks the system from n×n to (n−m)×(n−m).

use nalgebra::{DMatrix, DVector};

use super::svd::SvdFactors;
use super::JointBox;
use crate::linalg::ScaledLu;

/// Default tolerance on α ∈ [0, 1].
pub const ALPHA_TOL: f64 = 1e-9;

/// Which α's are fixed (to 0/1) and which are solved for on a face family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaPartition {
    pub fixed_idx: Vec<usize>,
    pub free_idx: Vec<usize>,
}

impl AlphaPartition {
    pub fn new(n: usize, fixed_idx: Vec<usize>) -> Self {
        debug_assert!(fixed_idx.windows(2).all(|w| w[0] < w[1]));
        let free_idx = (0..n).filter(|i| !fixed_idx.contains(i)).collect();
        AlphaPartition {
            fixed_idx,
            free_idx,
        }
    }

    /// All C(n, m) partitions in lexicographic order of the fixed indices.
    pub fn enumerate(n: usize, m: usize) -> Vec<AlphaPartition> {
        let mut out = Vec::with_capacity(binomial(n, m) as usize);
        let mut idx: Vec<usize> = (0..m).collect();
        if m > n {
            return out;
        }
        loop {
            out.push(AlphaPartition::new(n, idx.clone()));
            // advance to the next combination
            let mut i = m;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if idx[i] < n - m + i {
                    idx[i] += 1;
                    for j in i + 1..m {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Number of face origins of this family (2^m).
    pub fn origin_count(&self) -> usize {
        1usize << self.fixed_idx.len()
    }

    /// Face origin τ_o for the 0/1 assignment encoded in `fixed_vals`
    /// (bit k set ⇒ α at `fixed_idx[k]` is 1).
    pub fn origin(&self, bx: &JointBox, fixed_vals: u32) -> DVector<f64> {
        let mut tau = DVector::from_column_slice(&bx.lo);
        for (k, &i) in self.fixed_idx.iter().enumerate() {
            if fixed_vals >> k & 1 == 1 {
                tau[i] = bx.hi[i];
            }
        }
        tau
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// Row-wise range of `T α` over α ∈ [0,1]^k.
pub fn face_bounds(t: &DMatrix<f64>) -> (DVector<f64>, DVector<f64>) {
    assert!(t.is_square(), "face_bounds expects a square matrix");
    let k = t.nrows();
    let mut lb = DVector::zeros(k);
    let mut ub = DVector::zeros(k);
    for i in 0..k {
        for &v in t.row(i).iter() {
            if v > 0.0 {
                ub[i] += v;
            } else {
                lb[i] += v;
            }
        }
    }
    (lb, ub)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceHit {
    pub fixed_vals: u32,
    pub alpha2: Vec<f64>,
    pub tau_vert: Vec<f64>,
    pub f_vert: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceStatus {
    /// Every origin fell outside the bounds of `T α`; no system was solved.
    Pruned,
    /// T was singular; the family was skipped.
    Singular,
    Solved,
}

#[derive(Debug, Clone)]
pub struct FaceOutcome {
    pub status: FaceStatus,
    pub hits: Vec<FaceHit>,
}

/// Per-query data reused by every face solve.
pub struct FaceContext<'a> {
    pub factors: &'a SvdFactors,
    pub bx: &'a JointBox,
    /// V2ᵀ lo
    v2t_lo: DVector<f64>,
    alpha_tol: f64,
    prune: bool,
}

impl<'a> FaceContext<'a> {
    pub fn new(factors: &'a SvdFactors, bx: &'a JointBox, alpha_tol: f64, prune: bool) -> Self {
        let v2t_lo = factors.v2.tr_mul(&DVector::from_column_slice(&bx.lo));
        FaceContext {
            factors,
            bx,
            v2t_lo,
            alpha_tol,
            prune,
        }
    }

    /// T = V2ᵀ [−τ_free…]: column c is −w_free[c] times row free[c] of V2.
    pub fn reduced_matrix(&self, part: &AlphaPartition) -> DMatrix<f64> {
        let v2 = &self.factors.v2;
        let k = v2.ncols();
        DMatrix::from_fn(k, k, |r, c| {
            let i = part.free_idx[c];
            -self.bx.width(i) * v2[(i, r)]
        })
    }

    fn reduced_origin(&self, part: &AlphaPartition, fixed_vals: u32) -> DVector<f64> {
        let v2 = &self.factors.v2;
        let mut b = self.v2t_lo.clone();
        for (k, &i) in part.fixed_idx.iter().enumerate() {
            if fixed_vals >> k & 1 == 1 {
                let w = self.bx.width(i);
                for r in 0..b.len() {
                    b[r] += w * v2[(i, r)];
                }
            }
        }
        b
    }

    pub fn solve(&self, part: &AlphaPartition) -> FaceOutcome {
        let t = self.reduced_matrix(part);
        let (lb, ub) = face_bounds(&t);
        let slack: DVector<f64> = (&ub - &lb).map(|w| self.alpha_tol * w + 1e-12 * (1.0 + w));

        let candidates: Vec<(u32, DVector<f64>)> = (0..part.origin_count() as u32)
            .map(|vals| (vals, self.reduced_origin(part, vals)))
            .filter(|(_, b)| {
                !self.prune
                    || b.iter()
                        .enumerate()
                        .all(|(i, &v)| v >= lb[i] - slack[i] && v <= ub[i] + slack[i])
            })
            .collect();
        if candidates.is_empty() {
            return FaceOutcome {
                status: FaceStatus::Pruned,
                hits: Vec::new(),
            };
        }
        let Some(lu) = ScaledLu::factor(t) else {
            return FaceOutcome {
                status: FaceStatus::Singular,
                hits: Vec::new(),
            };
        };

        let hits = candidates
            .into_iter()
            .filter_map(|(vals, b)| {
                let alpha2 = lu.solve(&b);
                let inside = alpha2
                    .iter()
                    .all(|&a| a >= -self.alpha_tol && a <= 1.0 + self.alpha_tol);
                if !inside {
                    return None;
                }
                let mut tau = part.origin(self.bx, vals);
                for (c, &i) in part.free_idx.iter().enumerate() {
                    tau[i] += alpha2[c] * self.bx.width(i);
                }
                let f = &self.factors.jt_pinv * &tau;
                Some(FaceHit {
                    fixed_vals: vals,
                    alpha2: alpha2.as_slice().to_vec(),
                    tau_vert: tau.as_slice().to_vec(),
                    f_vert: f.as_slice().to_vec(),
                })
            })
            .collect();
        FaceOutcome {
            status: FaceStatus::Solved,
            hits,
        }
    }
}

/// Solves one face family with pruning enabled and the default α tolerance.
pub fn solve_face(factors: &SvdFactors, bx: &JointBox, part: &AlphaPartition) -> FaceOutcome {
    FaceContext::new(factors, bx, ALPHA_TOL, true).solve(part)
}
