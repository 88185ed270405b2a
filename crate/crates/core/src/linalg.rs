//! Small dense helpers shared by the polytope routines.

use nalgebra::{DMatrix, DVector, LU, Dyn};

/// LU factorization of a column-equilibrated square matrix.
///
/// Columns are scaled to unit Euclidean norm before factoring so that the
/// singularity test does not depend on the physical units of each column.
pub struct ScaledLu {
    lu: LU<f64, Dyn, Dyn>,
    col_scale: Vec<f64>,
}

/// Smallest accepted |pivot| of the equilibrated matrix.
pub const PIVOT_TOL: f64 = 1e-9;

impl ScaledLu {
    /// Returns `None` when the matrix is (numerically) singular.
    pub fn factor(mut a: DMatrix<f64>) -> Option<Self> {
        assert!(a.is_square(), "ScaledLu needs a square matrix");
        let k = a.ncols();
        let mut col_scale = Vec::with_capacity(k);
        for c in 0..k {
            let norm = a.column(c).norm();
            if norm == 0.0 || !norm.is_finite() {
                return None;
            }
            a.column_mut(c).unscale_mut(norm);
            col_scale.push(norm);
        }
        let lu = a.lu();
        let u = lu.u();
        if (0..k).any(|i| u[(i, i)].abs() <= PIVOT_TOL) {
            return None;
        }
        Some(ScaledLu { lu, col_scale })
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        if self.col_scale.is_empty() {
            return DVector::zeros(0);
        }
        let mut x = self
            .lu
            .solve(b)
            .expect("factor() rejected singular matrices");
        for (xi, s) in x.iter_mut().zip(&self.col_scale) {
            *xi /= s;
        }
        x
    }
}

/// Whether `p` lies in the convex hull of `others` up to `tol`.
///
/// Solves the phase-1 linear program for `λ ≥ 0, Σλ = 1, Σ λ_i q_i = p`
/// and accepts when the total artificial infeasibility is at most `tol`.
/// Coordinates are expected to be normalized to O(1) by the caller.
pub fn in_convex_hull(p: &[f64], others: &[&[f64]], tol: f64) -> bool {
    let dim = p.len();
    let k = others.len();
    if k == 0 {
        return false;
    }
    let rows = dim + 1;
    // Columns: k lambdas, rows artificials, then the right-hand side.
    let cols = k + rows + 1;
    let rhs = cols - 1;
    let mut tab = vec![0.0; rows * cols];
    let at = |r: usize, c: usize| r * cols + c;
    for r in 0..rows {
        let target = if r < dim { p[r] } else { 1.0 };
        let sign = if target < 0.0 { -1.0 } else { 1.0 };
        for (j, q) in others.iter().enumerate() {
            let coeff = if r < dim { q[r] } else { 1.0 };
            tab[at(r, j)] = sign * coeff;
        }
        tab[at(r, k + r)] = 1.0;
        tab[at(r, rhs)] = sign * target;
    }
    let mut basis: Vec<usize> = (k..k + rows).collect();

    // Reduced costs of the phase-1 objective (minimize the sum of artificials).
    let reduced = |tab: &[f64], j: usize, basis: &[usize]| -> f64 {
        let mut c = if j >= k && j < k + rows { 1.0 } else { 0.0 };
        for (r, &b) in basis.iter().enumerate() {
            if b >= k && b < k + rows {
                c -= tab[r * cols + j];
            }
        }
        c
    };

    const EPS: f64 = 1e-12;
    for _ in 0..(50 * (k + rows)) {
        // Bland's rule: lowest-index improving column.
        let entering = (0..k + rows).find(|&j| !basis.contains(&j) && reduced(&tab, j, &basis) < -EPS);
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            let a = tab[at(r, e)];
            if a > EPS {
                let ratio = tab[at(r, rhs)] / a;
                let better = match leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < best - EPS || ((ratio - best).abs() <= EPS && basis[r] < basis[lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((pr, _)) = leave else { break };
        let piv = tab[at(pr, e)];
        for c in 0..cols {
            tab[at(pr, c)] /= piv;
        }
        for r in 0..rows {
            if r != pr {
                let f = tab[at(r, e)];
                if f != 0.0 {
                    for c in 0..cols {
                        tab[at(r, c)] -= f * tab[at(pr, c)];
                    }
                }
            }
        }
        basis[pr] = e;
    }
    let infeasibility: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= k)
        .map(|(r, _)| tab[at(r, rhs)].abs())
        .sum();
    infeasibility <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_membership() {
        let square: Vec<Vec<f64>> = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let refs: Vec<&[f64]> = square.iter().map(|v| v.as_slice()).collect();
        assert!(in_convex_hull(&[0.5, 0.5], &refs, 1e-12));
        assert!(in_convex_hull(&[1.0, 0.5], &refs, 1e-12));
        assert!(!in_convex_hull(&[1.1, 0.5], &refs, 1e-12));
        assert!(!in_convex_hull(&[-0.5, -0.5], &refs, 1e-12));
        assert!(!in_convex_hull(&[1.0, 1.0], &refs[..3], 1e-12));
        assert!(!in_convex_hull(&[0.0], &[], 1e-12));
    }

    #[test]
    fn singular_detection() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(ScaledLu::factor(a).is_none());
        let b = DMatrix::from_row_slice(2, 2, &[1e-6, 0.0, 0.0, 1e6]);
        let lu = ScaledLu::factor(b).unwrap();
        let x = lu.solve(&DVector::from_vec(vec![1e-6, 1e6]));
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!(ScaledLu::factor(DMatrix::zeros(0, 0)).is_some());
    }
}
