use nalgebra::{DMatrix, DVector};

use super::{canonicalize, relative_tol, AlphaPartition, JointBox, SearchStats, VertexSet};
use crate::error::{check_len, Error, Result};

/// Brute-force vertex enumeration of `{f : lo ≤ Jᵀ f ≤ hi}`.
///
/// Intersects every choice of m hyperplanes out of the 2n bounding ones and
/// keeps the feasible intersection points. No pruning and no SVD reduction,
/// so it shares nothing with the face search beyond the final
/// canonicalization. Only practical for small m.
pub fn oracle_halfspace_enum(jac: &DMatrix<f64>, bx: &JointBox) -> Result<VertexSet> {
    let (m, n) = jac.shape();
    check_len("joint box dimension", n, bx.dim())?;
    if m == 0 || m > n {
        return Err(Error::Input(format!("Jacobian must be m×n with 1 ≤ m ≤ n, got {m}×{n}")));
    }
    let sv = jac.clone().svd(false, false).singular_values;
    let largest = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-8 * largest).count();
    if largest == 0.0 || rank < m {
        return Err(Error::RankDeficient {
            rank: if largest == 0.0 { 0 } else { rank },
            required: m,
            singular_values: sv.as_slice().to_vec(),
        });
    }

    // Hyperplane k: row a_k · f = b_k with a = ±(column of J).
    let planes: Vec<(DVector<f64>, f64)> = (0..n)
        .flat_map(|i| {
            let col = jac.column(i).into_owned();
            [(col.clone(), bx.hi[i]), (-col, -bx.lo[i])]
        })
        .collect();
    let feas_tol = 1e-9 * bx.max_width();
    let mut stats = SearchStats::default();
    let mut raw = Vec::new();
    for combo in AlphaPartition::enumerate(2 * n, m) {
        stats.faces_total += 1;
        let a = DMatrix::from_fn(m, m, |r, c| planes[combo.fixed_idx[r]].0[c]);
        let b = DVector::from_fn(m, |r, _| planes[combo.fixed_idx[r]].1);
        // Row-equilibrate so the singularity test is unit-free.
        let norms: Vec<f64> = (0..m).map(|r| a.row(r).norm()).collect();
        if norms.contains(&0.0) {
            stats.faces_singular += 1;
            continue;
        }
        let a = DMatrix::from_fn(m, m, |r, c| a[(r, c)] / norms[r]);
        let b = DVector::from_fn(m, |r, _| b[r] / norms[r]);
        let lu = a.lu();
        if (0..m).any(|i| lu.u()[(i, i)].abs() <= 1e-10) {
            stats.faces_singular += 1;
            continue;
        }
        let Some(f) = lu.solve(&b) else {
            stats.faces_singular += 1;
            continue;
        };
        stats.systems_solved += 1;
        let tau = jac.tr_mul(&f);
        let feasible = (0..n).all(|i| tau[i] >= bx.lo[i] - feas_tol && tau[i] <= bx.hi[i] + feas_tol);
        if feasible {
            stats.raw_hits += 1;
            raw.push(f.as_slice().to_vec());
        }
    }
    let tol = relative_tol(&raw);
    let mut set = canonicalize(raw, m, tol);
    set.stats = stats;
    Ok(set)
}
