use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default rank threshold, relative to the largest singular value.
pub const SV_TOL: f64 = 1e-8;

/// SVD of an m×n Jacobian split into image and kernel parts.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    /// Singular values, descending.
    pub s: Vec<f64>,
    /// n×m preimage basis.
    pub v1: DMatrix<f64>,
    /// n×(n−m) kernel basis.
    pub v2: DMatrix<f64>,
    /// m×n pseudo-inverse of Jᵀ.
    pub jt_pinv: DMatrix<f64>,
    pub rank: usize,
}

impl SvdFactors {
    pub fn task_dim(&self) -> usize {
        self.s.len()
    }

    pub fn joint_dim(&self) -> usize {
        self.v1.nrows()
    }
}

/// Factors `jac` (m ≤ n) and refuses rank-deficient inputs.
///
/// The Jacobian is padded with zero rows to a square matrix so that the
/// decomposition returns a complete orthonormal V, whose trailing n−m
/// columns span the kernel.
pub fn decompose(jac: &DMatrix<f64>, sv_tol: f64) -> Result<SvdFactors> {
    let (m, n) = jac.shape();
    if m == 0 || m > n {
        return Err(Error::Input(format!(
            "Jacobian must be m×n with 1 ≤ m ≤ n, got {m}×{n}"
        )));
    }
    if jac.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("Jacobian contains non-finite entries".into()));
    }
    let mut padded = DMatrix::zeros(n, n);
    padded.rows_mut(0, m).copy_from(jac);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });

    let s: Vec<f64> = order[..m].iter().map(|&i| svd.singular_values[i]).collect();
    let largest = s[0];
    let rank = if largest > 0.0 {
        s.iter().filter(|&&v| v > sv_tol * largest).count()
    } else {
        0
    };
    if rank < m {
        return Err(Error::RankDeficient {
            rank,
            required: m,
            singular_values: s,
        });
    }

    let mut v1 = DMatrix::zeros(n, m);
    for (c, &i) in order[..m].iter().enumerate() {
        v1.column_mut(c).copy_from(&v_t.row(i).transpose());
    }
    let mut v2 = DMatrix::zeros(n, n - m);
    for (c, &i) in order[m..].iter().enumerate() {
        v2.column_mut(c).copy_from(&v_t.row(i).transpose());
    }

    // J V1 = U S, so U follows without a second decomposition.
    let mut u = jac * &v1;
    for (c, &sv) in s.iter().enumerate() {
        u.column_mut(c).unscale_mut(sv);
    }
    // Jᵀ = V1 S Uᵀ  ⇒  (Jᵀ)⁺ = U S⁻¹ V1ᵀ
    let mut u_sinv = u.clone();
    for (c, &sv) in s.iter().enumerate() {
        u_sinv.column_mut(c).unscale_mut(sv);
    }
    let jt_pinv = u_sinv * v1.transpose();

    Ok(SvdFactors {
        u,
        s,
        v1,
        v2,
        jt_pinv,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row() {
        let f = decompose(&DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]), SV_TOL).unwrap();
        assert_eq!(f.s.len(), 1);
        assert!((f.s[0] - 1.0).abs() < 1e-14);
        assert_eq!(f.v2.shape(), (3, 2));
        // kernel is span{e2, e3}: first components vanish, columns orthonormal
        assert!(f.v2.row(0).iter().all(|v| v.abs() < 1e-14));
        let gram = f.v2.transpose() * &f.v2;
        assert!((gram - DMatrix::identity(2, 2)).abs().max() < 1e-14);
    }

    #[test]
    fn square_case_inverts_transpose() {
        let j = DMatrix::from_row_slice(2, 2, &[-1.0, -1.0, 1.0, 0.0]);
        let f = decompose(&j, SV_TOL).unwrap();
        assert_eq!(f.v2.ncols(), 0);
        // direct 2×2 inverse of Jᵀ = [[-1, 1], [-1, 0]]
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, -1.0]);
        assert!((&f.jt_pinv - expected).abs().max() < 1e-14);
    }

    #[test]
    fn zero_row_is_rank_deficient() {
        let j = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 0.0, 0.0, 0.0]);
        match decompose(&j, SV_TOL) {
            Err(Error::RankDeficient { rank, singular_values, .. }) => {
                assert_eq!(rank, 1);
                assert_eq!(singular_values.len(), 2);
            }
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn factor_invariants() {
        let j = DMatrix::from_row_slice(
            3,
            6,
            &[
                0.3, -1.2, 0.5, 0.9, -0.1, 0.4, //
                1.1, 0.2, -0.7, 0.3, 0.8, -0.6, //
                -0.4, 0.6, 0.2, -1.0, 0.5, 0.7,
            ],
        );
        let f = decompose(&j, SV_TOL).unwrap();
        assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
        let mut v = DMatrix::zeros(6, 6);
        v.columns_mut(0, 3).copy_from(&f.v1);
        v.columns_mut(3, 3).copy_from(&f.v2);
        assert!((v.transpose() * &v - DMatrix::identity(6, 6)).abs().max() < 1e-12);
        assert!((f.v2.transpose() * j.transpose()).abs().max() < 1e-10);
        // (Jᵀ)⁺ Jᵀ = I for full row rank J
        assert!((&f.jt_pinv * j.transpose() - DMatrix::identity(3, 3)).abs().max() < 1e-12);
        let rebuilt = &f.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(f.s.clone())) * f.v1.transpose();
        assert!((rebuilt - j).abs().max() < 1e-12);
    }
}
