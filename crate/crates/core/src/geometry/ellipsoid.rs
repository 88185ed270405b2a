use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::search::{decompose, JointBox, SV_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EllipsoidKind {
    Force,
    Velocity,
}

/// `{x : (x − c)ᵀ E (x − c) ≤ 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub center: DVector<f64>,
    pub shape: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(center: DVector<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let d = center.len();
        if shape.shape() != (d, d) {
            return Err(Error::Dimension {
                what: "ellipsoid shape",
                expected: d,
                got: shape.nrows(),
            });
        }
        let asym = (&shape - shape.transpose()).amax();
        if asym > 1e-12 * shape.amax().max(1.0) {
            return Err(Error::Validation(format!("ellipsoid shape not symmetric (|E − Eᵀ| = {asym:e})")));
        }
        let shape = (&shape + shape.transpose()) * 0.5;
        let eig = shape.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Validation("ellipsoid shape must be positive definite".into()));
        }
        Ok(Ellipsoid { center, shape })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Semi-axis lengths, largest first.
    pub fn semi_axes(&self) -> Vec<f64> {
        let mut axes: Vec<f64> = self
            .shape
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|l| 1.0 / l.sqrt())
            .collect();
        axes.sort_by(|a, b| b.total_cmp(a));
        axes
    }

    /// `(x − c)ᵀ E (x − c)`; 1 on the boundary.
    pub fn level(&self, x: &[f64]) -> f64 {
        let d = DVector::from_column_slice(x) - &self.center;
        d.dot(&(&self.shape * &d))
    }

    /// Boundary point in the direction of unit vector `u` of the unit sphere
    /// mapped through `E^{-1/2}`.
    pub fn boundary_point(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len("ellipsoid direction", self.dim(), u.len())?;
        let u = DVector::from_column_slice(u);
        let len = u.norm();
        if !(len > 0.0) {
            return Err(Error::Input("ellipsoid direction must be nonzero".into()));
        }
        let eig = self.shape.clone().symmetric_eigen();
        let inv_sqrt = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
            * eig.eigenvectors.transpose();
        Ok((&self.center + inv_sqrt * (u / len)).as_slice().to_vec())
    }

    /// `count` deterministic, roughly uniform boundary points (dims 1 to 3).
    pub fn sample_boundary(&self, count: usize) -> Result<Vec<Vec<f64>>> {
        let dirs: Vec<Vec<f64>> = match self.dim() {
            1 => (0..count).map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
            2 => (0..count)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / count as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect(),
            3 => {
                // Fibonacci lattice on the sphere.
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..count)
                    .map(|k| {
                        let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                        let r = (1.0 - z * z).sqrt();
                        let t = golden * k as f64;
                        vec![r * t.cos(), r * t.sin(), z]
                    })
                    .collect()
            }
            d => return Err(Error::Input(format!("boundary sampling supports dimensions 1 to 3, got {d}"))),
        };
        dirs.iter().map(|u| self.boundary_point(u)).collect()
    }
}

/// Manipulability ellipsoid normalized by the half-ranges of the limits.
///
/// Velocity: image of `{q̇_mid + W u : ‖u‖ ≤ 1}`, `W = diag((hi − lo)/2)`.
/// Force: `{f : ‖W⁻¹(Jᵀf − τ_mid)‖ ≤ 1}`. When `τ_mid` is not in the image of
/// Jᵀ the set shrinks by the least-squares residual; symmetric limits give
/// `E = J W⁻² Jᵀ` centered at the origin.
pub fn ellipsoid(jac: &DMatrix<f64>, bx: &JointBox, kind: EllipsoidKind) -> Result<Ellipsoid> {
    check_len("joint box dimension", jac.ncols(), bx.dim())?;
    decompose(jac, SV_TOL)?;
    let n = jac.ncols();
    let half = DVector::from_fn(n, |i, _| bx.width(i) / 2.0);
    let mid = DVector::from_fn(n, |i, _| (bx.lo[i] + bx.hi[i]) / 2.0);
    let singular = || Error::Degenerate("ellipsoid shape matrix is singular".into());
    match kind {
        EllipsoidKind::Velocity => {
            let jw = jac * DMatrix::from_diagonal(&half);
            let shape = (&jw * jw.transpose()).try_inverse().ok_or_else(singular)?;
            Ellipsoid::new(jac * mid, symmetrize(shape))
        }
        EllipsoidKind::Force => {
            let winv2 = DMatrix::from_diagonal(&half.map(|w| 1.0 / (w * w)));
            let shape = symmetrize(jac * &winv2 * jac.transpose());
            let rhs = jac * (&winv2 * &mid);
            let center = shape.clone().cholesky().ok_or_else(singular)?.solve(&rhs);
            let residual = mid.dot(&(&winv2 * &mid)) - center.dot(&(&shape * &center));
            let room = 1.0 - residual;
            if !(room > 0.0) {
                return Err(Error::Degenerate(
                    "no wrench reaches the torque midpoint closely enough for a nonempty ellipsoid".into(),
                ));
            }
            Ellipsoid::new(center, shape / room)
        }
    }
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}
