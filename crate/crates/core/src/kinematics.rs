//! Forward kinematics, geometric Jacobians, gravity torques and bias-shifted
//! joint-torque limits.

use nalgebra::{DMatrix, DVector, Isometry3, Translation3, UnitQuaternion, Vector3};

use crate::error::{check_len, Result};
use crate::model::{JointConfig, RobotModel, TaskFrame};

/// Per-joint frames of a chain at one configuration.
#[derive(Debug, Clone)]
pub struct ChainFrames {
    /// Joint-side link frames: previous distal frame rotated by the joint angle.
    pub joint_side: Vec<Isometry3<f64>>,
    /// Distal DH frames; the last one is the end-effector.
    pub distal: Vec<Isometry3<f64>>,
}

impl ChainFrames {
    pub fn end_effector(&self) -> &Isometry3<f64> {
        self.distal.last().expect("chain has at least one joint")
    }

    /// World-frame axis and origin of joint `i` (z axis of the preceding frame).
    pub fn joint_axis(&self, i: usize) -> (Vector3<f64>, Vector3<f64>) {
        let frame = &self.joint_side[i];
        (frame * Vector3::z(), frame.translation.vector)
    }
}

pub fn chain_frames(model: &RobotModel, q: &JointConfig) -> Result<ChainFrames> {
    q.check(model)?;
    let n = model.dof();
    let mut joint_side = Vec::with_capacity(n);
    let mut distal = Vec::with_capacity(n);
    let mut current = Isometry3::identity();
    for (joint, &qi) in model.joints.iter().zip(q.as_slice()) {
        let rot_z = Isometry3::from_parts(
            Translation3::identity(),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), qi + joint.dh.theta_offset),
        );
        let side = current * rot_z;
        let offset = Isometry3::from_parts(
            Translation3::new(joint.dh.a, 0.0, joint.dh.d),
            UnitQuaternion::from_axis_angle(&Vector3::x_axis(), joint.dh.alpha),
        );
        current = side * offset;
        joint_side.push(side);
        distal.push(current);
    }
    Ok(ChainFrames { joint_side, distal })
}

pub fn forward_kinematics(model: &RobotModel, q: &JointConfig) -> Result<Isometry3<f64>> {
    Ok(*chain_frames(model, q)?.end_effector())
}

/// World-frame COM positions of every link.
pub fn com_positions(model: &RobotModel, q: &JointConfig) -> Result<Vec<Vector3<f64>>> {
    let frames = chain_frames(model, q)?;
    Ok(model
        .joints
        .iter()
        .zip(&frames.joint_side)
        .map(|(j, f)| (f * nalgebra::Point3::from(j.com)).coords)
        .collect())
}

/// Full 6×n geometric Jacobian of `point` attached to link `upto` (inclusive),
/// rows ordered x, y, z, rx, ry, rz.
fn point_jacobian(frames: &ChainFrames, point: &Vector3<f64>, upto: usize, n: usize) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(6, n);
    for i in 0..=upto {
        let (axis, origin) = frames.joint_axis(i);
        let lin = axis.cross(&(point - origin));
        jac.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
        jac.fixed_view_mut::<3, 1>(3, i).copy_from(&axis);
    }
    jac
}

/// Full 6×n end-effector Jacobian in the world frame, taken at the
/// end-effector origin.
pub fn full_jacobian(model: &RobotModel, q: &JointConfig) -> Result<DMatrix<f64>> {
    let frames = chain_frames(model, q)?;
    let n = model.dof();
    let tip = frames.end_effector().translation.vector;
    Ok(point_jacobian(&frames, &tip, n - 1, n))
}

/// Geometric Jacobian restricted to (and ordered by) the task frame axes.
pub fn jacobian(model: &RobotModel, q: &JointConfig, frame: &TaskFrame) -> Result<DMatrix<f64>> {
    let full = full_jacobian(model, q)?;
    Ok(select_rows(&full, frame))
}

pub fn select_rows(full: &DMatrix<f64>, frame: &TaskFrame) -> DMatrix<f64> {
    let rows: Vec<usize> = frame.axes().iter().map(|a| a.row()).collect();
    full.select_rows(rows.iter())
}

/// Torques the actuators must produce to hold `q` statically against
/// gravity with no external wrench.
pub fn gravity_torque(model: &RobotModel, q: &JointConfig) -> Result<DVector<f64>> {
    let frames = chain_frames(model, q)?;
    let n = model.dof();
    let mut tau = DVector::zeros(n);
    for (i, joint) in model.joints.iter().enumerate() {
        if joint.mass == 0.0 {
            continue;
        }
        let com = (frames.joint_side[i] * nalgebra::Point3::from(joint.com)).coords;
        let jc = point_jacobian(&frames, &com, i, n);
        let weight = model.gravity * joint.mass;
        // Gravity pulls with m g; the actuators have to oppose it.
        tau -= jc.fixed_rows::<3>(0).transpose() * weight;
    }
    Ok(tau)
}

/// Joint-torque limits after removing the torque already committed to
/// gravity, dynamics and a nominal task wrench.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualLimits {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Joints whose shifted interval no longer contains zero.
    pub warnings: Vec<usize>,
}

pub fn residual_limits(
    lo: &[f64],
    hi: &[f64],
    tau_g: &[f64],
    tau_d: &[f64],
    tau_n: &[f64],
) -> Result<ResidualLimits> {
    let n = lo.len();
    check_len("upper torque limits", n, hi.len())?;
    check_len("gravity torque", n, tau_g.len())?;
    check_len("dynamic torque", n, tau_d.len())?;
    check_len("nominal torque", n, tau_n.len())?;
    let mut out = ResidualLimits {
        lo: Vec::with_capacity(n),
        hi: Vec::with_capacity(n),
        warnings: Vec::new(),
    };
    for i in 0..n {
        let bias = tau_g[i] + tau_d[i] + tau_n[i];
        let (l, h) = (lo[i] - bias, hi[i] - bias);
        if l > 0.0 || h < 0.0 {
            out.warnings.push(i);
        }
        out.lo.push(l);
        out.hi.push(h);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::describe;
    use std::f64::consts::FRAC_PI_2;

    fn one_link(mass: f64) -> RobotModel {
        let text = format!(
            r#"{{"name": "pendulum", "gravity": [0, -9.81, 0], "joints": [{{"kind": "planar-revolute",
              "dh": [1, 0, 0, 0], "mass": {mass}, "com": [1, 0, 0], "torque_min": -2, "torque_max": 2,
              "vel_min": -1, "vel_max": 1}}]}}"#
        );
        RobotModel::from_json_str(&text).unwrap()
    }

    fn assert_mat(actual: &DMatrix<f64>, expected: &[&[f64]], tol: f64) {
        assert_eq!(actual.nrows(), expected.len());
        for (r, row) in expected.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                assert!((actual[(r, c)] - v).abs() < tol, "({r},{c}): {} vs {v}", actual[(r, c)]);
            }
        }
    }

    #[test]
    fn planar_2r_jacobian() {
        let m = describe("planar2r.json").unwrap();
        let j = jacobian(&m, &JointConfig::new(vec![0.0, FRAC_PI_2]), &TaskFrame::planar()).unwrap();
        // frozen from central differences of forward kinematics, step 1e-6
        assert_mat(&j, &[&[-1.0, -1.0], &[1.0, 0.0]], 1e-12);
    }

    #[test]
    fn planar_1r_jacobian() {
        let j = jacobian(&one_link(0.0), &JointConfig::new(vec![0.0]), &TaskFrame::planar()).unwrap();
        assert_mat(&j, &[&[0.0], &[1.0]], 1e-12);
    }

    #[test]
    fn row_subset_consistency() {
        let m = describe("panda7.json").unwrap();
        let q = JointConfig::new(vec![0.3, -0.4, 0.2, -1.9, 0.1, 1.6, 0.5]);
        let full = full_jacobian(&m, &q).unwrap();
        let xy = jacobian(&m, &q, &TaskFrame::planar()).unwrap();
        assert_eq!(full.rows(0, 2).into_owned(), xy);
        let zrx = jacobian(&m, &q, &"rx,z".parse().unwrap()).unwrap();
        assert_eq!(zrx.row(0), full.row(3));
        assert_eq!(zrx.row(1), full.row(2));
    }

    #[test]
    fn wrong_length_config_rejected() {
        let m = describe("planar3r.json").unwrap();
        assert!(jacobian(&m, &JointConfig::new(vec![0.0; 2]), &TaskFrame::planar()).is_err());
    }

    #[test]
    fn gravity_examples() {
        let mut massless = describe("panda7.json").unwrap();
        massless.joints.iter_mut().for_each(|j| j.mass = 0.0);
        let zero = gravity_torque(&massless, &JointConfig::new(vec![0.4; 7])).unwrap();
        assert!(zero.iter().all(|&t| t == 0.0));

        let m = one_link(1.0);
        let horizontal = gravity_torque(&m, &JointConfig::new(vec![0.0])).unwrap();
        assert!((horizontal[0] - 9.81).abs() < 1e-12);
        let up = gravity_torque(&m, &JointConfig::new(vec![FRAC_PI_2])).unwrap();
        assert!(up[0].abs() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let r = residual_limits(&[-1.0; 3], &[1.0; 3], &[0.0; 3], &[0.0; 3], &[0.0; 3]).unwrap();
        assert_eq!(r.lo, vec![-1.0; 3]);
        assert_eq!(r.hi, vec![1.0; 3]);
        assert!(r.warnings.is_empty());

        let r = residual_limits(&[-87.0; 7], &[87.0; 7], &[10.0; 7], &[0.0; 7], &[0.0; 7]).unwrap();
        assert_eq!(r.lo, vec![-97.0; 7]);
        assert_eq!(r.hi, vec![77.0; 7]);

        let r = residual_limits(&[-2.0], &[2.0], &[9.81], &[0.0], &[0.0]).unwrap();
        assert_eq!(r.warnings, vec![0]);

        assert!(residual_limits(&[-1.0; 2], &[1.0; 3], &[0.0; 3], &[0.0; 3], &[0.0; 3]).is_err());
    }
}
