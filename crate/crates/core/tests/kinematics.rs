use nalgebra::{DMatrix, DVector, Matrix3, Point3};
use polycap::bench::trial_rng;
use polycap::fixtures::ROBOTS;
use polycap::kinematics::{chain_frames, forward_kinematics, full_jacobian};
use polycap::*;
use rand::Rng;

fn random_q(model: &RobotModel, rng: &mut impl Rng) -> JointConfig {
    JointConfig::new(
        model
            .joints
            .iter()
            .map(|j| rng.random_range(j.q_min..j.q_max))
            .collect::<Vec<_>>(),
    )
}

fn shifted(q: &JointConfig, i: usize, h: f64) -> JointConfig {
    let mut v = q.as_slice().to_vec();
    v[i] += h;
    JointConfig::new(v)
}

/// Central differences of the end-effector pose: linear rows from the
/// position, angular rows from the skew part of `Ṙ Rᵀ`.
fn fd_jacobian(model: &RobotModel, q: &JointConfig, h: f64) -> DMatrix<f64> {
    let n = model.dof();
    let mut jac = DMatrix::zeros(6, n);
    let pose = forward_kinematics(model, q).unwrap();
    let r0: Matrix3<f64> = pose.rotation.to_rotation_matrix().into_inner();
    for i in 0..n {
        let plus = forward_kinematics(model, &shifted(q, i, h)).unwrap();
        let minus = forward_kinematics(model, &shifted(q, i, -h)).unwrap();
        let dp = (plus.translation.vector - minus.translation.vector) / (2.0 * h);
        let rp: Matrix3<f64> = plus.rotation.to_rotation_matrix().into_inner();
        let rm: Matrix3<f64> = minus.rotation.to_rotation_matrix().into_inner();
        let w = (rp - rm) / (2.0 * h) * r0.transpose();
        let omega = [
            0.5 * (w[(2, 1)] - w[(1, 2)]),
            0.5 * (w[(0, 2)] - w[(2, 0)]),
            0.5 * (w[(1, 0)] - w[(0, 1)]),
        ];
        for r in 0..3 {
            jac[(r, i)] = dp[r];
            jac[(3 + r, i)] = omega[r];
        }
    }
    jac
}

#[test]
fn jacobian_matches_finite_differences() {
    for name in ROBOTS {
        let model = describe(name).unwrap();
        let mut rng = trial_rng(2024, 0);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let q = random_q(&model, &mut rng);
            let analytic = full_jacobian(&model, &q).unwrap();
            let numeric = fd_jacobian(&model, &q, 1e-6);
            let rel = (&analytic - &numeric).amax() / analytic.amax().max(1e-12);
            worst = worst.max(rel);
        }
        assert!(worst <= 1e-6, "{name}: worst relative error {worst:e}");
    }
}

#[test]
fn task_frame_selects_rows() {
    let model = describe("ur5_6dof.json").unwrap();
    let q = JointConfig::new(vec![0.3, -1.1, 1.4, -0.2, 0.9, 0.1]);
    let full = jacobian(&model, &q, &TaskFrame::full()).unwrap();
    let frame: TaskFrame = "rz,x".parse().unwrap();
    let sub = jacobian(&model, &q, &frame).unwrap();
    assert_eq!(sub.row(0), full.row(5));
    assert_eq!(sub.row(1), full.row(0));
}

fn potential(model: &RobotModel, q: &JointConfig) -> f64 {
    let frames = chain_frames(model, q).unwrap();
    model
        .joints
        .iter()
        .enumerate()
        .map(|(i, j)| {
            let com = frames.joint_side[i] * Point3::from(j.com);
            -j.mass * model.gravity.dot(&com.coords)
        })
        .sum()
}

#[test]
fn gravity_torque_is_potential_gradient() {
    let h = 1e-3;
    for name in ROBOTS {
        let model = describe(name).unwrap();
        let mut rng = trial_rng(77, 1);
        for _ in 0..50 {
            let q = random_q(&model, &mut rng);
            let tau = gravity_torque(&model, &q).unwrap();
            let grad = DVector::from_fn(model.dof(), |i, _| {
                let v = |k: f64| potential(&model, &shifted(&q, i, k * h));
                (-v(2.0) + 8.0 * v(1.0) - 8.0 * v(-1.0) + v(-2.0)) / (12.0 * h)
            });
            let err = (&tau - &grad).amax();
            assert!(err <= 1e-9, "{name}: gravity torque off by {err:e}");
        }
    }
}

#[test]
fn residual_limits_preserve_width() {
    let mut rng = trial_rng(5, 5);
    for _ in 0..200 {
        let n = rng.random_range(1..8);
        let lo: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..-1.0)).collect();
        let hi: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..100.0)).collect();
        let b: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| rng.random_range(-50.0..50.0)).collect())
            .collect();
        let r = residual_limits(&lo, &hi, &b[0], &b[1], &b[2]).unwrap();
        for i in 0..n {
            let bias = b[0][i] + b[1][i] + b[2][i];
            assert_eq!(r.lo[i], lo[i] - bias);
            assert_eq!(r.hi[i], hi[i] - bias);
            assert!(((r.hi[i] - r.lo[i]) - (hi[i] - lo[i])).abs() <= 1e-12 * (hi[i] - lo[i]));
            assert_eq!(r.warnings.contains(&i), r.lo[i] > 0.0 || r.hi[i] < 0.0);
        }
    }
}

#[test]
fn describe_fixtures() {
    assert_eq!(describe("panda7.json").unwrap().dof(), 7);
    let p3 = describe("planar3r.json").unwrap();
    assert_eq!(p3.dof(), 3);
    assert!(p3.is_planar());
    let path = polycap::fixtures::dir().join("ur5_6dof.json");
    assert_eq!(describe(&path).unwrap().dof(), 6);
    assert!(describe("/nonexistent/panda7.json").is_err());
}
