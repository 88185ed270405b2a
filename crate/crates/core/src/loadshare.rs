//! Two robots carrying one payload: vertical force capacity per robot and
//! the split of the payload weight between them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::kinematics::{full_jacobian, gravity_torque, residual_limits};
use crate::model::{JointConfig, RobotModel};
use crate::search::{force_polytope_vertices, JointBox, SearchOptions, SV_TOL};

/// Gravitational acceleration used to turn the payload mass into a weight.
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Slack on joint-torque limits when auditing a load split, N·m.
pub const TORQUE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalForce {
    pub f_min: f64,
    pub f_max: f64,
    /// Joints whose gravity-shifted interval no longer contains zero.
    pub warnings: Vec<usize>,
}

impl DirectionalForce {
    /// Set when the robot cannot hold its own weight with zero applied force.
    pub fn flagged(&self) -> bool {
        !self.warnings.is_empty()
    }
}

fn unit(v: &[f64]) -> Result<Vector3<f64>> {
    check_len("direction", 3, v.len())?;
    let d = Vector3::new(v[0], v[1], v[2]);
    let len = d.norm();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::Input("direction must be finite and nonzero".into()));
    }
    Ok(d / len)
}

/// Joint-torque row `(d̂ᵀ J_lin)ᵀ` mapping a force along `d̂` to torques.
fn force_row(model: &RobotModel, q: &JointConfig, d: &Vector3<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let full = full_jacobian(model, q)?;
    let lin = full.rows(0, 3).into_owned();
    let row = d.transpose() * &lin;
    let row = DMatrix::from_row_slice(1, model.dof(), row.as_slice());
    let scale = lin.clone().svd(false, false).singular_values.max();
    let len = row.norm();
    if !(len > SV_TOL * scale) {
        return Err(Error::RankDeficient {
            rank: 0,
            required: 1,
            singular_values: vec![len],
        });
    }
    Ok((row, lin))
}

/// Range of force the end effector can exert along `direction` (a
/// world-frame 3-vector), optionally after paying for gravity.
pub fn max_directional_force(
    model: &RobotModel,
    q: &JointConfig,
    direction: &[f64],
    include_gravity: bool,
) -> Result<DirectionalForce> {
    let d = unit(direction)?;
    let (row, _) = force_row(model, q, &d)?;
    let (lo, hi) = model.torque_limits();
    let n = model.dof();
    let tau_g = if include_gravity {
        gravity_torque(model, q)?.as_slice().to_vec()
    } else {
        vec![0.0; n]
    };
    let shifted = residual_limits(&lo, &hi, &tau_g, &vec![0.0; n], &vec![0.0; n])?;
    let bx = JointBox::new(shifted.lo, shifted.hi)?;
    let set = force_polytope_vertices(&row, &bx, &SearchOptions::default())?;
    match (set.vertices.first(), set.vertices.last()) {
        (Some(a), Some(b)) => Ok(DirectionalForce {
            f_min: a[0],
            f_max: b[0],
            warnings: shifted.warnings,
        }),
        _ => Err(Error::Capacity(format!(
            "'{}' has no feasible force along the direction at this configuration",
            model.name
        ))),
    }
}

/// Share of the payload assigned to robot 1, proportional to capacity.
pub fn lambda_policy(f1_max: f64, f2_max: f64) -> Result<f64> {
    if !(f1_max >= 0.0 && f2_max >= 0.0) {
        return Err(Error::Input(format!(
            "capacities must be nonnegative (got {f1_max}, {f2_max})"
        )));
    }
    let total = f1_max + f2_max;
    if total == 0.0 {
        return Err(Error::Capacity("both robots have zero capacity".into()));
    }
    Ok((f1_max / total).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    Adaptive,
    Fixed(f64),
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "adaptive" {
            return Ok(Policy::Adaptive);
        }
        let bad = || Error::Input(format!("policy must be 'adaptive' or 'fixed:<lambda>' with lambda in [0, 1], got '{s}'"));
        let v: f64 = s.strip_prefix("fixed:").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if !(0.0..=1.0).contains(&v) {
            return Err(bad());
        }
        Ok(Policy::Fixed(v))
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Policy::Adaptive => write!(f, "adaptive"),
            Policy::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub q1: JointConfig,
    pub q2: JointConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualArmScenario {
    pub robot1: RobotModel,
    pub robot2: RobotModel,
    pub trajectory: Vec<TrajectoryPoint>,
    pub payload_mass: f64,
    /// Unit vector along which gravity pulls the payload.
    pub gravity_dir: Vector3<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    t: f64,
    q1: Vec<f64>,
    q2: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    robot1: PathBuf,
    robot2: PathBuf,
    payload_mass: f64,
    trajectory: Vec<RawPoint>,
    #[serde(default)]
    gravity_dir: Option<[f64; 3]>,
    #[serde(default)]
    #[allow(dead_code)]
    notes: Option<String>,
}

impl DualArmScenario {
    pub fn new(
        robot1: RobotModel,
        robot2: RobotModel,
        trajectory: Vec<TrajectoryPoint>,
        payload_mass: f64,
        gravity_dir: &[f64],
    ) -> Result<Self> {
        if trajectory.is_empty() {
            return Err(Error::Validation("trajectory must not be empty".into()));
        }
        if !(payload_mass > 0.0) || !payload_mass.is_finite() {
            return Err(Error::Validation(format!("payload_mass must be positive, got {payload_mass}")));
        }
        for (k, p) in trajectory.iter().enumerate() {
            if !p.t.is_finite() {
                return Err(Error::Validation(format!("trajectory[{k}].t is not finite")));
            }
            if k > 0 && p.t <= trajectory[k - 1].t {
                return Err(Error::Validation(format!("trajectory[{k}].t must increase strictly")));
            }
            p.q1.check(&robot1)
                .map_err(|e| Error::Validation(format!("trajectory[{k}].q1: {e}")))?;
            p.q2.check(&robot2)
                .map_err(|e| Error::Validation(format!("trajectory[{k}].q2: {e}")))?;
        }
        Ok(DualArmScenario {
            robot1,
            robot2,
            trajectory,
            payload_mass,
            gravity_dir: unit(gravity_dir)?,
        })
    }

    /// Parses scenario JSON; robot paths are resolved against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawScenario = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        // Bare names missing next to the scenario fall back to bundled robots.
        let resolve = |p: &Path| {
            let joined = base_dir.join(p);
            if joined.exists() || p.components().count() != 1 {
                joined
            } else {
                p.to_path_buf()
            }
        };
        let robot1 = RobotModel::load(resolve(&raw.robot1))?;
        let robot2 = RobotModel::load(resolve(&raw.robot2))?;
        let gravity_dir = match raw.gravity_dir {
            Some(g) => g,
            None => [robot1.gravity.x, robot1.gravity.y, robot1.gravity.z],
        };
        let trajectory = raw
            .trajectory
            .into_iter()
            .map(|p| TrajectoryPoint {
                t: p.t,
                q1: JointConfig::new(p.q1),
                q2: JointConfig::new(p.q2),
            })
            .collect();
        Self::new(robot1, robot2, trajectory, raw.payload_mass, &gravity_dir)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                let bundled = path.file_name().and_then(|n| crate::fixtures::scenario(n.to_str()?));
                return match bundled {
                    Some(t) if path.components().count() == 1 => Self::from_json_str(t, Path::new("")),
                    _ => Err(e.into()),
                };
            }
        };
        Self::from_json_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Payload weight `G`.
    pub fn weight(&self) -> f64 {
        self.payload_mass * STANDARD_GRAVITY
    }
}

/// One timestep of a load-share run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadShareStep {
    pub t: f64,
    /// Upward capacities after gravity compensation, clamped at zero.
    pub f1_max: f64,
    pub f2_max: f64,
    #[serde(rename = "F_max")]
    pub f_total_max: f64,
    /// Share of robot 1 under the simulated policy.
    pub lambda: f64,
    pub f1: f64,
    pub f2: f64,
    /// The simulated policy's split is torque-feasible for both robots.
    pub feasible: bool,
    pub feasible_adaptive: bool,
    pub feasible_half: bool,
    /// Adaptive split undefined (both capacities zero); λ fell back to 0.5.
    pub capacity_exhausted: bool,
    /// Per-joint distance to the nearer torque limit under the simulated split.
    pub margins1: Vec<f64>,
    pub margins2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadShareTrace {
    pub policy: String,
    pub payload_weight: f64,
    pub steps: Vec<LoadShareStep>,
}

impl LoadShareTrace {
    pub fn infeasible_steps(&self) -> usize {
        self.steps.iter().filter(|s| !s.feasible).count()
    }

    pub fn infeasible_adaptive(&self) -> usize {
        self.steps.iter().filter(|s| !s.feasible_adaptive).count()
    }

    pub fn infeasible_half(&self) -> usize {
        self.steps.iter().filter(|s| !s.feasible_half).count()
    }

    pub const CSV_HEADER: &'static str = "t,f1_max,f2_max,F_max,lambda,f1,f2,feasible_adaptive,feasible_half";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.t, s.f1_max, s.f2_max, s.f_total_max, s.lambda, s.f1, s.f2, s.feasible_adaptive, s.feasible_half
            );
        }
        out
    }
}

/// `(λG, G − λG)` with `λG` rounded to the spacing of `G`, so the two shares
/// are exactly representable and add back to `G` without rounding.
pub fn split(lambda: f64, weight: f64) -> (f64, f64) {
    let ulp = f64::from_bits(weight.to_bits() + 1) - weight;
    let f1 = ((lambda * weight) / ulp).round() * ulp;
    (f1, weight - f1)
}

struct ArmState {
    capacity: f64,
    tau_g: DVector<f64>,
    row: DVector<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ArmState {
    fn new(model: &RobotModel, q: &JointConfig, up: &Vector3<f64>) -> Result<Self> {
        let tau_g = gravity_torque(model, q)?;
        let (lo, hi) = model.torque_limits();
        let full = full_jacobian(model, q)?;
        let row = full.rows(0, 3).transpose() * up;
        let capacity = match max_directional_force(model, q, up.as_slice(), true) {
            Ok(r) => r.f_max.max(0.0),
            Err(Error::RankDeficient { .. } | Error::Capacity(_)) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(ArmState {
            capacity,
            tau_g,
            row,
            lo,
            hi,
        })
    }

    /// Distance of each joint torque to its nearer limit when carrying `f`.
    fn margins(&self, f: f64) -> Vec<f64> {
        let tau = &self.tau_g + &self.row * f;
        tau.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(t, (l, h))| (t - l).min(h - t))
            .collect()
    }

    fn feasible(&self, f: f64) -> bool {
        self.margins(f).iter().all(|&m| m >= -TORQUE_TOL)
    }
}

pub fn simulate(scenario: &DualArmScenario, policy: Policy) -> Result<LoadShareTrace> {
    let up = -scenario.gravity_dir;
    let weight = scenario.weight();
    let steps = scenario
        .trajectory
        .par_iter()
        .map(|p| -> Result<LoadShareStep> {
            let a1 = ArmState::new(&scenario.robot1, &p.q1, &up)?;
            let a2 = ArmState::new(&scenario.robot2, &p.q2, &up)?;
            let (adaptive, exhausted) = match lambda_policy(a1.capacity, a2.capacity) {
                Ok(l) => (l, false),
                Err(Error::Capacity(_)) => (0.5, true),
                Err(e) => return Err(e),
            };
            let ok = |lambda: f64| {
                let (f1, f2) = split(lambda, weight);
                a1.feasible(f1) && a2.feasible(f2)
            };
            let lambda = match policy {
                Policy::Adaptive => adaptive,
                Policy::Fixed(v) => v,
            };
            let (f1, f2) = split(lambda, weight);
            Ok(LoadShareStep {
                t: p.t,
                f1_max: a1.capacity,
                f2_max: a2.capacity,
                f_total_max: a1.capacity + a2.capacity,
                lambda,
                f1,
                f2,
                feasible: ok(lambda),
                feasible_adaptive: ok(adaptive),
                feasible_half: ok(0.5),
                capacity_exhausted: exhausted,
                margins1: a1.margins(f1),
                margins2: a2.margins(f2),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadShareTrace {
        policy: policy.to_string(),
        payload_weight: weight,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_link(mass: f64) -> RobotModel {
        RobotModel::from_json_str(&format!(
            r#"{{"name": "pendulum", "gravity": [0, -9.81, 0], "joints": [{{"kind": "planar-revolute",
              "dh": [1, 0, 0, 0], "mass": {mass}, "com": [1, 0, 0], "torque_min": -2, "torque_max": 2,
              "vel_min": -1, "vel_max": 1}}]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn pendulum_directional_force() {
        let q = JointConfig::new(vec![0.0]);
        let r = max_directional_force(&one_link(0.0), &q, &[0.0, 1.0, 0.0], true).unwrap();
        assert!((r.f_min + 2.0).abs() < 1e-12 && (r.f_max - 2.0).abs() < 1e-12);
        assert!(!r.flagged());
        let r = max_directional_force(&one_link(1.0), &q, &[0.0, 1.0, 0.0], true).unwrap();
        assert!((r.f_min + 11.81).abs() < 1e-12 && (r.f_max + 7.81).abs() < 1e-12);
        assert!(r.flagged());
        let r = max_directional_force(&one_link(1.0), &q, &[0.0, 1.0, 0.0], false).unwrap();
        assert!((r.f_max - 2.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_direction_is_singular() {
        let q = JointConfig::new(vec![0.0]);
        assert!(matches!(
            max_directional_force(&one_link(0.0), &q, &[1.0, 0.0, 0.0], true),
            Err(Error::RankDeficient { .. })
        ));
        assert!(max_directional_force(&one_link(0.0), &q, &[0.0, 0.0, 0.0], true).is_err());
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_policy(60.0, 60.0).unwrap(), 0.5);
        assert!((lambda_policy(70.0, 50.0).unwrap() - 70.0 / 120.0).abs() < 1e-15);
        assert_eq!(lambda_policy(0.0, 50.0).unwrap(), 0.0);
        assert!(matches!(lambda_policy(0.0, 0.0), Err(Error::Capacity(_))));
        assert!(lambda_policy(-1.0, 2.0).is_err());
    }

    #[test]
    fn split_conserves_weight() {
        for k in 0..1000 {
            let lambda = k as f64 / 999.0;
            for weight in [117.72, 981.0, 1.0 / 3.0] {
                let (f1, f2) = split(lambda, weight);
                assert_eq!(f1 + f2, weight);
                assert!((f1 - lambda * weight).abs() <= 1e-12 * weight);
            }
        }
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("adaptive".parse::<Policy>().unwrap(), Policy::Adaptive);
        assert_eq!("fixed:0.5".parse::<Policy>().unwrap(), Policy::Fixed(0.5));
        assert!("fixed:1.5".parse::<Policy>().is_err());
        assert!("half".parse::<Policy>().is_err());
    }

    #[test]
    fn scenario_validation() {
        let r = one_link(0.0);
        let pt = |t: f64| TrajectoryPoint {
            t,
            q1: JointConfig::new(vec![0.0]),
            q2: JointConfig::new(vec![0.0]),
        };
        assert!(DualArmScenario::new(r.clone(), r.clone(), vec![], 1.0, &[0.0, -1.0, 0.0]).is_err());
        assert!(DualArmScenario::new(r.clone(), r.clone(), vec![pt(0.0), pt(0.0)], 1.0, &[0.0, -1.0, 0.0]).is_err());
        assert!(DualArmScenario::new(r.clone(), r.clone(), vec![pt(0.0)], 0.0, &[0.0, -1.0, 0.0]).is_err());
        let bad_q = TrajectoryPoint {
            t: 0.0,
            q1: JointConfig::new(vec![0.0, 1.0]),
            q2: JointConfig::new(vec![0.0]),
        };
        assert!(DualArmScenario::new(r.clone(), r, vec![bad_q], 1.0, &[0.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn symmetric_pendulums_split_evenly() {
        let r = one_link(0.0);
        let traj = (0..5)
            .map(|k| TrajectoryPoint {
                t: k as f64,
                q1: JointConfig::new(vec![0.1 * k as f64]),
                q2: JointConfig::new(vec![0.1 * k as f64]),
            })
            .collect();
        // 0.3 kg weighs 2.943 N; each arm can lift up to 2 N
        let sc = DualArmScenario::new(r.clone(), r, traj, 0.3, &[0.0, -1.0, 0.0]).unwrap();
        let adaptive = simulate(&sc, Policy::Adaptive).unwrap();
        let half = simulate(&sc, Policy::Fixed(0.5)).unwrap();
        for (a, h) in adaptive.steps.iter().zip(&half.steps) {
            assert_eq!(a.lambda, 0.5);
            assert_eq!(a.f1, h.f1);
            assert!(a.feasible && h.feasible);
            assert_eq!(a.f1 + a.f2, sc.weight());
        }
        assert!(adaptive.to_csv().starts_with(LoadShareTrace::CSV_HEADER));
        // 0.5 kg exceeds the combined 4 N at q = 0
        let heavy = DualArmScenario { payload_mass: 0.5, ..sc };
        let t = simulate(&heavy, Policy::Adaptive).unwrap();
        assert!(!t.steps[0].feasible_adaptive && !t.steps[0].feasible_half);
    }
}
