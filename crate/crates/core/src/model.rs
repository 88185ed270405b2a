//! Robot descriptions: DH chains with per-joint limits and point-mass links.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JointKind {
    Revolute,
    PlanarRevolute,
}

/// Standard Denavit-Hartenberg parameters of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dh {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub theta_offset: f64,
}

/// One joint of the chain, together with the link it drives.
///
/// `com` is given in the joint-side link frame: the frame of the previous
/// link rotated by the joint angle about its z axis, before the `d` and `a`
/// offsets are applied. For a planar link of length `l` lying along its own
/// x axis, a mid-link COM is `(l/2, 0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub kind: JointKind,
    pub dh: Dh,
    pub mass: f64,
    pub com: Vector3<f64>,
    pub torque_min: f64,
    pub torque_max: f64,
    pub vel_min: f64,
    pub vel_max: f64,
    /// Sampling range for benchmarks; not a kinematic constraint.
    pub q_min: f64,
    pub q_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub name: String,
    pub joints: Vec<JointSpec>,
    pub gravity: Vector3<f64>,
}

impl RobotModel {
    pub fn new(name: impl Into<String>, joints: Vec<JointSpec>, gravity: Vector3<f64>) -> Result<Self> {
        let model = RobotModel {
            name: name.into(),
            joints,
            gravity,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn is_planar(&self) -> bool {
        self.joints.iter().all(|j| j.kind == JointKind::PlanarRevolute)
    }

    pub fn torque_limits(&self) -> (Vec<f64>, Vec<f64>) {
        self.joints.iter().map(|j| (j.torque_min, j.torque_max)).unzip()
    }

    pub fn velocity_limits(&self) -> (Vec<f64>, Vec<f64>) {
        self.joints.iter().map(|j| (j.vel_min, j.vel_max)).unzip()
    }

    pub fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(Error::Validation(format!("robot '{}' has no joints", self.name)));
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(Error::Validation("gravity must be finite".into()));
        }
        for (i, j) in self.joints.iter().enumerate() {
            let nums = [
                j.dh.a,
                j.dh.alpha,
                j.dh.d,
                j.dh.theta_offset,
                j.mass,
                j.com.x,
                j.com.y,
                j.com.z,
                j.torque_min,
                j.torque_max,
                j.vel_min,
                j.vel_max,
                j.q_min,
                j.q_max,
            ];
            if nums.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("joint {i}: non-finite parameter")));
            }
            if j.mass < 0.0 {
                return Err(Error::Validation(format!("joint {i}: negative mass {}", j.mass)));
            }
            if j.torque_min >= j.torque_max {
                return Err(Error::Validation(format!(
                    "joint {i}: torque_min ({}) must be below torque_max ({})",
                    j.torque_min, j.torque_max
                )));
            }
            if j.vel_min >= j.vel_max {
                return Err(Error::Validation(format!(
                    "joint {i}: vel_min ({}) must be below vel_max ({})",
                    j.vel_min, j.vel_max
                )));
            }
            if j.q_min > j.q_max {
                return Err(Error::Validation(format!("joint {i}: q_min exceeds q_max")));
            }
            if j.kind == JointKind::PlanarRevolute && (j.dh.alpha != 0.0 || j.dh.d != 0.0) {
                return Err(Error::Validation(format!(
                    "joint {i}: planar-revolute joints need alpha = 0 and d = 0"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawModel = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        raw.into_model()
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawModel::from(self);
        serde_json::to_string_pretty(&raw).expect("model serializes")
    }

    /// Loads a robot description from disk. A bare file name that does not
    /// exist on disk falls back to the fixtures bundled with the crate.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            return Self::from_json_str(&text);
        }
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
        match crate::fixtures::robot(name) {
            Some(text) if path.components().count() == 1 => Self::from_json_str(text),
            _ => Err(Error::Input(format!("robot file not found: {}", path.display()))),
        }
    }
}

/// Reads and validates a robot description file.
pub fn describe(model_file: impl AsRef<Path>) -> Result<RobotModel> {
    RobotModel::load(model_file)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
    gravity: [f64; 3],
    joints: Vec<RawJoint>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJoint {
    kind: JointKind,
    dh: [f64; 4],
    mass: f64,
    com: [f64; 3],
    torque_min: f64,
    torque_max: f64,
    vel_min: f64,
    vel_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q_max: Option<f64>,
}

impl RawModel {
    fn into_model(self) -> Result<RobotModel> {
        let joints = self
            .joints
            .into_iter()
            .map(|j| JointSpec {
                kind: j.kind,
                dh: Dh {
                    a: j.dh[0],
                    alpha: j.dh[1],
                    d: j.dh[2],
                    theta_offset: j.dh[3],
                },
                mass: j.mass,
                com: Vector3::from(j.com),
                torque_min: j.torque_min,
                torque_max: j.torque_max,
                vel_min: j.vel_min,
                vel_max: j.vel_max,
                q_min: j.q_min.unwrap_or(-std::f64::consts::PI),
                q_max: j.q_max.unwrap_or(std::f64::consts::PI),
            })
            .collect();
        RobotModel::new(self.name, joints, Vector3::from(self.gravity))
    }
}

impl From<&RobotModel> for RawModel {
    fn from(m: &RobotModel) -> Self {
        RawModel {
            name: m.name.clone(),
            notes: None,
            gravity: m.gravity.into(),
            joints: m
                .joints
                .iter()
                .map(|j| RawJoint {
                    kind: j.kind,
                    dh: [j.dh.a, j.dh.alpha, j.dh.d, j.dh.theta_offset],
                    mass: j.mass,
                    com: j.com.into(),
                    torque_min: j.torque_min,
                    torque_max: j.torque_max,
                    vel_min: j.vel_min,
                    vel_max: j.vel_max,
                    q_min: Some(j.q_min),
                    q_max: Some(j.q_max),
                })
                .collect(),
        }
    }
}

/// Joint positions, rad.
#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig(pub Vec<f64>);

impl JointConfig {
    pub fn new(q: impl Into<Vec<f64>>) -> Self {
        JointConfig(q.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn check(&self, model: &RobotModel) -> Result<()> {
        crate::error::check_len("joint configuration", model.dof(), self.len())?;
        if self.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("joint configuration contains non-finite values".into()));
        }
        Ok(())
    }
}

impl From<Vec<f64>> for JointConfig {
    fn from(q: Vec<f64>) -> Self {
        JointConfig(q)
    }
}

/// A task-space coordinate: linear x/y/z or angular rx/ry/rz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
    Rx,
    Ry,
    Rz,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::X, Axis::Y, Axis::Z, Axis::Rx, Axis::Ry, Axis::Rz];

    /// Row of this axis in the full 6×n geometric Jacobian.
    pub fn row(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
            Axis::Rx => 3,
            Axis::Ry => 4,
            Axis::Rz => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
            Axis::Rx => "rx",
            Axis::Ry => "ry",
            Axis::Rz => "rz",
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            "rx" => Ok(Axis::Rx),
            "ry" => Ok(Axis::Ry),
            "rz" => Ok(Axis::Rz),
            other => Err(Error::Input(format!("unknown task axis '{other}'"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ordered subset of task-space axes selecting Jacobian rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskFrame {
    axes: Vec<Axis>,
}

impl TaskFrame {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 6 {
            return Err(Error::Input(format!(
                "task frame needs 1 to 6 axes, got {}",
                axes.len()
            )));
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].contains(a) {
                return Err(Error::Input(format!("duplicate task axis '{a}'")));
            }
        }
        Ok(TaskFrame { axes })
    }

    pub fn full() -> Self {
        TaskFrame {
            axes: Axis::ALL.to_vec(),
        }
    }

    pub fn planar() -> Self {
        TaskFrame {
            axes: vec![Axis::X, Axis::Y],
        }
    }

    pub fn translational() -> Self {
        TaskFrame {
            axes: vec![Axis::X, Axis::Y, Axis::Z],
        }
    }

    /// `{x, y}` for all-planar robots, `{x, y, z}` otherwise.
    pub fn default_for(model: &RobotModel) -> Self {
        if model.is_planar() {
            Self::planar()
        } else {
            Self::translational()
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }
}

impl FromStr for TaskFrame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(Axis::from_str)
            .collect::<Result<Vec<_>>>()?;
        TaskFrame::new(axes)
    }
}
