//! Task-space force and velocity capability polytopes for serial manipulators.
//!
//! The core entry point is [`search::force_polytope_vertices`], which finds
//! the vertices of `{f : lo ≤ Jᵀ f ≤ hi}` by walking the faces of the
//! joint-torque box. Around it sit robot kinematics, residual (bias-shifted)
//! limits, convex-geometry helpers for combining robots, and a dual-arm
//! load-sharing simulation.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod loadshare;
mod linalg;
pub mod model;
pub mod search;

pub use error::{Error, Result};
pub use geometry::{ellipsoid, hull, intersection_stacked, minkowski_sum, Ellipsoid, EllipsoidKind, Polytope};
pub use kinematics::{gravity_torque, jacobian, residual_limits};
pub use loadshare::{lambda_policy, max_directional_force, simulate, DualArmScenario, LoadShareTrace, Policy};
pub use model::{describe, Axis, JointConfig, JointKind, JointSpec, RobotModel, TaskFrame};
pub use search::{
    force_polytope_vertices, full_system_solve, oracle_halfspace_enum, velocity_polytope_vertices, JointBox,
    SearchOptions, SearchStats, TorqueBox, VertexSet,
};
