//! Kinematics, inverse dynamics, actuator losses and payload sensitivity of
//! heavy-duty mobile manipulators driven by electromechanical linear
//! actuators.
//!
//! The pipeline for one payload is
//! [`run_trajectory`] → [`rnea`] → [`evaluate_metrics`], and
//! [`payload_sweep`] repeats it over a payload grid with finite-difference
//! derivatives.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actuator;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod kinematics;
pub mod metrics;
pub mod robot;
pub mod sensitivity;
pub mod spatial;
pub mod trajectory;
pub mod transmission;

pub use actuator::{Drivetrain, Efficiency, Emla, LossModel, PmsmParams};
pub use dynamics::{rnea, ActuatorState, InverseDynamics};
pub use error::{Error, Result};
pub use kinematics::{get_jacobian, ik_step, run_trajectory, Motion};
pub use metrics::{evaluate_metrics, ActuatorMetrics, ActuatorSummary, MetricsSeries};
pub use robot::{load_model, update_payload, RobotModel};
pub use sensitivity::{payload_sweep, sensitivity_pd, Scheme, SensitivityEntry, SensitivityReport, SweepSpec};
pub use spatial::{SpatialInertia, Transform, Twist, Wrench};
pub use trajectory::{Reference, TrajectoryKind, TrajectorySpec};
pub use transmission::{CrankTransmission, Transmission};
