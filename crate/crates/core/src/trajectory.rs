//! Analytic TCP reference trajectories.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    /// Conical spiral: circle of growing radius in the xy plane, climbing in z.
    Spiral,
    /// Fixed point at `center`.
    Constant,
    /// Straight line from `center` at constant `velocity`.
    Linear,
}

/// Axis-aligned box the reference must stay inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceBounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub center: [f64; 3],
    /// Initial spiral radius (m).
    #[serde(default)]
    pub r0: f64,
    /// Radial growth rate (m/s).
    #[serde(default)]
    pub r1: f64,
    /// Angular rate (rad/s).
    #[serde(default)]
    pub omega: f64,
    /// Initial height offset (m).
    #[serde(default)]
    pub z0: f64,
    /// Climb rate (m/s).
    #[serde(default)]
    pub k_z: f64,
    /// Line velocity for [`TrajectoryKind::Linear`] (m/s).
    #[serde(default)]
    pub velocity: [f64; 3],
    /// Duration of the moving segment, M (s).
    pub duration: f64,
    /// Leading static segment at the start point (s).
    #[serde(default)]
    pub hold: f64,
    #[serde(default)]
    pub workspace: Option<WorkspaceBounds>,
}

/// Reference position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
}

impl TrajectorySpec {
    /// The default workspace-covering spiral: two revolutions over 8π s.
    pub fn spiral(center: [f64; 3], r0: f64, r1: f64, k_z: f64) -> Self {
        Self {
            kind: TrajectoryKind::Spiral,
            center,
            r0,
            r1,
            omega: 0.5,
            z0: 0.0,
            k_z,
            velocity: [0.0; 3],
            duration: 8.0 * std::f64::consts::PI,
            hold: 0.0,
            workspace: None,
        }
    }

    pub fn constant(center: [f64; 3], duration: f64) -> Self {
        Self {
            kind: TrajectoryKind::Constant,
            center,
            r0: 0.0,
            r1: 0.0,
            omega: 0.0,
            z0: 0.0,
            k_z: 0.0,
            velocity: [0.0; 3],
            duration,
            hold: 0.0,
            workspace: None,
        }
    }

    /// Total time span covered, `hold + duration`.
    pub fn total_time(&self) -> f64 {
        self.hold + self.duration
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.r0, self.r1, self.omega, self.z0, self.k_z]
            .iter()
            .chain(self.center.iter())
            .chain(self.velocity.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::validation("trajectory", "all parameters must be finite"));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::validation("trajectory.duration", "must be finite and ≥ 0"));
        }
        if !(self.hold >= 0.0 && self.hold.is_finite()) {
            return Err(Error::validation("trajectory.hold", "must be finite and ≥ 0"));
        }
        if let Some(bounds) = &self.workspace {
            let samples = 1000;
            for k in 0..=samples {
                let t = self.total_time() * k as f64 / samples as f64;
                let p = self.evaluate(t)?.position;
                let inside = (0..3).all(|a| p[a] >= bounds.min[a] && p[a] <= bounds.max[a]);
                if !inside {
                    return Err(Error::validation(
                        "trajectory.workspace",
                        format!("reference leaves the workspace at t = {t:.3} s: {p:?}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Position, velocity and acceleration at `t ∈ [0, hold + duration]`.
    pub fn evaluate(&self, t: f64) -> Result<Reference> {
        let end = self.total_time();
        if !(0.0..=end).contains(&t) {
            return Err(Error::validation("t", format!("{t} s is outside [0, {end}] s")));
        }
        if t < self.hold {
            let start = self.moving(0.0);
            return Ok(Reference {
                position: start.position,
                velocity: Vector3::zeros(),
                acceleration: Vector3::zeros(),
            });
        }
        Ok(self.moving(t - self.hold))
    }

    fn moving(&self, t: f64) -> Reference {
        let c = Vector3::from(self.center);
        match self.kind {
            TrajectoryKind::Constant => Reference {
                position: c,
                velocity: Vector3::zeros(),
                acceleration: Vector3::zeros(),
            },
            TrajectoryKind::Linear => {
                let v = Vector3::from(self.velocity);
                Reference {
                    position: c + v * t,
                    velocity: v,
                    acceleration: Vector3::zeros(),
                }
            }
            TrajectoryKind::Spiral => {
                let w = self.omega;
                let r = self.r0 + self.r1 * t;
                let (s, co) = (w * t).sin_cos();
                let position = c + Vector3::new(r * co, r * s, self.z0 + self.k_z * t);
                let velocity = Vector3::new(
                    self.r1 * co - r * w * s,
                    self.r1 * s + r * w * co,
                    self.k_z,
                );
                let acceleration = Vector3::new(
                    -2.0 * self.r1 * w * s - r * w * w * co,
                    2.0 * self.r1 * w * co - r * w * w * s,
                    0.0,
                );
                Reference {
                    position,
                    velocity,
                    acceleration,
                }
            }
        }
    }
}

/// Free-function form of [`TrajectorySpec::evaluate`].
pub fn evaluate(spec: &TrajectorySpec, t: f64) -> Result<Reference> {
    spec.evaluate(t)
}
