//! Kinematic, inertial and topological description of a serial manipulator.
//!
//! Link `i` carries the frame reached after joint `i`. Its pose relative to
//! link `i − 1` is `parent_transforms[i] · exp(s_i q_i)`, with the joint
//! screw `s_i` expressed in link `i`'s own frame.

use nalgebra::{DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{SpatialInertia, Transform, Twist};
use crate::transmission::Transmission;

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub name: String,
    pub kind: JointKind,
    pub screw: Twist,
    /// (min, max) in rad or m.
    pub limits: (f64, f64),
    pub transmission: Transmission,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub joints: Vec<JointSpec>,
    /// Link inertias without payload.
    pub link_inertias: Vec<SpatialInertia>,
    pub parent_transforms: Vec<Transform>,
    pub tcp_offset: Transform,
    pub gravity: Vector3<f64>,
    payload_mass: f64,
}

/// Link frames and TCP pose for one configuration.
#[derive(Debug, Clone)]
pub struct Kinematics {
    /// `G_0^i` for i = 1..=n.
    pub frames: Vec<Transform>,
    /// `G_{i-1}^i` for i = 1..=n.
    pub local: Vec<Transform>,
    pub tcp: Transform,
}

impl RobotModel {
    pub fn new(
        joints: Vec<JointSpec>,
        link_inertias: Vec<SpatialInertia>,
        parent_transforms: Vec<Transform>,
        tcp_offset: Transform,
        gravity: Vector3<f64>,
    ) -> Result<Self> {
        let model = Self {
            joints,
            link_inertias,
            parent_transforms,
            tcp_offset,
            gravity,
            payload_mass: 0.0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn payload_mass(&self) -> f64 {
        self.payload_mass
    }

    /// Returns a copy carrying a point mass `m_tcp` at the TCP frame origin.
    ///
    /// The payload replaces any previous one; it is not accumulated.
    pub fn with_payload(&self, m_tcp: f64) -> Result<Self> {
        if !(m_tcp >= 0.0) || !m_tcp.is_finite() {
            return Err(Error::validation("payload_mass", format!("must be a finite value ≥ 0, got {m_tcp}")));
        }
        let mut out = self.clone();
        out.payload_mass = m_tcp;
        Ok(out)
    }

    /// Inertia of link `i` including the payload on the last link.
    pub fn link_inertia(&self, i: usize) -> SpatialInertia {
        let bare = self.link_inertias[i];
        if i + 1 == self.dof() && self.payload_mass > 0.0 {
            bare + SpatialInertia::point_mass(self.payload_mass, self.tcp_offset.translation)
        } else {
            bare
        }
    }

    /// Local transform `G_{i-1}^i(q_i)`.
    pub fn joint_transform(&self, i: usize, q: f64) -> Transform {
        self.parent_transforms[i].compose(&Transform::exp(&self.joints[i].screw, q))
    }

    pub fn forward_kinematics(&self, q: &DVector<f64>) -> Kinematics {
        let mut frames = Vec::with_capacity(self.dof());
        let mut local = Vec::with_capacity(self.dof());
        let mut g = Transform::identity();
        for i in 0..self.dof() {
            let l = self.joint_transform(i, q[i]);
            g = g.compose(&l);
            local.push(l);
            frames.push(g);
        }
        let tcp = g.compose(&self.tcp_offset);
        Kinematics { frames, local, tcp }
    }

    pub fn tcp_position(&self, q: &DVector<f64>) -> Vector3<f64> {
        self.forward_kinematics(q).tcp.translation
    }

    /// Indices of joints outside their limits.
    pub fn limit_violations(&self, q: &DVector<f64>) -> Vec<usize> {
        self.joints
            .iter()
            .enumerate()
            .filter(|(i, j)| q[*i] < j.limits.0 || q[*i] > j.limits.1)
            .map(|(i, _)| i)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dof();
        if n == 0 {
            return Err(Error::validation("robot.joints", "at least one joint is required"));
        }
        if self.link_inertias.len() != n {
            return Err(Error::validation(
                "robot.link_inertias",
                format!("expected {n} entries, found {}", self.link_inertias.len()),
            ));
        }
        if self.parent_transforms.len() != n {
            return Err(Error::validation(
                "robot.parent_transforms",
                format!("expected {n} entries, found {}", self.parent_transforms.len()),
            ));
        }
        for (i, j) in self.joints.iter().enumerate() {
            let field = format!("robot.joints[{i}]");
            let (w, v) = (j.screw.angular, j.screw.linear);
            if !j.screw.is_finite() {
                return Err(Error::validation(format!("{field}.screw"), "must be finite"));
            }
            match j.kind {
                JointKind::Revolute if (w.norm() - 1.0).abs() > 1e-9 => {
                    return Err(Error::validation(
                        format!("{field}.screw"),
                        "revolute screw needs a unit angular part",
                    ));
                }
                JointKind::Prismatic if w.norm() != 0.0 || (v.norm() - 1.0).abs() > 1e-9 => {
                    return Err(Error::validation(
                        format!("{field}.screw"),
                        "prismatic screw needs zero angular part and unit linear part",
                    ));
                }
                _ => {}
            }
            if !(j.limits.0 <= j.limits.1) {
                return Err(Error::validation(format!("{field}.limits"), "min must not exceed max"));
            }
            if let Transmission::Crank(c) = &j.transmission {
                if j.kind != JointKind::Revolute {
                    return Err(Error::validation(
                        format!("{field}.transmission"),
                        "crank linkages drive revolute joints only",
                    ));
                }
                c.validate(&format!("{field}.transmission"), j.limits)?;
            }
        }
        for (i, inertia) in self.link_inertias.iter().enumerate() {
            let field = format!("robot.link_inertias[{i}]");
            if !(inertia.mass >= 0.0) {
                return Err(Error::validation(format!("{field}.mass"), format!("must be ≥ 0, got {}", inertia.mass)));
            }
            if !inertia.is_valid() {
                return Err(Error::validation(
                    format!("{field}.rotational_inertia"),
                    "must be symmetric positive semidefinite",
                ));
            }
        }
        for (i, t) in self.parent_transforms.iter().enumerate() {
            if !t.is_valid() {
                return Err(Error::validation(
                    format!("robot.parent_transforms[{i}].rotation"),
                    "must be orthonormal with determinant +1",
                ));
            }
        }
        if !self.tcp_offset.is_valid() {
            return Err(Error::validation("robot.tcp_offset.rotation", "must be orthonormal with determinant +1"));
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(Error::validation("robot.gravity", "must be finite"));
        }
        Ok(())
    }
}

/// Free-function form of [`RobotModel::with_payload`].
pub fn update_payload(model: &RobotModel, m_tcp: f64) -> Result<RobotModel> {
    model.with_payload(m_tcp)
}

// --- JSON robot description -------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotFile {
    pub robot: RobotConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    pub joints: Vec<JointConfig>,
    pub link_inertias: Vec<InertiaConfig>,
    pub parent_transforms: Vec<TransformConfig>,
    #[serde(default)]
    pub tcp_offset: TransformConfig,
    #[serde(default = "default_gravity")]
    pub gravity: [f64; 3],
    #[serde(default)]
    pub payload_mass: f64,
}

fn default_gravity() -> [f64; 3] {
    [0.0, 0.0, -STANDARD_GRAVITY]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConfig {
    #[serde(default)]
    pub name: String,
    pub kind: JointKind,
    pub screw: ScrewConfig,
    pub limits: [f64; 2],
    #[serde(default)]
    pub transmission: Transmission,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScrewConfig {
    pub angular: [f64; 3],
    pub linear: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaConfig {
    pub mass: f64,
    pub center_of_mass: [f64; 3],
    /// Rows of the 3×3 inertia about the link frame origin.
    pub rotational_inertia: [[f64; 3]; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    #[serde(default = "identity_rows")]
    pub rotation: [[f64; 3]; 3],
    #[serde(default)]
    pub translation: [f64; 3],
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            rotation: identity_rows(),
            translation: [0.0; 3],
        }
    }
}

fn identity_rows() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

fn rows_to_matrix(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| rows[r][c])
}

impl From<&TransformConfig> for Transform {
    fn from(t: &TransformConfig) -> Self {
        Transform::new(rows_to_matrix(&t.rotation), Vector3::from(t.translation))
    }
}

impl From<&InertiaConfig> for SpatialInertia {
    fn from(c: &InertiaConfig) -> Self {
        SpatialInertia {
            mass: c.mass,
            center_of_mass: Vector3::from(c.center_of_mass),
            rotational_inertia: rows_to_matrix(&c.rotational_inertia),
        }
    }
}

impl RobotConfig {
    pub fn build(&self) -> Result<RobotModel> {
        let joints = self
            .joints
            .iter()
            .enumerate()
            .map(|(i, j)| JointSpec {
                name: if j.name.is_empty() { format!("joint{}", i + 1) } else { j.name.clone() },
                kind: j.kind,
                screw: Twist::new(Vector3::from(j.screw.angular), Vector3::from(j.screw.linear)),
                limits: (j.limits[0], j.limits[1]),
                transmission: j.transmission,
            })
            .collect();
        let model = RobotModel::new(
            joints,
            self.link_inertias.iter().map(SpatialInertia::from).collect(),
            self.parent_transforms.iter().map(Transform::from).collect(),
            Transform::from(&self.tcp_offset),
            Vector3::from(self.gravity),
        )?;
        model.with_payload(self.payload_mass)
    }
}

/// Parses and validates a robot description (`{"robot": {...}}`).
pub fn load_model(config_text: &str) -> Result<RobotModel> {
    let file: RobotFile = serde_json::from_str(config_text)?;
    file.robot.build()
}
