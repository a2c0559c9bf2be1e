//! Run configuration file.

use std::path::{Path, PathBuf};

use emla_core::robot::{RobotConfig, RobotFile};
use emla_core::{Emla, Error, RobotModel, SweepSpec, TrajectorySpec};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Robot file, relative to this config's directory.
    #[serde(default)]
    pub robot_config: Option<PathBuf>,
    /// Inline robot description, used when `robot_config` is absent.
    #[serde(default)]
    pub robot: Option<RobotConfig>,
    /// Seed configuration, refined so the TCP starts on the trajectory.
    pub initial_q: Vec<f64>,
    pub actuators: Vec<Emla>,
    pub trajectory: TrajectorySpec,
    #[serde(default)]
    pub sweep: SweepSpec,
}

/// A parsed config with the robot model built and everything validated.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub model: RobotModel,
    pub initial_q: DVector<f64>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Prepared, CliError> {
        let text = read(path)?;
        let config: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            source: Error::Parse(e),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.prepare(base).map_err(|e| match e {
            CliError::Core(source) => CliError::Config {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    /// Builds the model, resolving `robot_config` against `base`.
    pub fn prepare(self, base: &Path) -> Result<Prepared, CliError> {
        let robot = match (&self.robot_config, &self.robot) {
            (Some(_), Some(_)) => {
                return Err(Error::validation("robot", "give either `robot_config` or `robot`, not both").into())
            }
            (None, None) => return Err(Error::validation("robot_config", "missing robot description").into()),
            (None, Some(r)) => r.clone(),
            (Some(p), None) => {
                let path = base.join(p);
                let text = read(&path)?;
                let file: RobotFile = serde_json::from_str(&text).map_err(|e| CliError::Config {
                    path: path.clone(),
                    source: Error::Parse(e),
                })?;
                file.robot
            }
        };
        let model = robot.build()?;
        if self.initial_q.len() != model.dof() {
            return Err(Error::validation(
                "initial_q",
                format!("expected {} values, found {}", model.dof(), self.initial_q.len()),
            )
            .into());
        }
        if self.actuators.len() != model.dof() {
            return Err(Error::validation(
                "actuators",
                format!("expected {} actuators, found {}", model.dof(), self.actuators.len()),
            )
            .into());
        }
        for (i, a) in self.actuators.iter().enumerate() {
            a.validate(&format!("actuators[{i}]"))?;
        }
        self.trajectory.validate()?;
        self.sweep.validate()?;
        let initial_q = DVector::from_vec(self.initial_q.clone());
        Ok(Prepared {
            config: self,
            model,
            initial_q,
        })
    }
}
