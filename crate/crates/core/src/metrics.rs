//! Per-actuator performance metrics along a run.
//!
//! - ψ₁ delivered power `v f` (W)
//! - ψ₂ load force `f` (N)
//! - ψ₃ cumulative input energy `Δt Σ P/η` (J); each sample covers one
//!   interval of length Δt
//! - ψ₄ efficiency `P / (√3 V_LL I_LL cos φ)`, undefined where either power is zero

use serde::Serialize;

use crate::actuator::{Efficiency, Emla};
use crate::dynamics::ActuatorState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ActuatorMetrics {
    pub name: String,
    pub v_x: Vec<f64>,
    pub f_x: Vec<f64>,
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
    pub psi3: Vec<f64>,
    pub psi4: Vec<Option<f64>>,
    /// Motor shaft torque including drivetrain inertia and damping (N·m).
    pub motor_torque: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MetricsSeries {
    pub dt: f64,
    pub time: Vec<f64>,
    pub actuators: Vec<ActuatorMetrics>,
}

/// Scalar aggregates of one actuator's traces.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ActuatorSummary {
    pub peak_power: f64,
    pub peak_force: f64,
    pub energy: f64,
    pub mean_efficiency: Option<f64>,
    pub min_efficiency: Option<f64>,
    pub max_efficiency: Option<f64>,
    pub undefined_efficiency: usize,
    pub peak_motor_torque: f64,
}

impl ActuatorMetrics {
    pub fn len(&self) -> usize {
        self.psi1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi1.is_empty()
    }

    pub fn undefined_efficiency(&self) -> usize {
        self.psi4.iter().filter(|e| e.is_none()).count()
    }

    pub fn summary(&self) -> ActuatorSummary {
        let peak = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let defined: Vec<f64> = self.psi4.iter().flatten().copied().collect();
        let (mean, min, max) = if defined.is_empty() {
            (None, None, None)
        } else {
            (
                Some(defined.iter().sum::<f64>() / defined.len() as f64),
                Some(defined.iter().copied().fold(f64::INFINITY, f64::min)),
                Some(defined.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            )
        };
        ActuatorSummary {
            peak_power: peak(&self.psi1),
            peak_force: peak(&self.psi2),
            energy: self.psi3.last().copied().unwrap_or(0.0),
            mean_efficiency: mean,
            min_efficiency: min,
            max_efficiency: max,
            undefined_efficiency: self.psi4.len() - defined.len(),
            peak_motor_torque: peak(&self.motor_torque),
        }
    }

    fn decimate(&self, stride: usize) -> Self {
        fn every<T: Copy>(v: &[T], stride: usize) -> Vec<T> {
            v.iter().step_by(stride).copied().collect()
        }
        Self {
            name: self.name.clone(),
            v_x: every(&self.v_x, stride),
            f_x: every(&self.f_x, stride),
            psi1: every(&self.psi1, stride),
            psi2: every(&self.psi2, stride),
            psi3: every(&self.psi3, stride),
            psi4: every(&self.psi4, stride),
            motor_torque: every(&self.motor_torque, stride),
        }
    }
}

impl MetricsSeries {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn summaries(&self) -> Vec<ActuatorSummary> {
        self.actuators.iter().map(ActuatorMetrics::summary).collect()
    }

    /// Keeps every `stride`-th sample, starting with the first.
    pub fn decimate(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        Self {
            dt: self.dt,
            time: self.time.iter().step_by(stride).copied().collect(),
            actuators: self.actuators.iter().map(|a| a.decimate(stride)).collect(),
        }
    }
}

/// ψ₄ from the steady electrical state.
fn electrical_efficiency(actuator: &Emla, f: f64, v: f64) -> Option<f64> {
    match actuator.electrical_efficiency(f, v) {
        Efficiency::Motoring(eta) => Some(eta),
        Efficiency::Regenerating(eta) if eta > 0.0 => Some(eta),
        _ => None,
    }
}

/// Metrics for a sampled run. `states[k]` holds all actuators at `time[k]`.
pub fn evaluate_metrics(
    time: &[f64],
    states: &[ActuatorState],
    actuators: &[Emla],
    dt: f64,
) -> Result<MetricsSeries> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation("dt", "must be finite and > 0"));
    }
    if time.len() != states.len() {
        return Err(Error::validation(
            "states",
            format!("{} states for {} time samples", states.len(), time.len()),
        ));
    }
    let n = actuators.len();
    if let Some(bad) = states.iter().find(|s| s.f_x.len() != n || s.v_x.len() != n) {
        return Err(Error::validation(
            "actuators",
            format!("{} actuators configured, run has {}", n, bad.f_x.len()),
        ));
    }

    let mut series = MetricsSeries {
        dt,
        time: time.to_vec(),
        actuators: Vec::with_capacity(n),
    };
    for (i, act) in actuators.iter().enumerate() {
        let coeffs = act.coefficients();
        let reduction = coeffs.reduction(&act.mechanics);
        let x0 = states.first().map_or(0.0, |s| s.x[i]);
        let mut m = ActuatorMetrics {
            name: act.name.clone(),
            ..Default::default()
        };
        let mut energy = 0.0;
        for s in states {
            let (v, f) = (s.v_x[i], s.f_x[i]);
            let p = v * f;
            energy += act.efficiency(f, v).input_power(p);
            m.v_x.push(v);
            m.f_x.push(f);
            m.psi1.push(p);
            m.psi2.push(f);
            m.psi3.push(dt * energy);
            m.psi4.push(electrical_efficiency(act, f, v));
            let load = coeffs.mass * s.a_x[i] + coeffs.damping * v + coeffs.stiffness * (s.x[i] - x0) + f;
            m.motor_torque.push(load / reduction);
        }
        series.actuators.push(m);
    }
    Ok(series)
}
