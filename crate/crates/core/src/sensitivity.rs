//! Finite-difference payload sensitivities and the payload sweep.
//!
//! The TCP motion does not depend on the payload, so the sweep solves the
//! inverse kinematics once and re-runs only the inverse dynamics and the
//! metrics for each perturbed payload.

use log::{debug, info};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actuator::Emla;
use crate::dynamics::rnea;
use crate::error::{Error, Result};
use crate::kinematics::{run_trajectory, Motion};
use crate::metrics::{evaluate_metrics, ActuatorSummary, MetricsSeries};
use crate::robot::RobotModel;
use crate::trajectory::TrajectorySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Forward,
    #[default]
    Central,
}

fn default_delta_m() -> f64 {
    1e-4
}

fn default_dt() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub m_min: f64,
    pub m_max: f64,
    pub n_points: usize,
    #[serde(default = "default_delta_m")]
    pub delta_m: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Keep every n-th sample in the stored series; aggregates use all samples.
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            m_min: 0.0,
            m_max: 200.0,
            n_points: 101,
            delta_m: default_delta_m(),
            scheme: Scheme::Central,
            dt: default_dt(),
            record_stride: 1,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.m_min >= 0.0 && self.m_min.is_finite()) {
            return Err(Error::validation("sweep.m_min", "must be finite and ≥ 0"));
        }
        if !(self.m_max.is_finite()) {
            return Err(Error::validation("sweep.m_max", "must be finite"));
        }
        if self.n_points == 0 {
            return Err(Error::validation("sweep.n_points", "must be ≥ 1"));
        }
        if self.n_points >= 2 && !(self.m_max > self.m_min) {
            return Err(Error::validation(
                "sweep.m_max",
                "must exceed m_min when n_points ≥ 2",
            ));
        }
        if self.n_points == 1 && self.m_max != self.m_min {
            return Err(Error::validation("sweep.m_max", "must equal m_min when n_points = 1"));
        }
        if !(self.delta_m > 0.0 && self.delta_m.is_finite()) {
            return Err(Error::validation("sweep.delta_m", "must be finite and > 0"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation("sweep.dt", "must be finite and > 0"));
        }
        if self.record_stride == 0 {
            return Err(Error::validation("sweep.record_stride", "must be ≥ 1"));
        }
        Ok(())
    }

    /// Evenly spaced payloads from `m_min` to `m_max` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![self.m_min];
        }
        let last = (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|k| {
                if k + 1 == self.n_points {
                    self.m_max
                } else {
                    self.m_min + (self.m_max - self.m_min) * k as f64 / last
                }
            })
            .collect()
    }
}

/// Payload derivatives of one actuator's traces.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ActuatorDerivative {
    pub d_psi1: Vec<f64>,
    pub d_psi2: Vec<f64>,
    pub d_psi3: Vec<f64>,
    /// Undefined where ψ₄ is undefined at either perturbed payload.
    pub d_psi4: Vec<Option<f64>>,
}

/// Payload derivatives of one actuator's aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SummaryDerivative {
    pub peak_power: f64,
    pub peak_force: f64,
    pub energy: f64,
    pub mean_efficiency: Option<f64>,
    pub peak_motor_torque: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityEntry {
    pub payload: f64,
    pub delta_m: f64,
    /// Scheme actually used; central falls back to forward when `m − Δ_m < 0`.
    pub scheme: Scheme,
    pub metrics: MetricsSeries,
    pub derivatives: Vec<ActuatorDerivative>,
    pub summaries: Vec<ActuatorSummary>,
    pub summary_derivatives: Vec<SummaryDerivative>,
}

impl SensitivityEntry {
    /// Same entry with every `stride`-th sample of the traces kept.
    pub fn decimate(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        fn every<T: Copy>(v: &[T], stride: usize) -> Vec<T> {
            v.iter().step_by(stride).copied().collect()
        }
        Self {
            metrics: self.metrics.decimate(stride),
            derivatives: self
                .derivatives
                .iter()
                .map(|d| ActuatorDerivative {
                    d_psi1: every(&d.d_psi1, stride),
                    d_psi2: every(&d.d_psi2, stride),
                    d_psi3: every(&d.d_psi3, stride),
                    d_psi4: every(&d.d_psi4, stride),
                })
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub delta_m: f64,
    pub dt: f64,
    pub record_stride: usize,
    pub actuator_names: Vec<String>,
    pub max_tracking_error: f64,
    pub damped_steps: usize,
    pub entries: Vec<SensitivityEntry>,
}

impl SensitivityReport {
    pub fn payloads(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.payload).collect()
    }
}

fn check_precision(m: f64, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::validation("delta_m", "must be finite and > 0"));
    }
    if (m + delta) - m < delta / 2.0 {
        return Err(Error::Precision {
            delta_m: delta,
            payload: m,
        });
    }
    Ok(())
}

fn difference(hi: &MetricsSeries, lo: &MetricsSeries, width: f64) -> Result<Vec<ActuatorDerivative>> {
    if hi.len() != lo.len() || hi.actuators.len() != lo.actuators.len() {
        return Err(Error::validation(
            "metrics",
            "perturbed runs produced differently shaped series",
        ));
    }
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) / width).collect();
    Ok(hi
        .actuators
        .iter()
        .zip(&lo.actuators)
        .map(|(a, b)| ActuatorDerivative {
            d_psi1: diff(&a.psi1, &b.psi1),
            d_psi2: diff(&a.psi2, &b.psi2),
            d_psi3: diff(&a.psi3, &b.psi3),
            d_psi4: a
                .psi4
                .iter()
                .zip(&b.psi4)
                .map(|(x, y)| Some((x.as_ref()? - y.as_ref()?) / width))
                .collect(),
        })
        .collect())
}

fn summary_difference(hi: &[ActuatorSummary], lo: &[ActuatorSummary], width: f64) -> Vec<SummaryDerivative> {
    hi.iter()
        .zip(lo)
        .map(|(a, b)| SummaryDerivative {
            peak_power: (a.peak_power - b.peak_power) / width,
            peak_force: (a.peak_force - b.peak_force) / width,
            energy: (a.energy - b.energy) / width,
            mean_efficiency: match (a.mean_efficiency, b.mean_efficiency) {
                (Some(x), Some(y)) => Some((x - y) / width),
                _ => None,
            },
            peak_motor_torque: (a.peak_motor_torque - b.peak_motor_torque) / width,
        })
        .collect()
}

/// Payload derivative of every metric trace at `m_tcp`.
///
/// The central scheme needs `m_tcp − Δ_m ≥ 0`; below that the forward
/// scheme is used and reported in the entry.
pub fn sensitivity_pd<F>(metric_fn: F, m_tcp: f64, delta_m: f64, scheme: Scheme) -> Result<SensitivityEntry>
where
    F: Fn(f64) -> Result<MetricsSeries>,
{
    check_precision(m_tcp, delta_m)?;
    let scheme = if scheme == Scheme::Central && m_tcp - delta_m < 0.0 {
        debug!("payload {m_tcp} kg: central difference would go negative, using forward");
        Scheme::Forward
    } else {
        scheme
    };
    let metrics = metric_fn(m_tcp)?;
    let summaries = metrics.summaries();
    let (derivatives, summary_derivatives) = match scheme {
        Scheme::Forward => {
            let hi = metric_fn(m_tcp + delta_m)?;
            (
                difference(&hi, &metrics, delta_m)?,
                summary_difference(&hi.summaries(), &summaries, delta_m),
            )
        }
        Scheme::Central => {
            let hi = metric_fn(m_tcp + delta_m)?;
            let lo = metric_fn(m_tcp - delta_m)?;
            (
                difference(&hi, &lo, 2.0 * delta_m)?,
                summary_difference(&hi.summaries(), &lo.summaries(), 2.0 * delta_m),
            )
        }
    };
    Ok(SensitivityEntry {
        payload: m_tcp,
        delta_m,
        scheme,
        metrics,
        derivatives,
        summaries,
        summary_derivatives,
    })
}

/// Inverse dynamics and metrics of a fixed motion carrying payload `m_tcp`.
pub fn metrics_for_payload(
    model: &RobotModel,
    motion: &Motion,
    actuators: &[Emla],
    m_tcp: f64,
) -> Result<MetricsSeries> {
    let loaded = model.with_payload(m_tcp)?;
    let states = motion
        .q
        .iter()
        .zip(&motion.qdot)
        .zip(&motion.qddot)
        .map(|((q, qd), qdd)| rnea(&loaded, q, qd, qdd).map(|d| d.actuators))
        .collect::<Result<Vec<_>>>()?;
    evaluate_metrics(&motion.time, &states, actuators, motion.dt)
}

fn check_actuators(model: &RobotModel, actuators: &[Emla]) -> Result<()> {
    if actuators.len() != model.dof() {
        return Err(Error::validation(
            "actuators",
            format!("{} actuators for {} joints", actuators.len(), model.dof()),
        ));
    }
    for (i, a) in actuators.iter().enumerate() {
        a.validate(&format!("actuators[{i}]"))?;
    }
    Ok(())
}

/// Sweep over a precomputed motion.
pub fn payload_sweep_motion(
    model: &RobotModel,
    motion: &Motion,
    actuators: &[Emla],
    sweep: &SweepSpec,
    threads: Option<usize>,
) -> Result<SensitivityReport> {
    sweep.validate()?;
    check_actuators(model, actuators)?;
    let grid = sweep.grid();
    let evaluate = |m: f64| {
        sensitivity_pd(
            |p| metrics_for_payload(model, motion, actuators, p),
            m,
            sweep.delta_m,
            sweep.scheme,
        )
        .map(|e| e.decimate(sweep.record_stride))
        .map_err(|source| Error::Payload {
            payload: m,
            source: Box::new(source),
        })
    };
    let results: Vec<Result<SensitivityEntry>> = match threads {
        Some(1) => grid.iter().map(|&m| evaluate(m)).collect(),
        _ => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = threads {
                builder = builder.num_threads(n);
            }
            let pool = builder
                .build()
                .map_err(|e| Error::validation("parallel", e.to_string()))?;
            pool.install(|| grid.par_iter().map(|&m| evaluate(m)).collect())
        }
    };
    let entries = results.into_iter().collect::<Result<Vec<_>>>()?;
    info!("swept {} payloads", entries.len());
    Ok(SensitivityReport {
        delta_m: sweep.delta_m,
        dt: motion.dt,
        record_stride: sweep.record_stride,
        actuator_names: actuators.iter().map(|a| a.name.clone()).collect(),
        max_tracking_error: motion.max_tracking_error(),
        damped_steps: motion.damped_steps,
        entries,
    })
}

/// Runs the trajectory once, then evaluates every payload on the grid.
///
/// `threads = None` uses all cores; the entry order always follows the grid.
pub fn payload_sweep(
    model: &RobotModel,
    trajectory: &TrajectorySpec,
    actuators: &[Emla],
    initial_q: &DVector<f64>,
    sweep: &SweepSpec,
    threads: Option<usize>,
) -> Result<SensitivityReport> {
    sweep.validate()?;
    check_actuators(model, actuators)?;
    let motion = run_trajectory(model, trajectory, sweep.dt, initial_q)?;
    info!(
        "tracked {} samples, max error {:.3e} m",
        motion.len(),
        motion.max_tracking_error()
    );
    payload_sweep_motion(model, &motion, actuators, sweep, threads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actuator::tests::{lossless, lossy};
    use crate::robot::load_model;
    use crate::trajectory::TrajectoryKind;

    fn slider(axis: &str) -> RobotModel {
        let text = format!(
            r#"{{"robot": {{
                "joints": [{{"kind": "prismatic", "screw": {{"angular": [0,0,0], "linear": {axis}}}, "limits": [-5, 5]}}],
                "link_inertias": [{{"mass": 20, "center_of_mass": [0,0,0], "rotational_inertia": [[0,0,0],[0,0,0],[0,0,0]]}}],
                "parent_transforms": [{{}}]
            }}}}"#
        );
        load_model(&text).unwrap()
    }

    fn line(velocity: [f64; 3]) -> TrajectorySpec {
        let mut t = TrajectorySpec::constant([0.0, 0.0, 0.0], 1.0);
        t.kind = TrajectoryKind::Linear;
        t.velocity = velocity;
        t
    }

    fn sweep(n: usize) -> SweepSpec {
        SweepSpec {
            m_min: 0.0,
            m_max: 10.0,
            n_points: n,
            dt: 1e-2,
            ..Default::default()
        }
    }

    #[test]
    fn grid_endpoints() {
        let g = SweepSpec::default().grid();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[50], 100.0);
        assert_eq!(g[100], 200.0);
    }

    #[test]
    fn degenerate_grid_rejected() {
        let mut s = sweep(2);
        s.m_max = s.m_min;
        assert!(s.validate().is_err());
        s = sweep(1);
        assert!(s.validate().is_err());
        s.m_max = 0.0;
        assert!(s.validate().is_ok());
        s.m_min = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn tiny_perturbation_rejected() {
        let e = sensitivity_pd(|_| Ok(MetricsSeries::default()), 50.0, 2e-24, Scheme::Forward);
        assert!(matches!(e, Err(Error::Precision { .. })), "{e:?}");
    }

    #[test]
    fn zero_payload_falls_back_to_forward() {
        let e = sensitivity_pd(|_| Ok(MetricsSeries::default()), 0.0, 1e-4, Scheme::Central).unwrap();
        assert_eq!(e.scheme, Scheme::Forward);
        let e = sensitivity_pd(|_| Ok(MetricsSeries::default()), 1.0, 1e-4, Scheme::Central).unwrap();
        assert_eq!(e.scheme, Scheme::Central);
    }

    #[test]
    fn vertical_slider_force_sensitivity_is_gravity() {
        let model = slider("[0,0,1]");
        let report = payload_sweep(
            &model,
            &line([0.0, 0.0, 0.1]),
            &[lossy()],
            &DVector::zeros(1),
            &sweep(3),
            Some(1),
        )
        .unwrap();
        for entry in &report.entries {
            for d in &entry.derivatives[0].d_psi2 {
                assert!((d - 9.81).abs() < 1e-6, "{d}");
            }
        }
    }

    #[test]
    fn horizontal_massless_metrics_independent_of_payload() {
        // gravity along the slider's normal; motion without acceleration
        let model = slider("[1,0,0]");
        let report = payload_sweep(
            &model,
            &line([0.1, 0.0, 0.0]),
            &[lossless()],
            &DVector::zeros(1),
            &sweep(2),
            Some(1),
        )
        .unwrap();
        for entry in &report.entries {
            let d = &entry.derivatives[0];
            assert!(d.d_psi1.iter().chain(&d.d_psi2).chain(&d.d_psi3).all(|v| v.abs() < 1e-8));
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let model = slider("[0,0,1]");
        let run = |threads| {
            payload_sweep(
                &model,
                &line([0.0, 0.0, 0.1]),
                &[lossy()],
                &DVector::zeros(1),
                &sweep(5),
                threads,
            )
            .unwrap()
        };
        assert_eq!(run(Some(1)), run(Some(3)));
    }

    #[test]
    fn stride_shortens_traces_not_summaries() {
        let model = slider("[0,0,1]");
        let full = payload_sweep(&model, &line([0.0, 0.0, 0.1]), &[lossy()], &DVector::zeros(1), &sweep(2), Some(1))
            .unwrap();
        let mut s = sweep(2);
        s.record_stride = 10;
        let thin = payload_sweep(&model, &line([0.0, 0.0, 0.1]), &[lossy()], &DVector::zeros(1), &s, Some(1)).unwrap();
        assert_eq!(full.entries[0].metrics.len(), 101);
        assert_eq!(thin.entries[0].metrics.len(), 11);
        assert_eq!(full.entries[1].summaries, thin.entries[1].summaries);
    }

    #[test]
    fn actuator_count_must_match() {
        let model = slider("[0,0,1]");
        let r = payload_sweep(&model, &line([0.0; 3]), &[lossy(), lossy()], &DVector::zeros(1), &sweep(2), Some(1));
        assert!(r.is_err());
    }
}
