//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string so the page
//! needs no generated TypeScript glue beyond `wasm-bindgen --target web`.

use emla_core::sensitivity::{payload_sweep, Scheme, SweepSpec};
use emla_core::{run_trajectory, Emla, RobotModel, TrajectorySpec};
use nalgebra::DVector;
use serde::Serialize;
use serde_json::Value;
use wasm_bindgen::prelude::*;

const ROBOT: &str = include_str!("../../../configs/hdmm_3dof.robot.json");
const RUN: &str = include_str!("../../../configs/hdmm_3dof.json");

fn model() -> RobotModel {
    emla_core::load_model(ROBOT).expect("bundled robot is valid")
}

fn actuators() -> Vec<Emla> {
    let run: Value = serde_json::from_str(RUN).expect("bundled run config is JSON");
    serde_json::from_value(run["actuators"].clone()).expect("bundled actuators are valid")
}

fn seed() -> DVector<f64> {
    DVector::from_vec(vec![0.0, 0.0, 1.0])
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn error_json(e: impl std::fmt::Display) -> String {
    to_json(&serde_json::json!({ "error": e.to_string() }))
}

#[derive(Debug, Serialize)]
pub struct EfficiencyGrid {
    pub actuator: String,
    pub forces: Vec<f64>,
    pub velocities: Vec<f64>,
    /// Row-major over forces; `null` where undefined.
    pub eta: Vec<Option<f64>>,
}

/// Efficiency of bundled actuator `index` over a force × velocity grid.
pub fn efficiency_grid(
    index: usize,
    f_max: f64,
    v_max: f64,
    n: usize,
) -> Result<EfficiencyGrid, String> {
    let acts = actuators();
    let act = acts
        .get(index)
        .ok_or_else(|| format!("actuator index {index} out of range"))?;
    let map = act
        .efficiency_map((-f_max, f_max), (-v_max, v_max), n, n)
        .map_err(|e| e.to_string())?;
    let eta = (0..map.forces.len())
        .flat_map(|i| (0..map.velocities.len()).map(move |j| (i, j)))
        .map(|(i, j)| Some(map.eta[(i, j)]).filter(|v| v.is_finite()))
        .collect();
    Ok(EfficiencyGrid {
        actuator: act.name.clone(),
        forces: map.forces,
        velocities: map.velocities,
        eta,
    })
}

#[derive(Debug, Serialize)]
pub struct TrackingPreview {
    pub time: Vec<f64>,
    /// `[x, y, z]` per sample.
    pub reference: Vec<[f64; 3]>,
    pub actual: Vec<[f64; 3]>,
    pub tracking_error: Vec<f64>,
    pub max_error: f64,
    pub joints: Vec<Vec<f64>>,
}

/// Tracks a spiral around the bundled centre and returns every `stride`-th sample.
pub fn tracking_preview(r0: f64, r1: f64, k_z: f64, omega: f64, turns: f64, dt: f64) -> Result<TrackingPreview, String> {
    let m = model();
    let mut spec = TrajectorySpec::spiral([4.2, 0.0, 1.2], r0, r1, k_z);
    spec.omega = omega;
    spec.duration = if omega > 0.0 { turns * std::f64::consts::TAU / omega } else { 0.0 };
    let motion = run_trajectory(&m, &spec, dt, &seed()).map_err(|e| e.to_string())?;
    let stride = (motion.len() / 1500).max(1);
    let mut out = TrackingPreview {
        time: Vec::new(),
        reference: Vec::new(),
        actual: Vec::new(),
        tracking_error: Vec::new(),
        max_error: motion.max_tracking_error(),
        joints: vec![Vec::new(); m.dof()],
    };
    for k in (0..motion.len()).step_by(stride) {
        let t = motion.time[k];
        let r = spec.evaluate(t).map_err(|e| e.to_string())?.position;
        let p = m.tcp_position(&motion.q[k]);
        out.time.push(t);
        out.reference.push([r.x, r.y, r.z]);
        out.actual.push([p.x, p.y, p.z]);
        out.tracking_error.push(motion.tracking_error[k]);
        for (i, j) in out.joints.iter_mut().enumerate() {
            j.push(motion.q[k][i]);
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct SweepCurve {
    pub actuator: String,
    pub peak_force: Vec<f64>,
    pub d_peak_force: Vec<f64>,
    pub energy: Vec<f64>,
    pub d_energy: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepPreview {
    pub payloads: Vec<f64>,
    pub curves: Vec<SweepCurve>,
}

/// Payload sweep of the bundled robot over `seconds` of the spiral.
pub fn sweep_preview(m_max: f64, n_points: usize, seconds: f64) -> Result<SweepPreview, String> {
    let m = model();
    let acts = actuators();
    let mut spec = TrajectorySpec::spiral([4.2, 0.0, 1.2], 0.4, 0.02, 0.02);
    spec.duration = seconds;
    let sweep = SweepSpec {
        m_min: 0.0,
        m_max,
        n_points,
        delta_m: 1e-4,
        scheme: Scheme::Central,
        dt: 2e-3,
        record_stride: usize::MAX,
    };
    let report = payload_sweep(&m, &spec, &acts, &seed(), &sweep, Some(1)).map_err(|e| e.to_string())?;
    let curves = acts
        .iter()
        .enumerate()
        .map(|(i, a)| SweepCurve {
            actuator: a.name.clone(),
            peak_force: report.entries.iter().map(|e| e.summaries[i].peak_force).collect(),
            d_peak_force: report.entries.iter().map(|e| e.summary_derivatives[i].peak_force).collect(),
            energy: report.entries.iter().map(|e| e.summaries[i].energy).collect(),
            d_energy: report.entries.iter().map(|e| e.summary_derivatives[i].energy).collect(),
        })
        .collect();
    Ok(SweepPreview {
        payloads: report.payloads(),
        curves,
    })
}

#[wasm_bindgen]
pub fn efficiency_map(index: usize, f_max: f64, v_max: f64, n: usize) -> String {
    efficiency_grid(index, f_max, v_max, n).map_or_else(error_json, |g| to_json(&g))
}

#[wasm_bindgen]
pub fn track_spiral(r0: f64, r1: f64, k_z: f64, omega: f64, turns: f64, dt: f64) -> String {
    tracking_preview(r0, r1, k_z, omega, turns, dt).map_or_else(error_json, |p| to_json(&p))
}

#[wasm_bindgen]
pub fn payload_sensitivity(m_max: f64, n_points: usize, seconds: f64) -> String {
    sweep_preview(m_max, n_points, seconds).map_or_else(error_json, |s| to_json(&s))
}

#[wasm_bindgen]
pub fn actuator_names() -> String {
    to_json(&actuators().iter().map(|a| a.name.clone()).collect::<Vec<_>>())
}
