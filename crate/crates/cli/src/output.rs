//! CSV and JSON writers for sweep results.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use emla_core::{SensitivityEntry, SensitivityReport};
use serde::Serialize;

use crate::CliError;

pub const METRICS_HEADER: &str =
    "t,payload,actuator,v_x,f_x,psi1,psi2,psi3_cum,psi4,d_psi1_dm,d_psi2_dm,d_psi3_dm,d_psi4_dm";
pub const SENSITIVITY_HEADER: &str = "payload,actuator,metric,value,d_dm";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn metrics_file_stem(payload: f64) -> String {
    format!("metrics_{payload:07.3}")
}

/// Time-resolved rows of one payload, one row per sample and actuator.
pub fn metrics_csv(entry: &SensitivityEntry) -> String {
    let mut out = String::new();
    out.push_str(METRICS_HEADER);
    out.push('\n');
    let m = &entry.metrics;
    for k in 0..m.len() {
        for (a, d) in m.actuators.iter().zip(&entry.derivatives) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                num(m.time[k]),
                num(entry.payload),
                a.name,
                num(a.v_x[k]),
                num(a.f_x[k]),
                num(a.psi1[k]),
                num(a.psi2[k]),
                num(a.psi3[k]),
                opt(a.psi4[k]),
                num(d.d_psi1[k]),
                num(d.d_psi2[k]),
                num(d.d_psi3[k]),
                opt(d.d_psi4[k]),
            );
        }
    }
    out
}

/// Aggregate metric names in `sensitivity.csv`.
pub const AGGREGATES: [&str; 4] = ["power_peak", "force_peak", "energy_total", "efficiency_mean"];

/// One row per payload, actuator and aggregate metric.
pub fn sensitivity_csv(report: &SensitivityReport) -> String {
    let mut out = String::new();
    out.push_str(SENSITIVITY_HEADER);
    out.push('\n');
    for e in &report.entries {
        for ((name, s), d) in report.actuator_names.iter().zip(&e.summaries).zip(&e.summary_derivatives) {
            let rows = [
                (Some(s.peak_power), Some(d.peak_power)),
                (Some(s.peak_force), Some(d.peak_force)),
                (Some(s.energy), Some(d.energy)),
                (s.mean_efficiency, d.mean_efficiency),
            ];
            for (metric, (value, pd)) in AGGREGATES.iter().zip(rows) {
                let _ = writeln!(out, "{},{name},{metric},{},{}", num(e.payload), opt(value), opt(pd));
            }
        }
    }
    out
}

#[derive(Serialize)]
struct ActuatorTotals<'a> {
    name: &'a str,
    energy: f64,
    d_energy_dm: f64,
    peak_power: f64,
    peak_force: f64,
    peak_motor_torque: f64,
    mean_efficiency: Option<f64>,
    min_efficiency: Option<f64>,
    max_efficiency: Option<f64>,
    undefined_efficiency_samples: usize,
}

#[derive(Serialize)]
struct PayloadSummary<'a> {
    payload: f64,
    scheme: emla_core::Scheme,
    actuators: Vec<ActuatorTotals<'a>>,
}

#[derive(Serialize)]
struct Summary<'a> {
    dt: f64,
    delta_m: f64,
    record_stride: usize,
    payloads: usize,
    max_tracking_error: f64,
    damped_steps: usize,
    results: Vec<PayloadSummary<'a>>,
}

pub fn summary_json(report: &SensitivityReport) -> String {
    let results = report
        .entries
        .iter()
        .map(|e| PayloadSummary {
            payload: e.payload,
            scheme: e.scheme,
            actuators: report
                .actuator_names
                .iter()
                .zip(&e.summaries)
                .zip(&e.summary_derivatives)
                .map(|((name, s), d)| ActuatorTotals {
                    name,
                    energy: s.energy,
                    d_energy_dm: d.energy,
                    peak_power: s.peak_power,
                    peak_force: s.peak_force,
                    peak_motor_torque: s.peak_motor_torque,
                    mean_efficiency: s.mean_efficiency,
                    min_efficiency: s.min_efficiency,
                    max_efficiency: s.max_efficiency,
                    undefined_efficiency_samples: s.undefined_efficiency,
                })
                .collect(),
        })
        .collect();
    let summary = Summary {
        dt: report.dt,
        delta_m: report.delta_m,
        record_stride: report.record_stride,
        payloads: report.entries.len(),
        max_tracking_error: report.max_tracking_error,
        damped_steps: report.damped_steps,
        results,
    };
    let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
    s.push('\n');
    s
}

pub fn entry_json(entry: &SensitivityEntry) -> String {
    let mut s = serde_json::to_string(entry).expect("entry serializes");
    s.push('\n');
    s
}

pub fn report_json(report: &SensitivityReport) -> String {
    #[derive(Serialize)]
    struct Row<'a> {
        payload: f64,
        actuator: &'a str,
        summary: &'a emla_core::ActuatorSummary,
        derivative: &'a emla_core::sensitivity::SummaryDerivative,
    }
    let rows: Vec<Row> = report
        .entries
        .iter()
        .flat_map(|e| {
            report
                .actuator_names
                .iter()
                .zip(&e.summaries)
                .zip(&e.summary_derivatives)
                .map(move |((name, s), d)| Row {
                    payload: e.payload,
                    actuator: name,
                    summary: s,
                    derivative: d,
                })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
    s.push('\n');
    s
}

/// Files written so far, removed again if the run fails.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub written: Vec<PathBuf>,
    created_dir: Option<PathBuf>,
}

impl Artifacts {
    pub fn prepare_dir(&mut self, dir: &Path) -> Result<(), CliError> {
        if !dir.exists() {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            self.created_dir = Some(dir.to_path_buf());
        }
        Ok(())
    }

    pub fn write(&mut self, path: PathBuf, contents: &str) -> Result<(), CliError> {
        let io = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        let mut f = std::fs::File::create(&path).map_err(io)?;
        self.written.push(path.clone());
        f.write_all(contents.as_bytes()).map_err(io)?;
        Ok(())
    }

    pub fn remove_all(&mut self) {
        for p in self.written.drain(..) {
            let _ = std::fs::remove_file(p);
        }
        if let Some(dir) = self.created_dir.take() {
            let _ = std::fs::remove_dir(dir);
        }
    }
}
