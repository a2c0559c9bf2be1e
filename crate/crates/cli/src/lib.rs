//! Batch runner: loads a run config, sweeps the payload grid and writes
//! per-payload metric traces, the aggregate sensitivity table, a JSON
//! summary and optional SVG charts.

pub mod config;
pub mod output;
pub mod plot;

use std::path::{Path, PathBuf};
use std::time::Instant;

use emla_core::kinematics::sample_count;
use emla_core::{payload_sweep, SensitivityReport};
use log::{info, warn};

pub use config::{Prepared, RunConfig};
use output::Artifacts;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: emla_core::Error,
    },
    #[error(transparent)]
    Core(#[from] emla_core::Error),
}

impl CliError {
    /// 1 for configuration and I/O problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) | CliError::Config { source: e, .. } if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub plots: bool,
    /// Worker threads; `None` uses every core.
    pub parallel: Option<usize>,
    pub format: Format,
    pub dry_run: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    /// `None` for a dry run.
    pub report: Option<SensitivityReport>,
    pub files: Vec<PathBuf>,
}

/// Describes what a run would do without doing it.
pub fn plan(prepared: &Prepared, opts: &RunOptions) -> String {
    let c = &prepared.config;
    let samples = sample_count(c.trajectory.total_time(), c.sweep.dt);
    let ext = match opts.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let grid = c.sweep.grid();
    format!(
        "robot: {} joints ({})\n\
         trajectory: {:?}, {:.4} s at dt = {} s -> {samples} samples\n\
         payloads: {} from {} to {} kg, delta_m = {} kg ({:?})\n\
         output: {} metrics_*.{ext}, sensitivity.{ext}, summary.json{} in {}",
        prepared.model.dof(),
        prepared.model.joints.iter().map(|j| j.name.as_str()).collect::<Vec<_>>().join(", "),
        c.trajectory.kind,
        c.trajectory.total_time(),
        c.sweep.dt,
        grid.len(),
        grid[0],
        grid[grid.len() - 1],
        c.sweep.delta_m,
        c.sweep.scheme,
        grid.len(),
        if opts.plots { ", 4 SVG charts" } else { "" },
        opts.out.display(),
    )
}

pub fn run(opts: &RunOptions) -> Result<RunOutcome, CliError> {
    if !opts.config.exists() {
        return Err(CliError::Io {
            path: opts.config.clone(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "config file not found"),
        });
    }
    if opts.parallel == Some(0) {
        return Err(emla_core::Error::validation("parallel", "must be ≥ 1").into());
    }
    let prepared = RunConfig::load(&opts.config)?;
    if opts.dry_run {
        println!("{}", plan(&prepared, opts));
        return Ok(RunOutcome {
            report: None,
            files: Vec::new(),
        });
    }
    let started = Instant::now();
    let c = &prepared.config;
    let report = payload_sweep(
        &prepared.model,
        &c.trajectory,
        &c.actuators,
        &prepared.initial_q,
        &c.sweep,
        opts.parallel,
    )?;
    info!("sweep finished in {:.2} s", started.elapsed().as_secs_f64());

    let mut artifacts = Artifacts::default();
    match write_all(&report, opts, &mut artifacts) {
        Ok(()) => Ok(RunOutcome {
            report: Some(report),
            files: artifacts.written,
        }),
        Err(e) => {
            artifacts.remove_all();
            Err(e)
        }
    }
}

fn write_all(report: &SensitivityReport, opts: &RunOptions, artifacts: &mut Artifacts) -> Result<(), CliError> {
    let out = &opts.out;
    artifacts.prepare_dir(out)?;
    for entry in &report.entries {
        let stem = output::metrics_file_stem(entry.payload);
        match opts.format {
            Format::Csv => artifacts.write(out.join(format!("{stem}.csv")), &output::metrics_csv(entry))?,
            Format::Json => artifacts.write(out.join(format!("{stem}.json")), &output::entry_json(entry))?,
        }
    }
    match opts.format {
        Format::Csv => artifacts.write(out.join("sensitivity.csv"), &output::sensitivity_csv(report))?,
        Format::Json => artifacts.write(out.join("sensitivity.json"), &output::report_json(report))?,
    }
    artifacts.write(out.join("summary.json"), &output::summary_json(report))?;
    if opts.plots {
        for (i, chart) in plot::CHARTS.iter().enumerate() {
            if let Err(e) = artifacts.write(out.join(chart.file), &plot::render(report, i)) {
                warn!("skipping plot {}: {e}", chart.file);
            }
        }
    }
    Ok(())
}

/// Convenience for callers that only have a path.
pub fn load(path: &Path) -> Result<Prepared, CliError> {
    RunConfig::load(path)
}
