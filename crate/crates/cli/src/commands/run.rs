use std::fs;
use std::path::Path;

use mildns::blowup::diagnose;
use mildns::io::save_trajectory;
use mildns::mild::{solve_local, xspace_norm, LocalSolution, Outcome};
use mildns::Trajectory;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::scenario::{Diagnostic, Scenario};

/// Bound on the relative longitudinal part of every stored sample.
pub const DIVERGENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub outcome: Outcome,
    pub t_est: Option<f64>,
    pub t_end: f64,
    pub steps: usize,
    pub samples: usize,
    pub final_energy: f64,
    pub max_omega: f64,
    /// Worst relative longitudinal part `max_k |k · c_k| / (|k| ‖c‖_ℓ²)`.
    pub max_divergence_ratio: f64,
    pub xspace: Vec<(f64, f64)>,
    pub unconverged_steps: usize,
}

pub fn divergence_ratio(traj: &Trajectory) -> f64 {
    traj.fields().iter().map(|f| f.divergence_defect()).fold(0.0, f64::max)
}

pub(crate) fn write_samples_csv(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "energy", "l2", "sup", "max_divergence", "divergence_defect"])?;
    for (t, f) in traj.times().iter().zip(traj.fields()) {
        w.write_record([
            t.to_string(),
            f.energy().to_string(),
            f.l2_norm().to_string(),
            f.sup_norm().to_string(),
            f.max_divergence().to_string(),
            f.divergence_defect().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_steps_csv(path: &Path, traj: &Trajectory) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for s in traj.steps() {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// Solves a scenario and writes its artifacts to `out_dir`:
/// `scenario.json`, `trajectory.bin`, `steps.csv`, `samples.csv`,
/// `summary.json` and, when requested, `diagnostics.json`.
///
/// Fails with an assertion error after writing everything if a stored
/// sample violates the divergence bound.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> CliResult<RunSummary> {
    let grid = scenario.grid.build()?;
    let u0 = scenario.initial_data().build(&grid)?;
    let LocalSolution {
        trajectory,
        outcome,
        t_est,
    } = solve_local(&u0, &scenario.solver)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("scenario.json"), scenario.to_json()?)?;
    save_trajectory(&out_dir.join("trajectory.bin"), &trajectory)?;
    write_steps_csv(&out_dir.join("steps.csv"), &trajectory)?;
    write_samples_csv(&out_dir.join("samples.csv"), &trajectory)?;

    let mut xspace = Vec::new();
    let mut reports = Vec::new();
    for d in &scenario.diagnostics {
        match d {
            Diagnostic::Energy => {}
            Diagnostic::Xspace { p } => xspace.push((*p, xspace_norm(&trajectory, *p)?)),
            Diagnostic::Blowup { t_blow, .. } => {
                let config = d.blowup_config().expect("blowup variant");
                match t_est.or(*t_blow) {
                    Some(t) if t > trajectory.end() => reports.push(diagnose(&trajectory, t, &config)?),
                    Some(t) => {
                        let kept = truncate_before(&trajectory, t)?;
                        reports.push(diagnose(&kept, t, &config)?)
                    }
                    None => {}
                }
            }
        }
    }
    if !reports.is_empty() {
        fs::write(out_dir.join("diagnostics.json"), serde_json::to_string_pretty(&reports)?)?;
    }

    let summary = RunSummary {
        name: scenario.name.clone(),
        outcome,
        t_est,
        t_end: trajectory.end(),
        steps: trajectory.steps().len(),
        samples: trajectory.len(),
        final_energy: trajectory.last().energy(),
        max_omega: trajectory.steps().iter().map(|s| s.omega).fold(0.0, f64::max),
        max_divergence_ratio: divergence_ratio(&trajectory),
        xspace,
        unconverged_steps: trajectory.steps().iter().filter(|s| !s.converged).count(),
    };
    fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    if !(summary.max_divergence_ratio <= DIVERGENCE_TOL) {
        return Err(CliError::Assertion(format!(
            "divergence ratio {:e} exceeds {DIVERGENCE_TOL:e}",
            summary.max_divergence_ratio
        )));
    }
    Ok(summary)
}

/// Samples strictly before `t`; diagnostics are undefined at the blowup time.
fn truncate_before(traj: &Trajectory, t: f64) -> CliResult<Trajectory> {
    let (times, fields): (Vec<f64>, Vec<_>) = traj
        .times()
        .iter()
        .zip(traj.fields())
        .filter(|(s, _)| **s < t)
        .map(|(s, f)| (*s, f.clone()))
        .unzip();
    if times.is_empty() {
        return Err(CliError::Assertion(format!("no samples before t = {t}")));
    }
    Ok(Trajectory::from_samples(times, fields)?)
}
