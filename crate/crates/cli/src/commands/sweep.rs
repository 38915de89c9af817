use std::fs;
use std::path::Path;

use mildns::blowup::typei_functional;
use mildns::mild::{check_global_criterion, solve_local, Outcome};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::scenario::{parse_json, read_text, Scenario};

/// What each sweep point computes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepAction {
    /// March the scenario; optionally evaluate the type-I functional.
    Solve {
        #[serde(default)]
        p: Option<f64>,
    },
    /// Evaluate the global-existence criterion on the scenario data.
    GlobalCriterion {
        rho: f64,
        #[serde(default = "default_n0_max")]
        n0_max: usize,
        c_glob: f64,
        #[serde(default = "default_t_probe")]
        t_probe: f64,
    },
}

fn default_n0_max() -> usize {
    4
}

fn default_t_probe() -> f64 {
    1.0
}

/// A scenario template and one parameter varied over a list of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub template: Scenario,
    /// JSON pointer into the template, e.g. `/initial/generator/c`.
    pub parameter: String,
    pub values: Vec<serde_json::Value>,
    pub action: SweepAction,
}

impl SweepSpec {
    pub fn load(path: &Path) -> CliResult<SweepSpec> {
        let spec: SweepSpec = parse_json(&read_text(path)?, "sweep")?;
        spec.template.validate()?;
        if spec.values.is_empty() {
            return Err(CliError::config("sweep.values", "must not be empty"));
        }
        spec.instantiate(0)?;
        Ok(spec)
    }

    /// The template with the `i`-th value substituted.
    pub fn instantiate(&self, i: usize) -> CliResult<Scenario> {
        let mut v = serde_json::to_value(&self.template)?;
        let slot = v
            .pointer_mut(&self.parameter)
            .ok_or_else(|| CliError::config("sweep.parameter", format!("{} not found in template", self.parameter)))?;
        *slot = self.values[i].clone();
        let mut s: Scenario = serde_json::from_value(v)
            .map_err(|e| CliError::config(format!("sweep.values[{i}]"), e.to_string()))?;
        s.name = format!("{}-{i}", self.template.name);
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: String,
    pub status: String,
    pub t_end: f64,
    pub t_est: Option<f64>,
    pub declared_blowup: bool,
    pub max_omega: f64,
    /// Smallest type-I functional value along the trajectory.
    pub type_i_min: Option<f64>,
    pub type_i_max: Option<f64>,
    pub criterion_satisfied: Option<bool>,
    pub criterion_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub points: usize,
    pub declared_blowups: usize,
    /// Minimum of the type-I functional over runs with a declared blowup.
    pub type_i_minimum: Option<f64>,
    /// Largest swept index for which the global criterion held.
    pub last_satisfied: Option<usize>,
    pub caveat: String,
}

fn evaluate(spec: &SweepSpec, i: usize) -> CliResult<SweepRow> {
    let s = spec.instantiate(i)?;
    let grid = s.grid.build()?;
    let u0 = s.initial_data().build(&grid)?;
    let mut row = SweepRow {
        index: i,
        value: spec.values[i].to_string(),
        status: String::new(),
        t_end: 0.0,
        t_est: None,
        declared_blowup: false,
        max_omega: 0.0,
        type_i_min: None,
        type_i_max: None,
        criterion_satisfied: None,
        criterion_margin: None,
    };
    match &spec.action {
        SweepAction::Solve { p } => {
            let sol = match solve_local(&u0, &s.solver) {
                Ok(sol) => sol,
                Err(mildns::Error::Divergence(msg)) => {
                    row.status = format!("divergence: {msg}");
                    return Ok(row);
                }
                Err(e) => return Err(e.into()),
            };
            row.status = match sol.outcome {
                Outcome::ReachedHorizon => "reached_horizon",
                Outcome::DeclaredBlowup { .. } => "declared_blowup",
                Outcome::StepLimit { .. } => "step_limit",
            }
            .into();
            row.t_end = sol.trajectory.end();
            row.t_est = sol.t_est;
            row.declared_blowup = sol.t_est.is_some();
            row.max_omega = sol.trajectory.steps().iter().map(|r| r.omega).fold(0.0, f64::max);
            if let (Some(p), Some(t)) = (p, sol.t_est) {
                let before: Vec<usize> = (0..sol.trajectory.len()).filter(|&k| sol.trajectory.times()[k] < t).collect();
                if !before.is_empty() {
                    let kept = mildns::Trajectory::from_samples(
                        before.iter().map(|&k| sol.trajectory.times()[k]).collect(),
                        before.iter().map(|&k| sol.trajectory.fields()[k].clone()).collect(),
                    )?;
                    let trace = typei_functional(&kept, t, *p)?;
                    row.type_i_min = trace.values.iter().copied().reduce(f64::min);
                    row.type_i_max = trace.values.iter().copied().reduce(f64::max);
                }
            }
        }
        SweepAction::GlobalCriterion {
            rho,
            n0_max,
            c_glob,
            t_probe,
        } => {
            let r = check_global_criterion(&u0, *rho, *n0_max, *c_glob, *t_probe, &s.solver)?;
            row.status = if r.satisfied { "satisfied" } else { "not_satisfied" }.into();
            row.t_end = *t_probe;
            row.criterion_satisfied = Some(r.satisfied);
            row.criterion_margin = Some(r.margin);
        }
    }
    Ok(row)
}

/// Runs every sweep point on the current rayon pool and writes `sweep.csv`
/// and `sweep_summary.json` to `out_dir`. Rows are in sweep order.
pub fn run_sweep(spec: &SweepSpec, out_dir: &Path) -> CliResult<(Vec<SweepRow>, SweepSummary)> {
    let rows = (0..spec.values.len())
        .into_par_iter()
        .map(|i| evaluate(spec, i))
        .collect::<CliResult<Vec<_>>>()?;
    fs::create_dir_all(out_dir)?;
    let mut w = csv::Writer::from_path(out_dir.join("sweep.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    let summary = SweepSummary {
        points: rows.len(),
        declared_blowups: rows.iter().filter(|r| r.declared_blowup).count(),
        type_i_minimum: rows
            .iter()
            .filter(|r| r.declared_blowup)
            .filter_map(|r| r.type_i_min)
            .reduce(f64::min),
        last_satisfied: rows
            .iter()
            .filter(|r| r.criterion_satisfied == Some(true))
            .map(|r| r.index)
            .max(),
        caveat: "minima are taken over declared-blowup runs only; a declared blowup is a heuristic stop".into(),
    };
    fs::write(out_dir.join("sweep_summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok((rows, summary))
}
