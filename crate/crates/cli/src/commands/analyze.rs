use std::fs;
use std::path::Path;

use mildns::blowup::diagnose;
use mildns::io::load_trajectory;
use mildns::mild::xspace_norm;
use serde::{Deserialize, Serialize};

use super::run::{divergence_ratio, write_samples_csv};
use crate::error::{CliError, CliResult};
use crate::scenario::{parse_json, read_text, Diagnostic};

/// Post-hoc analysis of a stored trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSpec {
    #[serde(default = "default_diagnostics")]
    pub diagnostics: Vec<Diagnostic>,
}

fn default_diagnostics() -> Vec<Diagnostic> {
    vec![Diagnostic::Energy]
}

impl Default for AnalyzeSpec {
    fn default() -> AnalyzeSpec {
        AnalyzeSpec {
            diagnostics: default_diagnostics(),
        }
    }
}

impl AnalyzeSpec {
    pub fn load(path: &Path) -> CliResult<AnalyzeSpec> {
        parse_json(&read_text(path)?, "analyze")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeSummary {
    pub samples: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub max_divergence_ratio: f64,
    pub xspace: Vec<(f64, f64)>,
    pub diagnosed: usize,
}

/// Reads a trajectory file and writes `samples.csv`, `analysis.json` and,
/// for blowup diagnostics with a blowup time, `diagnostics.json`.
pub fn run_analyze(trajectory: &Path, spec: &AnalyzeSpec, out_dir: &Path) -> CliResult<AnalyzeSummary> {
    let traj = load_trajectory(trajectory)?;
    fs::create_dir_all(out_dir)?;
    write_samples_csv(&out_dir.join("samples.csv"), &traj)?;
    let mut xspace = Vec::new();
    let mut reports = Vec::new();
    for (i, d) in spec.diagnostics.iter().enumerate() {
        match d {
            Diagnostic::Energy => {}
            Diagnostic::Xspace { p } => xspace.push((*p, xspace_norm(&traj, *p)?)),
            Diagnostic::Blowup { t_blow, .. } => {
                let t = t_blow.ok_or_else(|| {
                    CliError::config(format!("analyze.diagnostics[{i}].t_blow"), "required for stored trajectories")
                })?;
                if !(t > traj.end()) {
                    return Err(CliError::config(
                        format!("analyze.diagnostics[{i}].t_blow"),
                        format!("must exceed the last stored time {}", traj.end()),
                    ));
                }
                reports.push(diagnose(&traj, t, &d.blowup_config().expect("blowup variant"))?);
            }
        }
    }
    if !reports.is_empty() {
        fs::write(out_dir.join("diagnostics.json"), serde_json::to_string_pretty(&reports)?)?;
    }
    let summary = AnalyzeSummary {
        samples: traj.len(),
        t_start: traj.start(),
        t_end: traj.end(),
        max_divergence_ratio: divergence_ratio(&traj),
        xspace,
        diagnosed: reports.len(),
    };
    fs::write(out_dir.join("analysis.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}
