//! Scenario manifests.

use std::path::{Path, PathBuf};

use mildns::blowup::DiagnosticsConfig;
use mildns::initial::{Generator, InitialDataSpec};
use mildns::mild::SolverConfig;
use mildns::GridSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Environment variable naming the directory that relative outputs live under.
pub const OUT_ROOT_VAR: &str = "MILDNS_OUT_ROOT";

/// Post-processing attached to a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Diagnostic {
    /// Per-sample energy, sup norm and divergence.
    Energy,
    /// `‖u‖_{L^∞_t L^p_x}` over the stored trajectory.
    Xspace { p: f64 },
    /// Blowup diagnostics at the declared or given blowup time.
    Blowup {
        c_conc: f64,
        #[serde(default = "default_ball")]
        ball_multiplier: f64,
        #[serde(default)]
        p: Option<f64>,
        /// Used when the solver does not declare a blowup.
        #[serde(default)]
        t_blow: Option<f64>,
    },
}

fn default_ball() -> f64 {
    DiagnosticsConfig::new(1.0).ball_multiplier
}

impl Diagnostic {
    pub fn blowup_config(&self) -> Option<DiagnosticsConfig> {
        match *self {
            Diagnostic::Blowup {
                c_conc,
                ball_multiplier,
                p,
                ..
            } => Some(DiagnosticsConfig {
                c_conc,
                ball_multiplier,
                p,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub initial: InitialDataSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
    /// Output directory, relative to the output root unless absolute.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Replaces the seed of random generators when present.
    #[serde(default)]
    pub seed: Option<u64>,
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::config(what, e.to_string()))
}

impl Scenario {
    pub fn from_json(text: &str) -> CliResult<Scenario> {
        let s: Scenario = parse_json(text, "scenario")?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> CliResult<Scenario> {
        Scenario::from_json(&read_text(path)?)
    }

    pub fn to_json(&self) -> CliResult<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(CliError::config("scenario.name", "must be a nonempty file name"));
        }
        self.grid
            .build()
            .map_err(|e| CliError::config("scenario.grid", e.to_string()))?;
        self.solver.validate().map_err(|e| CliError::config("scenario.solver", e.to_string()))?;
        for (i, d) in self.diagnostics.iter().enumerate() {
            match d {
                Diagnostic::Xspace { p } if !(*p >= 1.0) => {
                    return Err(CliError::config(format!("scenario.diagnostics[{i}].p"), "must be >= 1"));
                }
                Diagnostic::Blowup { c_conc, .. } if !(*c_conc > 0.0) => {
                    return Err(CliError::config(
                        format!("scenario.diagnostics[{i}].c_conc"),
                        "must be positive",
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Applies command-line overrides.
    pub fn with_overrides(mut self, seed: Option<u64>, stride: Option<usize>) -> CliResult<Scenario> {
        if seed.is_some() {
            self.seed = seed;
        }
        if let Some(k) = stride {
            if k == 0 {
                return Err(CliError::config("--stride", "must be at least 1"));
            }
            self.solver.save_stride = k;
        }
        Ok(self)
    }

    /// The initial data with the scenario seed applied.
    pub fn initial_data(&self) -> InitialDataSpec {
        let mut spec = self.initial.clone();
        if let (Some(s), Generator::RandomDivfree { seed, .. }) = (self.seed, &mut spec.generator) {
            *seed = s;
        }
        spec
    }

    /// Output directory: `out` when given, else the scenario output (or its
    /// name) under the output root.
    pub fn output_dir(&self, out: Option<&Path>) -> PathBuf {
        if let Some(dir) = out {
            return dir.to_path_buf();
        }
        let rel = self.output.clone().unwrap_or_else(|| PathBuf::from(&self.name));
        if rel.is_absolute() {
            rel
        } else {
            output_root().join(rel)
        }
    }
}

pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "name": "tg",
        "initial": {"generator": {"kind": "taylor_green", "amplitude": 1.0}},
        "grid": {"dim": 2, "n": 16},
        "solver": {"t_horizon": 0.5},
        "diagnostics": [{"kind": "energy"}, {"kind": "blowup", "c_conc": 0.01, "p": 6.0}]
    }"#;

    #[test]
    fn round_trip_is_identity() {
        let s = Scenario::from_json(SAMPLE).unwrap();
        let again = Scenario::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, again);
        assert_eq!(s.solver.t_horizon, 0.5);
    }

    #[test]
    fn unknown_fields_are_config_errors() {
        let bad = SAMPLE.replace("\"name\"", "\"nmae\"");
        let err = Scenario::from_json(&bad).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invalid_solver_reports_field_path() {
        let bad = SAMPLE.replace("\"t_horizon\": 0.5", "\"t_horizon\": -1.0");
        let err = Scenario::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("scenario.solver"), "{err}");
        assert!(err.contains("t_horizon"), "{err}");
    }

    #[test]
    fn seed_override_reaches_random_generator() {
        let text = SAMPLE.replace(
            r#"{"kind": "taylor_green", "amplitude": 1.0}"#,
            r#"{"kind": "random_divfree", "seed": 1, "amplitude": 1.0, "k_min": 1, "k_max": 4}"#,
        );
        let s = Scenario::from_json(&text).unwrap().with_overrides(Some(9), Some(3)).unwrap();
        assert_eq!(s.solver.save_stride, 3);
        match s.initial_data().generator {
            Generator::RandomDivfree { seed, .. } => assert_eq!(seed, 9),
            _ => unreachable!(),
        }
    }
}
