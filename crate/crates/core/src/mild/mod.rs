//! Mild solutions of the incompressible Navier-Stokes equations
//!
//! ```text
//! u(t) = e^{tΔ} u₀ - ∫₀ᵗ e^{(t-s)Δ} ℙ ∇·(u ⊗ u)(s) ds
//! ```
//!
//! marched interval by interval with exponential collocation, together with
//! the Picard iteration of the same integral equation and the diagnostics
//! built on its iterates.

mod collocation;
mod duhamel;
mod march;
mod picard;

pub use duhamel::bilinear_b;
pub use march::{solve_local, solve_perturbed, xspace_norm};
pub use picard::{
    check_global_criterion, frequency_support_tracker, picard_iterate, CauchyCheck, CriterionEntry,
    GlobalCriterionReport, IterationRecord, PicardOutcome, SupportRecord,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::trajectory::Trajectory;

/// Mass fraction that frequency thresholds and radii are allowed to miss.
pub const SUPPORT_MASS_TOL: f64 = 1e-8;

fn default_c_solve() -> f64 {
    1.0
}
fn default_nodes() -> usize {
    16
}
fn default_horizon() -> f64 {
    1.0
}
fn default_stride() -> usize {
    1
}
fn default_picard_tol() -> f64 {
    1e-10
}
fn default_max_sweeps() -> usize {
    25
}
fn default_max_halvings() -> usize {
    6
}
fn default_omega_cap() -> f64 {
    1e6
}
fn default_dt_floor() -> f64 {
    1e-12
}
fn default_max_steps() -> usize {
    1_000_000
}
fn default_picard_intervals() -> usize {
    4
}

/// Parameters of the interval marcher and of the Picard lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Constant `C` in the interval law `h = (8 C² ω)^{-2}`.
    #[serde(default = "default_c_solve")]
    pub c_solve: f64,
    /// Gauss-Legendre collocation nodes per interval.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_horizon")]
    pub t_horizon: f64,
    /// Exponent of the `L^p` norm recorded at every step, if any.
    #[serde(default)]
    pub norm_p: Option<f64>,
    /// Keep every `save_stride`-th field in the trajectory.
    #[serde(default = "default_stride")]
    pub save_stride: usize,
    /// Relative tolerance of the fixed-point sweeps inside an interval.
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
    #[serde(default = "default_max_halvings")]
    pub max_halvings: usize,
    /// Blowup is declared once `ω(t) > omega_cap · ω(0)`.
    #[serde(default = "default_omega_cap")]
    pub omega_cap: f64,
    /// Blowup is declared once the interval length drops below this.
    #[serde(default = "default_dt_floor")]
    pub dt_floor: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Number of collocation intervals of the Picard time lattice.
    #[serde(default = "default_picard_intervals")]
    pub picard_intervals: usize,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            c_solve: default_c_solve(),
            nodes: default_nodes(),
            t_horizon: default_horizon(),
            norm_p: None,
            save_stride: default_stride(),
            picard_tol: default_picard_tol(),
            max_sweeps: default_max_sweeps(),
            max_halvings: default_max_halvings(),
            omega_cap: default_omega_cap(),
            dt_floor: default_dt_floor(),
            max_steps: default_max_steps(),
            picard_intervals: default_picard_intervals(),
        }
    }
}

impl SolverConfig {
    pub fn with_horizon(mut self, t: f64) -> SolverConfig {
        self.t_horizon = t;
        self
    }

    pub fn with_nodes(mut self, nodes: usize) -> SolverConfig {
        self.nodes = nodes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::Config(format!("solver.{field}: {why}")));
        if !(self.c_solve.is_finite() && self.c_solve > 0.0) {
            return bad("c_solve", "must be positive");
        }
        if !(1..=64).contains(&self.nodes) {
            return bad("nodes", "must lie in 1..=64");
        }
        if !(self.t_horizon.is_finite() && self.t_horizon > 0.0) {
            return bad("t_horizon", "must be positive and finite");
        }
        if let Some(p) = self.norm_p {
            if !(p >= 1.0) {
                return bad("norm_p", "must be >= 1");
            }
        }
        if self.save_stride == 0 {
            return bad("save_stride", "must be at least 1");
        }
        if !(self.picard_tol > 0.0) {
            return bad("picard_tol", "must be positive");
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps", "must be at least 1");
        }
        if !(self.omega_cap > 1.0) {
            return bad("omega_cap", "must exceed 1");
        }
        if !(self.dt_floor > 0.0) {
            return bad("dt_floor", "must be positive");
        }
        if self.picard_intervals == 0 {
            return bad("picard_intervals", "must be at least 1");
        }
        Ok(())
    }
}

/// Why a declared blowup was declared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupCause {
    OmegaCap,
    StepFloor,
}

/// How a march ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    ReachedHorizon,
    /// Heuristic stop; nothing is certified about a singularity.
    DeclaredBlowup { cause: BlowupCause, t: f64 },
    StepLimit { t: f64 },
}

/// A marched trajectory with its existence-time estimate.
#[derive(Debug, Clone)]
pub struct LocalSolution {
    pub trajectory: Trajectory,
    pub outcome: Outcome,
    /// Declared blowup time; `None` stands for no blowup seen (`T = ∞`).
    pub t_est: Option<f64>,
}

/// Smallest `|ξ|` radius holding all but [`SUPPORT_MASS_TOL`] of the mass.
pub fn spectral_radius(f: &SpectralField) -> f64 {
    let g = f.grid();
    let top = g.k2().iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0.0; top + 1];
    for idx in 0..g.len() {
        hist[g.k2()[idx] as usize] += f.components().iter().map(|c| c[idx].norm_sqr()).sum::<f64>();
    }
    let total: f64 = hist.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut above = 0.0;
    for k2 in (0..=top).rev() {
        above += hist[k2];
        if above > SUPPORT_MASS_TOL * total {
            return (k2 as f64).sqrt() / g.box_scale();
        }
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn config_defaults_and_round_trip() {
        let c: SolverConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, SolverConfig::default());
        assert_eq!(c.nodes, 16);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SolverConfig>(&text).unwrap(), c);
        assert!(serde_json::from_str::<SolverConfig>("{\"cfl\": 1}").is_err());
        let bad = SolverConfig {
            nodes: 0,
            ..SolverConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(m)) if m.contains("nodes")));
    }

    #[test]
    fn spectral_radius_of_a_single_shell() {
        let g = GridSpec::new(2, 32).build().unwrap();
        let f = SpectralField::from_fn(&g, |x| [(3.0 * x[1]).sin(), (4.0 * x[0]).cos(), 0.0]).unwrap();
        assert!((spectral_radius(&f) - 4.0).abs() < 1e-12);
        assert_eq!(spectral_radius(&SpectralField::zeros(&g, crate::FieldKind::Real)), 0.0);
    }
}
