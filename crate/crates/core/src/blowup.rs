//! Blowup diagnostics on stored trajectories.
//!
//! Everything here is a pointwise evaluation on the stored time samples. A
//! declared blowup time is an input, never a conclusion.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::initial::jet_bump;
use crate::lp::low_pass;
use crate::trajectory::Trajectory;

/// A scalar function of time sampled on a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `max / min - 1` over the samples; zero for a constant trace.
    pub fn relative_spread(&self) -> f64 {
        let max = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        if max == 0.0 && min == 0.0 {
            0.0
        } else {
            max / min - 1.0
        }
    }
}

/// `σ_p = 2 / (1 - d/p)`, defined for `p > d`.
pub fn sigma_p(d: usize, p: f64) -> Result<f64> {
    if !(p > d as f64) {
        return Err(Error::Domain(format!("σ_p needs p > d = {d}, got p = {p}")));
    }
    if p.is_infinite() {
        return Ok(2.0);
    }
    Ok(2.0 / (1.0 - d as f64 / p))
}

fn check_t_est(traj: &Trajectory, t_est: f64) -> Result<()> {
    if !(t_est >= traj.end()) {
        return Err(Error::InvalidTime(format!(
            "T_est = {t_est} precedes the last sample at {}",
            traj.end()
        )));
    }
    Ok(())
}

/// `ω(t) = ‖u(t)‖_∞` on every sample.
pub fn omega_trace(traj: &Trajectory) -> Trace {
    Trace {
        t: traj.times().to_vec(),
        values: traj.fields().iter().map(|f| f.sup_norm()).collect(),
    }
}

/// `(T_est - t)^{1/2} ω(t)`.
pub fn rate_functional(traj: &Trajectory, t_est: f64) -> Result<Trace> {
    check_t_est(traj, t_est)?;
    let omega = omega_trace(traj);
    Ok(Trace {
        values: omega.t.iter().zip(&omega.values).map(|(t, w)| (t_est - t).sqrt() * w).collect(),
        t: omega.t,
    })
}

/// `(T_est - t) ‖u(t)‖_p^{σ_p}`.
pub fn typei_functional(traj: &Trajectory, t_est: f64, p: f64) -> Result<Trace> {
    let sigma = sigma_p(traj.grid().dim(), p)?;
    check_t_est(traj, t_est)?;
    let values = traj
        .times()
        .iter()
        .zip(traj.fields())
        .map(|(t, f)| Ok((t_est - t) * f.lp_norm(p)?.powf(sigma)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trace {
        t: traj.times().to_vec(),
        values,
    })
}

/// A selected concentration time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTime {
    pub index: usize,
    pub t: f64,
    pub omega: f64,
}

/// Greedy scan for `τ_n` with `ω(τ_n) >= 100 C² ω(τ_{n-1})` and
/// `ω(τ_n) >= ½ max_{[τ_{n-1}, τ_n]} ω`.
pub fn select_concentration_times(trace: &Trace, c_conc: f64) -> Vec<ConcentrationTime> {
    let w = &trace.values;
    if w.is_empty() {
        return Vec::new();
    }
    let factor = 100.0 * c_conc * c_conc;
    let at = |i: usize| ConcentrationTime {
        index: i,
        t: trace.t[i],
        omega: w[i],
    };
    let mut out = vec![at(0)];
    let mut prev = 0;
    loop {
        let need = factor * w[prev];
        let Some(hit) = (prev + 1..w.len()).find(|&i| w[i] >= need && w[i] > 0.0) else {
            break;
        };
        let peak = w[prev..=hit].iter().copied().fold(0.0, f64::max);
        let chosen = (prev + 1..=hit)
            .rev()
            .find(|&s| w[s] >= 0.5 * peak && w[s] >= need)
            .unwrap_or(hit);
        out.push(at(chosen));
        prev = chosen;
    }
    out
}

/// Re-checks both defining inequalities of a selection on its trace.
pub fn verify_concentration_times(trace: &Trace, times: &[ConcentrationTime], c_conc: f64) -> bool {
    let factor = 100.0 * c_conc * c_conc;
    times.windows(2).all(|p| {
        let (a, b) = (p[0], p[1]);
        let peak = trace.values[a.index..=b.index].iter().copied().fold(0.0, f64::max);
        b.index > a.index && b.omega >= factor * a.omega && b.omega >= 0.5 * peak
    })
}

/// Outcome of the low-frequency dominance test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dominance {
    pub beta: f64,
    /// `‖P_{<=β} u‖_∞ / ω`.
    pub ratio: f64,
    pub dominant: bool,
}

/// Compares `‖P_{<=β} u‖_∞` with `ω` for `β = 100 C ω`.
pub fn low_frequency_dominance(u: &SpectralField, omega: f64, c_conc: f64) -> Result<Dominance> {
    if !(omega > 0.0) {
        return Err(Error::ZeroField("dominance needs ω > 0".into()));
    }
    let beta = 100.0 * c_conc * omega;
    let ratio = low_pass(u, beta).sup_norm() / omega;
    Ok(Dominance {
        beta,
        ratio,
        dominant: ratio >= 0.5,
    })
}

/// A concentration point with the local `L^p` mass around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    /// Lattice index of the maximizer of `|P_{<=β} u|`.
    pub index: usize,
    pub x: Vec<f64>,
    pub beta: f64,
    pub radius: f64,
    /// `‖u‖_{L^p(B(x, M/β))}`.
    pub local_mass: f64,
    /// `local_mass / ω^{1 - d/p}`.
    pub bound_ratio: f64,
}

/// Locates the maximizer of the low-passed field and measures the `L^p` mass
/// of `u` in the ball of radius `M / β` around it.
pub fn locate_concentration(u: &SpectralField, omega: f64, p: f64, m: f64, c_conc: f64) -> Result<Concentration> {
    if !(omega > 0.0) {
        return Err(Error::ZeroField("concentration needs ω > 0".into()));
    }
    if !(p >= 1.0) || !(m > 0.0) {
        return Err(Error::Domain(format!("need p >= 1 and M > 0, got p = {p}, M = {m}")));
    }
    let g = u.grid().clone();
    let beta = 100.0 * c_conc * omega;
    let radius = m / beta;
    if radius < g.spacing() {
        return Err(Error::Resolution(format!(
            "ball radius {radius:e} is below the lattice spacing {:e}",
            g.spacing()
        )));
    }
    let low = low_pass(u, beta).magnitudes();
    let mut index = 0;
    for (i, &v) in low.iter().enumerate() {
        if v > low[index] {
            index = i;
        }
    }
    let x = g.position(index);
    let mags = u.magnitudes();
    let mut acc = 0.0f64;
    for (i, &v) in mags.iter().enumerate() {
        let r = g.displacement(&g.position(i), &x);
        if r.iter().map(|c| c * c).sum::<f64>() <= radius * radius {
            if p.is_infinite() {
                acc = acc.max(v);
            } else {
                acc += v.powf(p);
            }
        }
    }
    let local_mass = if p.is_infinite() {
        acc
    } else {
        (acc * g.cell_volume()).powf(1.0 / p)
    };
    let exponent = if p.is_infinite() { 1.0 } else { 1.0 - g.dim() as f64 / p };
    Ok(Concentration {
        index,
        x: x[..g.dim()].to_vec(),
        beta,
        radius,
        local_mass,
        bound_ratio: local_mass / omega.powf(exponent),
    })
}

/// The synthetic family `u(t, x) = (T - t)^{-1/2} V((x - c) / √(T - t))` with a
/// jet profile `V` of given amplitude and width. It is not a solution; it
/// exercises the diagnostics on exactly self-similar data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarFamily {
    pub amplitude: f64,
    pub width: f64,
    pub center: Vec<f64>,
    pub t_blow: f64,
}

impl SelfSimilarFamily {
    pub fn at(&self, grid: &Arc<Grid>, t: f64) -> Result<SpectralField> {
        if !(t < self.t_blow) {
            return Err(Error::InvalidTime(format!("t = {t} is not before T = {}", self.t_blow)));
        }
        let s = (self.t_blow - t).sqrt();
        jet_bump(grid, self.amplitude / s, self.width * s, &self.center)
    }

    pub fn trajectory(&self, grid: &Arc<Grid>, times: &[f64]) -> Result<Trajectory> {
        let fields = times.iter().map(|&t| self.at(grid, t)).collect::<Result<Vec<_>>>()?;
        Trajectory::from_samples(times.to_vec(), fields)
    }
}

/// Settings of [`diagnose`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub c_conc: f64,
    #[serde(default = "default_ball")]
    pub ball_multiplier: f64,
    /// Exponent of the type-I functional and of the local masses.
    #[serde(default)]
    pub p: Option<f64>,
}

fn default_ball() -> f64 {
    8.0
}

impl DiagnosticsConfig {
    pub fn new(c_conc: f64) -> DiagnosticsConfig {
        DiagnosticsConfig {
            c_conc,
            ball_multiplier: default_ball(),
            p: None,
        }
    }
}

/// Diagnostics at one selected time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeDiagnostics {
    pub time: ConcentrationTime,
    pub dominance: Dominance,
    pub concentration: Option<Concentration>,
    pub note: Option<String>,
    /// Parabolic scale `√(T - t)`.
    pub parabolic_scale: f64,
    /// `‖u‖_{Ḣ^{d/2-1}}^{-2/(d-2)}`, defined for `d >= 3`.
    pub sobolev_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub t_est: f64,
    pub omega: Trace,
    pub rate: Trace,
    pub type_i: Option<Trace>,
    pub sigma_p: Option<f64>,
    pub selected: Vec<TimeDiagnostics>,
    pub selection_verified: bool,
    pub caveat: String,
}

/// Runs every diagnostic of this module on a trajectory.
pub fn diagnose(traj: &Trajectory, t_est: f64, config: &DiagnosticsConfig) -> Result<DiagnosticsReport> {
    let omega = omega_trace(traj);
    let rate = rate_functional(traj, t_est)?;
    let d = traj.grid().dim();
    let (type_i, sigma) = match config.p {
        Some(p) if p > d as f64 => (Some(typei_functional(traj, t_est, p)?), Some(sigma_p(d, p)?)),
        _ => (None, None),
    };
    let times = select_concentration_times(&omega, config.c_conc);
    let selection_verified = verify_concentration_times(&omega, &times, config.c_conc);
    let mut selected = Vec::with_capacity(times.len());
    for ct in times {
        if ct.omega == 0.0 {
            continue;
        }
        let u = &traj.fields()[ct.index];
        let dominance = low_frequency_dominance(u, ct.omega, config.c_conc)?;
        let p = config.p.unwrap_or(f64::INFINITY);
        let (concentration, note) = match locate_concentration(u, ct.omega, p, config.ball_multiplier, config.c_conc) {
            Ok(c) => (Some(c), None),
            Err(Error::Resolution(msg)) => (None, Some(msg)),
            Err(e) => return Err(e),
        };
        let sobolev_scale = if d >= 3 {
            let h = u.hdot_norm(d as f64 / 2.0 - 1.0);
            Some(h.powf(-2.0 / (d as f64 - 2.0)))
        } else {
            None
        };
        selected.push(TimeDiagnostics {
            time: ct,
            dominance,
            concentration,
            note,
            parabolic_scale: (t_est - ct.t).sqrt(),
            sobolev_scale,
        });
    }
    Ok(DiagnosticsReport {
        t_est,
        omega,
        rate,
        type_i,
        sigma_p: sigma,
        selected,
        selection_verified,
        caveat: "blowup times are declared by heuristic thresholds and are not certified".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::FieldKind;

    #[test]
    fn sigma_p_domain() {
        assert!((sigma_p(3, 6.0).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(sigma_p(3, f64::INFINITY).unwrap(), 2.0);
        assert!(sigma_p(3, 3.0).is_err());
        assert!(sigma_p(2, 1.5).is_err());
    }

    #[test]
    fn geometric_trace_selects_evenly_spaced_times() {
        let dt = 0.125;
        let c: f64 = 0.5;
        let t: Vec<f64> = (0..400).map(|i| i as f64 * dt).collect();
        let trace = Trace {
            values: t.iter().map(|s| 3.0 * 2f64.powf(*s)).collect(),
            t,
        };
        let sel = select_concentration_times(&trace, c);
        let spacing = ((100.0 * c * c).log2() / dt).ceil() * dt;
        assert!(sel.len() > 5);
        for w in sel.windows(2) {
            assert!((w[1].t - w[0].t - spacing).abs() < 1e-12);
        }
        assert!(verify_concentration_times(&trace, &sel, c));
    }

    #[test]
    fn bounded_trace_keeps_only_the_first_time() {
        let trace = Trace {
            t: vec![0.0, 1.0, 2.0],
            values: vec![1.0, 5.0, 2.0],
        };
        assert_eq!(select_concentration_times(&trace, 1.0).len(), 1);
    }

    #[test]
    fn zero_trajectory_traces_vanish() {
        let g = GridSpec::new(2, 16).build().unwrap();
        let z = SpectralField::zeros(&g, FieldKind::Real);
        let traj = Trajectory::from_samples(vec![0.0, 0.5], vec![z.clone(), z]).unwrap();
        assert!(rate_functional(&traj, 1.0).unwrap().values.iter().all(|v| *v == 0.0));
        assert!(typei_functional(&traj, 1.0, 4.0).unwrap().values.iter().all(|v| *v == 0.0));
        assert!(rate_functional(&traj, 0.25).is_err());
        assert!(low_frequency_dominance(traj.last(), 0.0, 1.0).is_err());
    }

    #[test]
    fn dominance_of_low_and_high_modes() {
        let g = GridSpec::new(2, 64).build().unwrap();
        let low = SpectralField::from_fn(&g, |x| [x[1].sin(), 0.0, 0.0]).unwrap();
        let d = low_frequency_dominance(&low, 1.0, 0.05).unwrap();
        assert!((d.ratio - 1.0).abs() < 1e-12 && d.dominant);
        let high = SpectralField::from_fn(&g, |x| [(20.0 * x[1]).sin(), 0.0, 0.0]).unwrap();
        let d = low_frequency_dominance(&high, 1.0, 0.02).unwrap();
        assert!(d.ratio < 1e-14 && !d.dominant);
    }

    #[test]
    fn jet_concentration_is_found_and_translates() {
        let g = GridSpec::new(2, 128).refine_sup(false).build().unwrap();
        let c = g.position(g.index_of(&[40, 70]));
        let (h, w) = (2.0, 0.4);
        let u = jet_bump(&g, h, w, &c[..2]).unwrap();
        let c_conc = 1.0 / (100.0 * h * w);
        let p = 4.0;
        let conc = locate_concentration(&u, h, p, 8.0, c_conc).unwrap();
        assert_eq!(conc.index, g.index_of(&[40, 70]));
        let scale = h * w.powf(2.0 / p);
        assert!(conc.local_mass > 0.5 * scale && conc.local_mass < 2.0 * scale);
        let moved = locate_concentration(&u.translated(&[5, -9]), h, p, 8.0, c_conc).unwrap();
        assert_eq!(moved.index, g.index_of(&[45, 61]));
        assert!((moved.local_mass - conc.local_mass).abs() < 1e-12 * conc.local_mass);
        assert!(matches!(
            locate_concentration(&u, h, p, 8.0, 1000.0),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn self_similar_family_has_constant_functionals() {
        let g = GridSpec::new(2, 128).build().unwrap();
        let fam = SelfSimilarFamily {
            amplitude: 1.0,
            width: 0.6,
            center: g.position(g.index_of(&[64, 64]))[..2].to_vec(),
            t_blow: 1.0,
        };
        let times: Vec<f64> = (0..6).map(|i| 0.1 * i as f64).collect();
        let traj = fam.trajectory(&g, &times).unwrap();
        let rate = rate_functional(&traj, 1.0).unwrap();
        assert!(rate.relative_spread() < 1e-3, "{:?}", rate.values);
        let ti = typei_functional(&traj, 1.0, 6.0).unwrap();
        assert!(ti.relative_spread() < 1e-2, "{:?}", ti.values);
    }
}
