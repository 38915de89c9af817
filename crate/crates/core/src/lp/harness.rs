//! Numerical checks of smoothing and decay inequalities for the heat flow.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{block, psi};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::initial::random_divfree;
use crate::spectral::{heat_propagate, leray_project, TensorField};

/// Outcome of the space-time heat estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatSpacetimeReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// One sample of a decay inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub j: i32,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub rows: Vec<DecayRow>,
    pub max_ratio: f64,
}

impl DecayTrace {
    fn from_rows(rows: Vec<DecayRow>) -> DecayTrace {
        let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        DecayTrace { rows, max_ratio }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowFrequencyReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

fn check_nonzero(f: &SpectralField, what: &str) -> Result<()> {
    if f.coefficient_l2_sq() == 0.0 {
        Err(Error::ZeroField(format!("{what}: ratio would be 0/0")))
    } else {
        Ok(())
    }
}

/// Compares `‖e^{tΔ} f‖_{L^γ_t L^p_x}` with `‖f‖_{Ḣ^{-a}_r}` under the
/// scaling relation `2/γ = a + d(1/r - 1/p)` with `γ >= r > 1`.
///
/// The time integral runs over a geometric grid adapted to the spectrum of
/// `f`, with the part near `t = 0` added by the trapezoid rule.
pub fn verify_heat_spacetime(f: &SpectralField, a: f64, r: f64, p: f64, gamma: f64) -> Result<HeatSpacetimeReport> {
    check_nonzero(f, "heat space-time estimate")?;
    let g = f.grid().clone();
    let d = g.dim() as f64;
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    if !(r > 1.0 && gamma >= r && p >= 1.0) {
        return Err(Error::Domain(format!("need gamma >= r > 1 and p >= 1, got gamma={gamma}, r={r}, p={p}")));
    }
    let balance = 2.0 / gamma - a - d * (1.0 / r - inv_p);
    if balance.abs() > 1e-10 {
        return Err(Error::Domain(format!("scaling relation violated by {balance:e}")));
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for idx in 0..g.len() {
        if g.k2()[idx] > 0 && f.components().iter().any(|c| c[idx].norm() > 0.0) {
            lo = lo.min(g.xi2(idx));
            hi = hi.max(g.xi2(idx));
        }
    }
    if !lo.is_finite() {
        return Err(Error::ZeroField("field has no nonzero frequencies".into()));
    }
    let rhs = f
        .with_multiplier(|idx| if g.k2()[idx] == 0 { 0.0 } else { g.xi2(idx).powf(-a / 2.0) })
        .lp_norm(r)?;
    let t_lo = 1e-4 / hi;
    let t_hi = 40.0 / (gamma * lo);
    let octaves = (t_hi / t_lo).log2();
    let count = (octaves * 8.0).ceil() as usize;
    let dlog = (t_hi / t_lo).ln() / count as f64;
    let mut prev: Option<(f64, f64)> = None;
    let mut integral = 0.0;
    for i in 0..=count {
        let t = t_lo * (dlog * i as f64).exp();
        let val = heat_propagate(f, t)?.lp_norm(p)?.powf(gamma) * t;
        if let Some((_, pv)) = prev {
            integral += 0.5 * dlog * (pv + val);
        } else {
            let v0 = f.lp_norm(p)?.powf(gamma);
            integral += 0.5 * t_lo * (v0 + val / t);
        }
        prev = Some((t, val));
    }
    let lhs = integral.powf(1.0 / gamma);
    Ok(HeatSpacetimeReport {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

fn triples(d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..d {
        for b in a..d {
            for c in b..d {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Measures `max ‖Δ_j (-Δ)^{-1} ∂_λ ∂_μ ∂_ν e^{tΔ} f‖_r` against
/// `2^j e^{-t 2^{2j-4}} ‖f‖_r` for `r ∈ {2, ∞}`.
pub fn verify_exp_decay(f: &SpectralField, j: i32, r: f64, times: &[f64]) -> Result<DecayTrace> {
    if !(r == 2.0 || r == f64::INFINITY) {
        return Err(Error::Domain(format!("decay harness supports r = 2 or ∞, got {r}")));
    }
    check_nonzero(f, "exponential decay estimate")?;
    let g = f.grid().clone();
    let norm_f = f.lp_norm(r)?;
    let fb = block(f, j);
    let s = 1.0 / g.box_scale();
    let combos = triples(g.dim());
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let heated = heat_propagate(&fb, t)?;
        let mut lhs = 0.0f64;
        for c in &combos {
            let out = heated.with_complex_multiplier(f.kind(), |idx| {
                let k2 = g.k2()[idx];
                if k2 == 0 {
                    return Complex64::default();
                }
                let k = g.mode(idx);
                let prod = (k[c[0]] * k[c[1]] * k[c[2]]) as f64 * s * s * s;
                Complex64::new(0.0, -prod / g.xi2(idx))
            });
            lhs = lhs.max(out.lp_norm(r)?);
        }
        let rhs = 2f64.powi(j) * (-t * 2f64.powi(2 * j - 4)).exp() * norm_f;
        rows.push(DecayRow {
            j,
            t,
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }
    Ok(DecayTrace::from_rows(rows))
}

fn high_passed_product(u: &SpectralField, v: &SpectralField, cut: f64) -> Result<TensorField> {
    let mut f = TensorField::outer(u, v)?;
    let g = f.grid().clone();
    f.apply_multiplier(|idx| if g.xi2(idx).sqrt() >= cut { 1.0 } else { 0.0 });
    Ok(f)
}

fn duhamel_constant_forcing(div: &SpectralField, t: f64) -> SpectralField {
    let g = div.grid().clone();
    div.with_multiplier(|idx| {
        let a = g.xi2(idx);
        if a == 0.0 {
            0.0
        } else if t.is_infinite() {
            1.0 / a
        } else {
            -(-t * a).exp_m1() / a
        }
    })
}

/// For time-constant `f = u ⊗ v` with frequencies `|ξ| >= 2^{j0}`, measures
/// `sup_x |∫_0^t e^{(t-s)Δ} ℙ ∇·f ds|` against `2^{-j0} ‖f‖_∞`. The time
/// `t = ∞` may be included and gives the stationary limit.
pub fn verify_high_frequency_decay(u: &SpectralField, v: &SpectralField, j0: i32, times: &[f64]) -> Result<DecayTrace> {
    let cut = 2f64.powi(j0);
    let f = high_passed_product(u, v, cut)?;
    let rhs = f.sup_norm() / cut;
    if rhs == 0.0 {
        return Err(Error::ZeroField("high-passed product vanishes".into()));
    }
    let div = leray_project(&f.divergence());
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        if !(t > 0.0) {
            return Err(Error::InvalidTime(format!("times must be positive, got {t}")));
        }
        let lhs = duhamel_constant_forcing(&div, t).sup_norm();
        rows.push(DecayRow {
            j: j0,
            t,
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }
    Ok(DecayTrace::from_rows(rows))
}

/// For time-constant `f = u ⊗ v`, measures
/// `sup_{t <= t1} ‖P_{<= 2^{j0}} ∫_0^t e^{(t-s)Δ} ℙ ∇·f ds‖_∞` against
/// `2^{j0} t1 ‖f‖_∞`, sampling sixteen times in `(0, t1]`.
pub fn verify_low_frequency_growth(u: &SpectralField, v: &SpectralField, j0: i32, t1: f64) -> Result<LowFrequencyReport> {
    if !(t1 > 0.0 && t1.is_finite()) {
        return Err(Error::InvalidTime(format!("horizon must be positive, got {t1}")));
    }
    let f = TensorField::outer(u, v)?;
    let fsup = f.sup_norm();
    if fsup == 0.0 {
        return Err(Error::ZeroField("product vanishes".into()));
    }
    let g = f.grid().clone();
    let m = 2f64.powi(j0);
    let div = leray_project(&f.divergence()).with_multiplier(|idx| psi(g.xi2(idx).sqrt() / m));
    let mut lhs = 0.0f64;
    for i in 1..=16 {
        let t = t1 * i as f64 / 16.0;
        lhs = lhs.max(duhamel_constant_forcing(&div, t).sup_norm());
    }
    let rhs = m * t1 * fsup;
    Ok(LowFrequencyReport {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// `‖Δ_j f‖_∞ / (2^{jd/p} ‖Δ_j f‖_p)`, bounded by a constant for every field.
pub fn bernstein_ratio(f: &SpectralField, j: i32, p: f64) -> Result<f64> {
    let b = block(f, j);
    let np = b.lp_norm(p)?;
    if np == 0.0 {
        return Err(Error::ZeroField(format!("block {j} is empty")));
    }
    let d = f.grid().dim() as f64;
    let w = if p.is_infinite() { 1.0 } else { 2f64.powf(j as f64 * d / p) };
    Ok(b.sup_norm() / (w * np))
}

/// Largest ratio of the high-frequency decay harness over `samples` random
/// solenoidal fields, used as the default value of the global constant.
pub fn calibrate_decay_constant(grid: &std::sync::Arc<Grid>, samples: usize, seed: u64) -> Result<f64> {
    let kmax = grid.dealias_cut() as f64 / 2.0;
    let mut worst = 0.0f64;
    for i in 0..samples as u64 {
        let u = random_divfree(grid, seed + 2 * i, 1.0, -1.0, 1.0, kmax)?;
        let v = random_divfree(grid, seed + 2 * i + 1, 1.0, -1.0, 1.0, kmax)?;
        let j0 = ((kmax / grid.box_scale()).log2().floor() as i32).max(0);
        let trace = verify_high_frequency_decay(&u, &v, j0, &[0.01, 0.1, 1.0, f64::INFINITY])?;
        worst = worst.max(trace.max_ratio);
    }
    Ok(worst)
}
