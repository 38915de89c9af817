use serde::{Deserialize, Serialize};

use super::{block, CutoffFamily};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::spectral::heat_propagate;

/// A Besov norm together with the share of the field it could not see.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub value: f64,
    /// Relative `ℓ²` mass of nonzero frequencies outside the dyadic window.
    pub truncation: f64,
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v >= 1.0 || (v.is_infinite() && v > 0.0) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in [1, ∞], got {v}")))
    }
}

pub(crate) fn block_norm(b: &SpectralField, p: f64) -> Result<f64> {
    b.lp_norm(p)
}

fn combine(terms: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        let v: Vec<f64> = terms.collect();
        let m = v.iter().fold(0.0f64, |a, &b| a.max(b));
        if m == 0.0 {
            return 0.0;
        }
        m * v.iter().map(|x| (x / m).powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Blockwise homogeneous Besov norm `‖(2^{js} ‖Δ_j f‖_p)_j‖_{ℓ^q}` over the
/// window covering the grid.
pub fn besov_norm(f: &SpectralField, s: f64, p: f64, q: f64) -> Result<BesovNorm> {
    besov_norm_with(f, s, p, q, &CutoffFamily::for_grid(f.grid()))
}

/// Blockwise Besov norm over an explicit dyadic window.
pub fn besov_norm_with(f: &SpectralField, s: f64, p: f64, q: f64, family: &CutoffFamily) -> Result<BesovNorm> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    if !s.is_finite() {
        return Err(Error::Domain(format!("regularity must be finite, got {s}")));
    }
    let g = f.grid().clone();
    let mut terms = Vec::new();
    let mut inside = 0.0;
    for j in family.blocks() {
        let b = block(f, j);
        inside += b.coefficient_l2_sq();
        terms.push(2f64.powf(j as f64 * s) * block_norm(&b, p)?);
    }
    let nonzero = f.with_multiplier(|idx| if g.k2()[idx] == 0 { 0.0 } else { 1.0 });
    let low = f.with_multiplier(|idx| if g.k2()[idx] == 0 { 0.0 } else { family.low_residual(g.xi2(idx).sqrt()) });
    let high = f.with_multiplier(|idx| family.high_residual(g.xi2(idx).sqrt()));
    let total = nonzero.coefficient_l2_sq();
    let truncation = if total == 0.0 {
        0.0
    } else {
        ((low.coefficient_l2_sq() + high.coefficient_l2_sq()) / (inside + low.coefficient_l2_sq() + high.coefficient_l2_sq()))
            .sqrt()
    };
    Ok(BesovNorm {
        value: combine(terms.into_iter(), q),
        truncation,
    })
}

/// Points per octave of the heat-time grid.
pub const HEAT_POINTS_PER_OCTAVE: usize = 8;

/// Heat characterization `‖ t^{-s/2} ‖e^{tΔ} f‖_p ‖_{L^q(dt/t)}` for `s < 0`.
///
/// The time grid is geometric with eight points per octave and spans the
/// dyadic window of the grid with a margin on both sides. For finite `q` the
/// part of the integral below the grid is added in closed form, freezing the
/// norm at its value on the first node.
pub fn besov_norm_heat(f: &SpectralField, s: f64, p: f64, q: f64) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    if !(s < 0.0) {
        return Err(Error::Domain(format!(
            "heat characterization needs negative regularity, got s = {s}"
        )));
    }
    let fam = CutoffFamily::for_grid(f.grid());
    let log_lo = -2.0 * fam.j_max as f64 - 8.0;
    let log_hi = -2.0 * fam.j_min as f64 + 4.0;
    let count = ((log_hi - log_lo) * HEAT_POINTS_PER_OCTAVE as f64).round() as usize;
    let dlog = (log_hi - log_lo) / count as f64;
    let mut values = Vec::with_capacity(count + 1);
    for i in 0..=count {
        let t = 2f64.powf(log_lo + dlog * i as f64);
        let n = heat_propagate(f, t)?.lp_norm(p)?;
        values.push((t, t.powf(-s / 2.0) * n));
    }
    if q.is_infinite() {
        return Ok(values.iter().map(|v| v.1).fold(0.0, f64::max));
    }
    let h = dlog * std::f64::consts::LN_2;
    let mut integral = 0.0;
    for w in values.windows(2) {
        integral += 0.5 * h * (w[0].1.powf(q) + w[1].1.powf(q));
    }
    let alpha = -s * q / 2.0;
    integral += values[0].1.powf(q) / alpha;
    Ok(integral.powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::lp::CutoffFamily;
    use std::sync::Arc;

    fn single_mode(k: i64) -> SpectralField {
        let g: Arc<_> = GridSpec::new(2, 64).build().unwrap();
        SpectralField::from_fn(&g, |x| [0.0, (k as f64 * x[0]).cos(), 0.0]).unwrap()
    }

    #[test]
    fn single_mode_block_norm_is_closed_form() {
        let f = single_mode(8);
        let fam = CutoffFamily::for_grid(f.grid());
        for (p, want) in [(2.0, f.l2_norm()), (f64::INFINITY, 1.0)] {
            let n = besov_norm(&f, 0.5, p, 2.0).unwrap();
            assert!(fam.blocks().contains(&3));
            assert!((n.value - 8f64.sqrt() * want).abs() < 1e-12 * want.max(1.0), "p = {p}: {}", n.value);
            assert!(n.truncation < 1e-15);
        }
    }

    #[test]
    fn heat_norm_of_single_mode_matches_gamma_closed_form() {
        for (k, s, q) in [(4i64, -1.0, 2.0), (8, -0.5, 1.0), (2, -1.0, 3.0)] {
            let f = single_mode(k);
            let a = (k * k) as f64;
            let alpha = -s * q / 2.0;
            let want = (libm::tgamma(alpha) * (q * a).powf(-alpha)).powf(1.0 / q) * f.l2_norm();
            let got = besov_norm_heat(&f, s, 2.0, q).unwrap();
            assert!(((got - want) / want).abs() < 1e-3, "k={k} s={s} q={q}: {got} vs {want}");
        }
    }

    #[test]
    fn heat_norm_sup_in_time_matches_closed_form() {
        let f = single_mode(8);
        let a = 64.0;
        let s = -1.0;
        let tstar: f64 = -s / (2.0 * a);
        let want = tstar.powf(-s / 2.0) * (-a * tstar).exp();
        let got = besov_norm_heat(&f, s, f64::INFINITY, f64::INFINITY).unwrap();
        assert!(((got - want) / want).abs() < 1e-3);
    }

    #[test]
    fn heat_norm_rejects_nonnegative_regularity() {
        let f = single_mode(2);
        assert!(besov_norm_heat(&f, 0.0, 6.0, f64::INFINITY).is_err());
        assert!(besov_norm_heat(&f, 0.5, 2.0, 2.0).is_err());
        assert!(besov_norm(&f, 0.0, 0.5, 2.0).is_err());
    }
}
