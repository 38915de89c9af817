//! Littlewood-Paley decomposition, Besov norms and the inequality harnesses
//! built on them.
//!
//! The radial cutoff `ψ` equals one on `|ξ| <= 5/4`, vanishes for `|ξ| >= 3/2`
//! and is a quintic smoothstep in between. Blocks use `φ(ξ) = ψ(ξ) - ψ(2ξ)`,
//! supported in `5/8 <= |ξ| <= 3/2`, and `φ_j(ξ) = φ(2^{-j} ξ)`.

mod harness;
mod norms;

pub use harness::{
    bernstein_ratio, calibrate_decay_constant, verify_exp_decay, verify_heat_spacetime, verify_high_frequency_decay,
    verify_low_frequency_growth, DecayRow, DecayTrace, HeatSpacetimeReport, LowFrequencyReport,
};
pub use norms::{besov_norm, besov_norm_heat, BesovNorm};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

/// Inner radius of the plateau of `ψ`.
pub const PLATEAU: f64 = 1.25;
/// Outer radius of the support of `ψ`.
pub const SUPPORT: f64 = 1.5;

/// The smooth radial cutoff `ψ(r)`.
pub fn psi(r: f64) -> f64 {
    let r = r.abs();
    if r <= PLATEAU {
        1.0
    } else if r >= SUPPORT {
        0.0
    } else {
        let u = (r - PLATEAU) / (SUPPORT - PLATEAU);
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// The annular bump `φ(r) = ψ(r) - ψ(2r)`.
pub fn phi(r: f64) -> f64 {
    psi(r) - psi(2.0 * r)
}

/// A finite window `[j_min, j_max]` of dyadic blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub j_min: i32,
    pub j_max: i32,
}

impl CutoffFamily {
    pub fn new(j_min: i32, j_max: i32) -> Result<CutoffFamily> {
        if j_min > j_max {
            return Err(Error::Domain(format!("empty dyadic window [{j_min}, {j_max}]")));
        }
        Ok(CutoffFamily { j_min, j_max })
    }

    /// The window covering every nonzero lattice frequency of `grid`.
    pub fn for_grid(grid: &Grid) -> CutoffFamily {
        let lam = grid.box_scale();
        let j_min = (1.0 / lam).log2().ceil() as i32 - 1;
        let top = (grid.dim() as f64).sqrt() * (grid.n() / 2) as f64 / lam;
        let j_max = (top / PLATEAU).log2().ceil() as i32;
        CutoffFamily {
            j_min,
            j_max: j_max.max(j_min),
        }
    }

    pub fn blocks(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// Symbol `φ_j(|ξ|)`.
    pub fn phi_j(&self, j: i32, r: f64) -> f64 {
        phi(r * 2f64.powi(-j))
    }

    /// Symbol of every block below the window, `ψ(2^{1 - j_min} |ξ|)`.
    pub fn low_residual(&self, r: f64) -> f64 {
        psi(r * 2f64.powi(1 - self.j_min))
    }

    /// Symbol of every block above the window, `1 - ψ(2^{-j_max} |ξ|)`.
    pub fn high_residual(&self, r: f64) -> f64 {
        1.0 - psi(r * 2f64.powi(-self.j_max))
    }

    /// Sum of the window symbols at radius `r`.
    pub fn window_sum(&self, r: f64) -> f64 {
        self.blocks().map(|j| self.phi_j(j, r)).sum()
    }

    /// Radii on which the window alone sums to one.
    pub fn exact_range(&self) -> (f64, f64) {
        (0.75 * 2f64.powi(self.j_min), PLATEAU * 2f64.powi(self.j_max))
    }
}

/// The low-pass multiplier `P_{<= M}` with symbol `ψ(ξ / M)`.
pub fn low_pass(f: &SpectralField, m: f64) -> SpectralField {
    let g = f.grid().clone();
    f.with_multiplier(|idx| psi(g.xi2(idx).sqrt() / m))
}

/// The dyadic block `Δ_j f`.
pub fn block(f: &SpectralField, j: i32) -> SpectralField {
    let g = f.grid().clone();
    let s = 2f64.powi(-j);
    f.with_multiplier(|idx| phi(g.xi2(idx).sqrt() * s))
}

/// A field split into window blocks plus residuals below and above the window.
#[derive(Debug, Clone)]
pub struct DyadicBlockSet {
    pub family: CutoffFamily,
    pub blocks: Vec<SpectralField>,
    pub low: SpectralField,
    pub high: SpectralField,
}

impl DyadicBlockSet {
    /// `low + Σ blocks + high`, equal to the original field up to round-off.
    pub fn reconstruct(&self) -> Result<SpectralField> {
        let mut out = self.low.clone();
        for b in &self.blocks {
            out.axpy(1.0, b)?;
        }
        out.axpy(1.0, &self.high)?;
        Ok(out)
    }

    /// `ℓ²` mass outside the window relative to the nonzero-frequency mass.
    pub fn truncation_fraction(&self) -> f64 {
        let g = self.low.grid().clone();
        let low = self.low.with_multiplier(|idx| if g.k2()[idx] == 0 { 0.0 } else { 1.0 });
        let total = low.coefficient_l2_sq()
            + self.high.coefficient_l2_sq()
            + self.blocks.iter().map(|b| b.coefficient_l2_sq()).sum::<f64>();
        if total == 0.0 {
            0.0
        } else {
            ((low.coefficient_l2_sq() + self.high.coefficient_l2_sq()) / total).sqrt()
        }
    }
}

pub fn dyadic_blocks(f: &SpectralField, family: &CutoffFamily) -> DyadicBlockSet {
    let g = f.grid().clone();
    let blocks = family.blocks().map(|j| block(f, j)).collect();
    let fam = *family;
    DyadicBlockSet {
        family: fam,
        blocks,
        low: f.with_multiplier(|idx| fam.low_residual(g.xi2(idx).sqrt())),
        high: f.with_multiplier(|idx| fam.high_residual(g.xi2(idx).sqrt())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn psi_is_a_smooth_monotone_plateau() {
        assert_eq!(psi(0.0), 1.0);
        assert_eq!(psi(1.25), 1.0);
        assert_eq!(psi(1.5), 0.0);
        assert!((psi(1.375) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = psi(1.25 + 0.0025 * i as f64);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn phi_support_is_the_annulus() {
        assert_eq!(phi(0.625), 0.0);
        assert!(phi(0.7) > 0.0);
        assert_eq!(phi(1.5), 0.0);
        assert_eq!(phi(1.0), 1.0);
        for j in -2..6 {
            for i in 0..4000 {
                let r = 2f64.powi(j + 2) * i as f64 / 4000.0;
                let inside = r >= 2f64.powi(j - 1) && r <= 2f64.powi(j + 1);
                if !inside {
                    assert_eq!(phi(r * 2f64.powi(-j)), 0.0);
                }
            }
        }
    }

    #[test]
    fn window_sums_to_one_on_its_exact_range() {
        let fam = CutoffFamily::new(-1, 5).unwrap();
        let (lo, hi) = fam.exact_range();
        for i in 0..2000 {
            let r = lo + (hi - lo) * i as f64 / 1999.0;
            assert!((fam.window_sum(r) - 1.0).abs() < 1e-14, "r = {r}");
        }
        for i in 0..500 {
            let r = 0.001 + 100.0 * i as f64 / 499.0;
            let total = fam.low_residual(r) + fam.window_sum(r) + fam.high_residual(r);
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn default_window_covers_the_lattice() {
        for (dim, n, lam) in [(2, 64, 1.0), (3, 32, 2.0), (1, 16, 0.5)] {
            let g = GridSpec::new(dim, n).box_scale(lam).build().unwrap();
            let fam = CutoffFamily::for_grid(&g);
            let (lo, hi) = fam.exact_range();
            let rmin = 1.0 / lam;
            let rmax = (dim as f64).sqrt() * (n / 2) as f64 / lam;
            assert!(lo <= rmin && hi >= rmax, "{dim} {n} {lam}: {fam:?}");
        }
    }

    #[test]
    fn blocks_reconstruct_the_field() {
        let g = GridSpec::new(2, 32).build().unwrap();
        let f = SpectralField::from_fn(&g, |x| [(3.0 * x[0]).sin() + x[1].cos() + 0.5, (7.0 * x[1]).sin(), 0.0]).unwrap();
        let set = dyadic_blocks(&f, &CutoffFamily::new(0, 2).unwrap());
        let back = set.reconstruct().unwrap();
        assert!(back.sub(&f).unwrap().coefficient_l2_sq().sqrt() < 1e-15);
        assert!(set.truncation_fraction() > 0.0);
        let full = dyadic_blocks(&f, &CutoffFamily::for_grid(&g));
        assert!(full.truncation_fraction() < 1e-15);
    }
}
