//! Synthetic profile decompositions of bounded `L^p` sequences
//!
//! ```text
//! f_n = Σ_{j <= J} λ_{j,n}^{-α} φ_j((x - x_{j,n}) / λ_{j,n}) + ψ_n
//! ```
//!
//! with analytic profiles, scale and core schedules in `n`, and a
//! high-frequency noise remainder. The module synthesizes such sequences,
//! evaluates the orthogonality and norm-splitting quantities, and runs a
//! greedy extraction of scales and cores.

mod extract;

pub use extract::{greedy_extract, ExtractConfig, ExtractedProfile, Extraction, Piece, SnapshotExtraction};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::initial::random_divfree;
use crate::lp::besov_norm;

/// A scalar sequence `n ↦ s(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Constant { value: f64 },
    /// `value · ratio^n`.
    Geometric { value: f64, ratio: f64 },
    /// `coeff · n^exponent`, with `n = 0` read as `n = 1`.
    Power { coeff: f64, exponent: f64 },
    /// `start + slope · n`.
    Linear { start: f64, slope: f64 },
}

impl Schedule {
    pub fn eval(&self, n: u32) -> f64 {
        let nf = n as f64;
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Geometric { value, ratio } => value * ratio.powf(nf),
            Schedule::Power { coeff, exponent } => coeff * nf.max(1.0).powf(exponent),
            Schedule::Linear { start, slope } => start + slope * nf,
        }
    }
}

/// Asymptotic class of a scale sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleClass {
    /// `λ_n → 0`.
    Vanishing,
    /// `λ_n` tends to a positive constant.
    Constant,
    /// `λ_n → ∞`.
    Divergent,
}

/// Classifies a scale schedule by comparing it at `n = 2^10` and `n = 2^11`.
pub fn classify_scale(s: &Schedule) -> ScaleClass {
    let a = s.eval(1 << 10);
    let b = s.eval(1 << 11);
    let r = b / a;
    if !r.is_finite() || b == 0.0 {
        if b == 0.0 || a.is_infinite() {
            ScaleClass::Vanishing
        } else {
            ScaleClass::Divergent
        }
    } else if r < 1.0 - 1e-6 {
        ScaleClass::Vanishing
    } else if r > 1.0 + 1e-6 {
        ScaleClass::Divergent
    } else {
        ScaleClass::Constant
    }
}

/// Unit-width analytic profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileShape {
    /// `a e^{-|y|²/2} e₁`.
    Gaussian { amplitude: f64 },
    /// The solenoidal jet `a (G (1 - y₂²), y₁ y₂ G)` with `G = e^{-|y|²/2}`.
    Jet { amplitude: f64 },
}

impl ProfileShape {
    pub fn value(&self, y: &[f64; 3], dim: usize) -> [f64; 3] {
        let r2: f64 = y[..dim].iter().map(|v| v * v).sum();
        let g = (-0.5 * r2).exp();
        match *self {
            ProfileShape::Gaussian { amplitude } => [amplitude * g, 0.0, 0.0],
            ProfileShape::Jet { amplitude } => [amplitude * g * (1.0 - y[1] * y[1]), amplitude * g * y[0] * y[1], 0.0],
        }
    }
}

/// Normalization of the rescaled profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Frame {
    /// `λ^{-d/p} φ(x/λ)`, preserving `‖·‖_p`.
    Lp { p: f64 },
    /// `λ^{-1} φ(x/λ)`, preserving `‖·‖_{Ḣ^{d/2-1}}`.
    Sobolev,
}

impl Frame {
    pub fn exponent(&self, dim: usize) -> f64 {
        match *self {
            Frame::Lp { p } => dim as f64 / p,
            Frame::Sobolev => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub shape: ProfileShape,
    pub scale: Schedule,
    /// One schedule per coordinate of the core.
    pub core: Vec<Schedule>,
}

impl ProfileSpec {
    pub fn scale_at(&self, n: u32) -> f64 {
        self.scale.eval(n)
    }

    pub fn core_at(&self, n: u32) -> Vec<f64> {
        self.core.iter().map(|s| s.eval(n)).collect()
    }
}

/// The remainder `ψ_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Remainder {
    Zero,
    /// Solenoidal noise of sup norm `amplitude` on the integer shell
    /// `[k_min(n), 2 k_min(n)]`; zero once the shell leaves the grid band.
    Noise { seed: u64, amplitude: f64, k_min: Schedule },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDecomposition {
    pub profiles: Vec<ProfileSpec>,
    pub remainder: Remainder,
    pub frame: Frame,
}

/// Range of scales a unit-width profile can be sampled at: at least 2.5
/// lattice cells, at most a twelfth of the box.
pub fn representable_scales(grid: &Grid) -> (f64, f64) {
    (2.5 * grid.spacing(), grid.box_length() / 12.0)
}

fn check_scale(grid: &Grid, lambda: f64) -> Result<()> {
    let (lo, hi) = representable_scales(grid);
    if lambda >= lo && lambda <= hi {
        Ok(())
    } else {
        Err(Error::Representability(format!(
            "scale {lambda:e} outside [{lo:e}, {hi:e}]"
        )))
    }
}

/// Samples `λ^{-α} φ((x - x₀)/λ)` on the lattice.
pub fn rescaled_profile(
    grid: &Arc<Grid>,
    shape: &ProfileShape,
    lambda: f64,
    core: &[f64],
    frame: Frame,
) -> Result<SpectralField> {
    check_scale(grid, lambda)?;
    if core.len() != grid.dim() {
        return Err(Error::Config(format!("core needs {} coordinates", grid.dim())));
    }
    let d = grid.dim();
    let amp = lambda.powf(-frame.exponent(d));
    let g = grid.clone();
    SpectralField::from_fn(grid, |x| {
        let r = g.displacement(x, core);
        let y = [r[0] / lambda, r[1] / lambda, r[2] / lambda];
        let v = shape.value(&y, d);
        [amp * v[0], amp * v[1], amp * v[2]]
    })
}

impl ProfileDecomposition {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// The `j`-th rescaled profile at index `n`.
    pub fn profile_field(&self, grid: &Arc<Grid>, j: usize, n: u32) -> Result<SpectralField> {
        let p = &self.profiles[j];
        rescaled_profile(grid, &p.shape, p.scale_at(n), &p.core_at(n), self.frame)
    }

    /// The profile `φ_j` centered at the origin, sampled at the representable
    /// scale closest to one. The frame normalization leaves its norm unchanged.
    pub fn reference_profile(&self, grid: &Arc<Grid>, j: usize) -> Result<SpectralField> {
        let (lo, hi) = representable_scales(grid);
        rescaled_profile(grid, &self.profiles[j].shape, 1.0f64.clamp(lo, hi), &vec![0.0; grid.dim()], self.frame)
    }

    pub fn remainder_field(&self, grid: &Arc<Grid>, n: u32) -> Result<SpectralField> {
        match &self.remainder {
            Remainder::Zero => Ok(SpectralField::zeros(grid, crate::FieldKind::Real)),
            Remainder::Noise {
                seed,
                amplitude,
                k_min,
            } => {
                let k = k_min.eval(n);
                let cut = grid.dealias_cut() as f64 * (grid.dim() as f64).sqrt();
                if k > cut {
                    return Ok(SpectralField::zeros(grid, crate::FieldKind::Real));
                }
                match random_divfree(grid, seed.wrapping_add(n as u64), *amplitude, 0.0, k, 2.0 * k) {
                    Ok(f) => Ok(f),
                    Err(Error::ZeroField(_)) => Ok(SpectralField::zeros(grid, crate::FieldKind::Real)),
                    Err(e) => Err(e),
                }
            }
        }
    }

    /// `f_n` built from the first `j_count` profiles and the remainder.
    pub fn synthesize(&self, grid: &Arc<Grid>, n: u32, j_count: usize) -> Result<SpectralField> {
        if j_count > self.len() {
            return Err(Error::Domain(format!("asked for {j_count} of {} profiles", self.len())));
        }
        let mut f = self.remainder_field(grid, n)?;
        for j in 0..j_count {
            f.axpy(1.0, &self.profile_field(grid, j, n)?)?;
        }
        Ok(f)
    }

    /// `λ_j/λ_k + λ_k/λ_j + |x_j - x_k|/λ_j` for `j ≠ k`, zero on the diagonal.
    pub fn orthogonality_matrix(&self, n: u32) -> Vec<Vec<f64>> {
        let len = self.len();
        let mut q = vec![vec![0.0; len]; len];
        for j in 0..len {
            for k in 0..len {
                if j == k {
                    continue;
                }
                let (lj, lk) = (self.profiles[j].scale_at(n), self.profiles[k].scale_at(n));
                let (xj, xk) = (self.profiles[j].core_at(n), self.profiles[k].core_at(n));
                let dist = xj.iter().zip(&xk).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                q[j][k] = lj / lk + lk / lj + dist / lj;
            }
        }
        q
    }

    pub fn classes(&self) -> Vec<ScaleClass> {
        self.profiles.iter().map(|p| classify_scale(&p.scale)).collect()
    }
}

/// Both sides of a norm-splitting identity at one index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    /// `‖f_n‖_p^p`, or `‖f_n‖²_{Ḣ^{d/2-1}}` in the Sobolev frame.
    pub lhs: f64,
    /// `Σ_j ‖φ_j‖_p^p`, or `Σ_j ‖φ_j‖² + ‖ψ_n‖²` in the Sobolev frame.
    pub rhs: f64,
    /// `(lhs - rhs) / rhs`.
    pub gap: f64,
}

/// Compares the norm of `f_n` with the sum over its profiles.
pub fn norm_splitting_check(
    decomp: &ProfileDecomposition,
    grid: &Arc<Grid>,
    n: u32,
    j_count: usize,
) -> Result<SplittingReport> {
    let f = decomp.synthesize(grid, n, j_count)?;
    let (lhs, mut rhs) = match decomp.frame {
        Frame::Lp { p } => {
            let mut rhs = 0.0;
            for j in 0..j_count {
                rhs += decomp.reference_profile(grid, j)?.lp_norm(p)?.powf(p);
            }
            (f.lp_norm(p)?.powf(p), rhs)
        }
        Frame::Sobolev => {
            let s = grid.dim() as f64 / 2.0 - 1.0;
            let mut rhs = 0.0;
            for j in 0..j_count {
                rhs += decomp.reference_profile(grid, j)?.hdot_norm(s).powi(2);
            }
            (f.hdot_norm(s).powi(2), rhs)
        }
    };
    if decomp.frame == Frame::Sobolev {
        rhs += decomp.remainder_field(grid, n)?.hdot_norm(grid.dim() as f64 / 2.0 - 1.0).powi(2);
    }
    Ok(SplittingReport {
        lhs,
        rhs,
        gap: if rhs == 0.0 { lhs } else { (lhs - rhs) / rhs },
    })
}

/// `g · χ_{1/η <= |g| <= η}` on the lattice.
pub fn truncate(g: &SpectralField, eta: f64) -> Result<SpectralField> {
    let values = g.to_physical()?;
    let d = g.dim();
    let len = g.grid().len();
    let mut out = values.clone();
    for i in 0..len {
        let m = (0..d).map(|a| values[a][i] * values[a][i]).sum::<f64>().sqrt();
        if !(m >= 1.0 / eta && m <= eta) {
            for comp in out.iter_mut() {
                comp[i] = 0.0;
            }
        }
    }
    SpectralField::from_physical(g.grid(), &out)
}

/// Regularity `d/r - d/p` of the remainder norm for `r = 4p/3`.
pub fn remainder_exponents(d: usize, p: f64) -> (f64, f64) {
    let r = 4.0 * p / 3.0;
    (d as f64 / r - d as f64 / p, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallnessReport {
    /// `‖Σ_{vanishing scales} (Λφ_j)_η‖_{p1}`.
    pub vanishing: f64,
    /// `‖Σ_{divergent scales} (Λφ_j)_η‖_{p2}`.
    pub divergent: f64,
    /// Remainder norm in `Ḃ^{d/r - d/p}_{r,r}`, `r = 4p/3`.
    pub remainder: f64,
}

/// Norms that the profile theory predicts to be small along the sequence.
pub fn smallness_checks(
    decomp: &ProfileDecomposition,
    grid: &Arc<Grid>,
    n: u32,
    eta: f64,
    p: f64,
    p1: f64,
    p2: f64,
) -> Result<SmallnessReport> {
    if !(eta >= 1.0) {
        return Err(Error::Domain(format!("η must be >= 1, got {eta}")));
    }
    if !(p1 >= 1.0 && p1 < p && p2 > p) {
        return Err(Error::Domain(format!("need 1 <= p1 < p < p2, got p1={p1}, p={p}, p2={p2}")));
    }
    let classes = decomp.classes();
    let mut vanishing = SpectralField::zeros(grid, crate::FieldKind::Real);
    let mut divergent = vanishing.clone();
    for (j, class) in classes.iter().enumerate() {
        match class {
            ScaleClass::Vanishing => vanishing.axpy(1.0, &decomp.profile_field(grid, j, n)?)?,
            ScaleClass::Divergent => divergent.axpy(1.0, &decomp.profile_field(grid, j, n)?)?,
            ScaleClass::Constant => {}
        }
    }
    let (s, r) = remainder_exponents(grid.dim(), p);
    Ok(SmallnessReport {
        vanishing: truncate(&vanishing, eta)?.lp_norm(p1)?,
        divergent: truncate(&divergent, eta)?.lp_norm(p2)?,
        remainder: besov_norm(&decomp.remainder_field(grid, n)?, s, r, r)?.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementaryReport {
    /// `| |Σ a_j|^m - Σ |a_j|^m |`.
    pub lhs: f64,
    /// `Σ_{j ≠ k} |a_j| |a_k|^{m-1}`.
    pub rhs: f64,
}

pub fn elementary_inequality_check(a: &[f64], m: f64) -> Result<ElementaryReport> {
    if !(m > 1.0) {
        return Err(Error::Domain(format!("exponent must exceed 1, got {m}")));
    }
    let sum: f64 = a.iter().sum();
    let lhs = (sum.abs().powf(m) - a.iter().map(|v| v.abs().powf(m)).sum::<f64>()).abs();
    let mut rhs = 0.0;
    for (j, x) in a.iter().enumerate() {
        for (k, y) in a.iter().enumerate() {
            if j != k {
                rhs += x.abs() * y.abs().powf(m - 1.0);
            }
        }
    }
    Ok(ElementaryReport { lhs, rhs })
}

/// Largest `lhs / rhs` over a corpus; the fitted constant of the inequality.
pub fn fit_elementary_constant(corpus: &[Vec<f64>], m: f64) -> Result<f64> {
    let mut c = 0.0f64;
    for a in corpus {
        let r = elementary_inequality_check(a, m)?;
        if r.rhs > 0.0 {
            c = c.max(r.lhs / r.rhs);
        }
    }
    Ok(c)
}
