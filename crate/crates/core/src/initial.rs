//! Library of initial data.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldKind, SpectralField};
use crate::grid::Grid;
use crate::lp::phi;
use crate::spectral::leray_project;

/// How the initial field is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// The Taylor-Green vortex at the lowest lattice frequency.
    TaylorGreen { amplitude: f64 },
    /// Gaussian random solenoidal field with a power-law spectrum on an
    /// integer shell `k_min <= |k| <= k_max`, normalized to a given sup norm.
    RandomDivfree {
        seed: u64,
        amplitude: f64,
        #[serde(default)]
        slope: f64,
        k_min: f64,
        k_max: f64,
    },
    /// Data supported in `ξ_i >= 2^{level - 1}` for every `i`, with
    /// `û¹(ξ) = c 2^{level(1-d)} Π φ̃(2^{-level} ξ_i)` and `û² = -(ξ₁/ξ₂) û¹`.
    HalfSpace { level: i32, c: f64 },
    /// A localized swirl `∇^⊥` of a Gaussian, with sup norm `amplitude`.
    Bump {
        amplitude: f64,
        width: f64,
        center: Vec<f64>,
    },
    /// A localized jet `a (G + y ∂_y G, -y ∂_x G)` with a Gaussian `G`, whose
    /// magnitude peaks at the center with value `amplitude`.
    Jet {
        amplitude: f64,
        width: f64,
        center: Vec<f64>,
    },
    /// A field stored in the binary field format.
    File { path: PathBuf },
}

/// Transformations applied after generation, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum PostOp {
    LerayProject,
    /// `λ u(λ x)`, carried to the grid with box scale `Λ / λ`.
    Rescale { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataSpec {
    pub generator: Generator,
    #[serde(default)]
    pub post: Vec<PostOp>,
}

impl InitialDataSpec {
    pub fn new(generator: Generator) -> InitialDataSpec {
        InitialDataSpec {
            generator,
            post: Vec::new(),
        }
    }

    /// Generates the field. Every generator output is solenoidal.
    pub fn build(&self, grid: &Arc<Grid>) -> Result<SpectralField> {
        let mut f = match &self.generator {
            Generator::TaylorGreen { amplitude } => taylor_green(grid, *amplitude)?,
            Generator::RandomDivfree {
                seed,
                amplitude,
                slope,
                k_min,
                k_max,
            } => random_divfree(grid, *seed, *amplitude, *slope, *k_min, *k_max)?,
            Generator::HalfSpace { level, c } => half_space(grid, *level, *c)?,
            Generator::Bump {
                amplitude,
                width,
                center,
            } => swirl_bump(grid, *amplitude, *width, center)?,
            Generator::Jet {
                amplitude,
                width,
                center,
            } => jet_bump(grid, *amplitude, *width, center)?,
            Generator::File { path } => crate::io::load_field(path)?,
        };
        for op in &self.post {
            f = match op {
                PostOp::LerayProject => leray_project(&f),
                PostOp::Rescale { lambda } => f.rescaled(*lambda)?,
            };
        }
        Ok(f)
    }
}

fn need_dim(grid: &Grid, what: &str) -> Result<()> {
    if grid.dim() < 2 {
        Err(Error::Config(format!("{what} needs dimension 2 or 3")))
    } else {
        Ok(())
    }
}

pub fn taylor_green(grid: &Arc<Grid>, amplitude: f64) -> Result<SpectralField> {
    need_dim(grid, "Taylor-Green data")?;
    let s = 1.0 / grid.box_scale();
    let three = grid.dim() == 3;
    SpectralField::from_fn(grid, |x| {
        let (a, b) = (x[0] * s, x[1] * s);
        let c = if three { (x[2] * s).cos() } else { 1.0 };
        [
            amplitude * a.sin() * b.cos() * c,
            -amplitude * a.cos() * b.sin() * c,
            0.0,
        ]
    })
}

pub fn random_divfree(
    grid: &Arc<Grid>,
    seed: u64,
    amplitude: f64,
    slope: f64,
    k_min: f64,
    k_max: f64,
) -> Result<SpectralField> {
    need_dim(grid, "random solenoidal data")?;
    if !(k_min >= 0.0 && k_max >= k_min) {
        return Err(Error::Config(format!("bad shell [{k_min}, {k_max}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid, FieldKind::Real);
    for idx in 0..grid.len() {
        let k2 = grid.k2()[idx] as f64;
        let k = k2.sqrt();
        let draws: Vec<(f64, f64)> = (0..grid.dim())
            .map(|_| (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        if k2 == 0.0 || k < k_min || k > k_max || !grid.in_band(idx) {
            continue;
        }
        let amp = k.powf(slope);
        for (a, (re, im)) in draws.into_iter().enumerate() {
            f.component_mut(a)[idx] = Complex64::new(re, im) * amp;
        }
    }
    f.symmetrize();
    let mut f = leray_project(&f);
    let sup = f.sup_norm();
    if sup == 0.0 {
        return Err(Error::ZeroField("random shell contains no lattice modes".into()));
    }
    f.scale(amplitude / sup);
    Ok(f)
}

/// `φ̃(η) = φ(η)` on `1/2 <= η <= 2`, zero otherwise.
pub fn phi_tilde(eta: f64) -> f64 {
    if (0.5..=2.0).contains(&eta) {
        phi(eta)
    } else {
        0.0
    }
}

pub fn half_space(grid: &Arc<Grid>, level: i32, c: f64) -> Result<SpectralField> {
    need_dim(grid, "half-space data")?;
    let d = grid.dim();
    let scale = 2f64.powi(-level);
    let pre = c * 2f64.powi(level * (1 - d as i32)) / grid.volume();
    let mut f = SpectralField::zeros(grid, FieldKind::Complex);
    for idx in 0..grid.len() {
        let xi = grid.frequency(idx);
        let prod: f64 = (0..d).map(|a| phi_tilde(scale * xi[a])).product();
        if prod == 0.0 {
            continue;
        }
        let u1 = pre * prod;
        f.component_mut(0)[idx] = Complex64::new(u1, 0.0);
        f.component_mut(1)[idx] = Complex64::new(-xi[0] / xi[1] * u1, 0.0);
    }
    Ok(f)
}

pub fn swirl_bump(grid: &Arc<Grid>, amplitude: f64, width: f64, center: &[f64]) -> Result<SpectralField> {
    need_dim(grid, "bump data")?;
    if center.len() != grid.dim() || !(width > 0.0) {
        return Err(Error::Config("bump needs a positive width and one center coordinate per axis".into()));
    }
    let norm = amplitude * width * 0.5f64.exp();
    let g = grid.clone();
    let f = SpectralField::from_fn(grid, |x| {
        let r = g.displacement(x, center);
        let rho2 = (0..g.dim()).map(|a| r[a] * r[a]).sum::<f64>();
        let e = (-rho2 / (2.0 * width * width)).exp() / (width * width);
        [-norm * r[1] * e, norm * r[0] * e, 0.0]
    })?;
    Ok(leray_project(&f))
}

pub fn jet_bump(grid: &Arc<Grid>, amplitude: f64, width: f64, center: &[f64]) -> Result<SpectralField> {
    need_dim(grid, "jet data")?;
    if center.len() != grid.dim() || !(width > 0.0) {
        return Err(Error::Config("jet needs a positive width and one center coordinate per axis".into()));
    }
    let g = grid.clone();
    let w2 = width * width;
    let f = SpectralField::from_fn(grid, |x| {
        let r = g.displacement(x, center);
        let rho2 = (0..g.dim()).map(|a| r[a] * r[a]).sum::<f64>();
        let e = amplitude * (-rho2 / (2.0 * w2)).exp();
        [e * (1.0 - r[1] * r[1] / w2), e * r[0] * r[1] / w2, 0.0]
    })?;
    Ok(leray_project(&f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn random_data_is_deterministic_solenoidal_and_normalized() {
        let g = GridSpec::new(3, 16).build().unwrap();
        let spec = InitialDataSpec::new(Generator::RandomDivfree {
            seed: 7,
            amplitude: 2.0,
            slope: -1.0,
            k_min: 1.0,
            k_max: 4.0,
        });
        let a = spec.build(&g).unwrap();
        let b = spec.build(&g).unwrap();
        assert_eq!(a.components(), b.components());
        assert!(a.divergence_defect() < 1e-15);
        assert!((a.sup_norm() - 2.0).abs() < 1e-12);
        assert!(a.is_hermitian(0.0));
    }

    #[test]
    fn half_space_support_and_solenoidality() {
        let g = GridSpec::new(2, 64).build().unwrap();
        let f = half_space(&g, 3, 1.0).unwrap();
        assert_eq!(f.kind(), FieldKind::Complex);
        assert!(f.divergence_defect() < 1e-15);
        for idx in 0..g.len() {
            let k = g.mode(idx);
            if f.component(0)[idx].norm() > 0.0 {
                assert!(k[0] >= 5 && k[0] <= 12 && k[1] >= 5 && k[1] <= 12, "{k:?}");
            }
        }
    }

    #[test]
    fn swirl_bump_has_requested_sup() {
        let g = GridSpec::new(2, 128).build().unwrap();
        let f = swirl_bump(&g, 3.0, 0.4, &[1.0, 2.0]).unwrap();
        assert!((f.sup_norm() - 3.0).abs() < 0.02);
    }

    #[test]
    fn jet_peaks_at_its_center() {
        let g = GridSpec::new(3, 32).refine_sup(false).build().unwrap();
        let c = g.position(g.index_of(&[10, 12, 16]));
        let f = jet_bump(&g, 2.0, 0.5, &c[..3]).unwrap();
        assert!(f.divergence_defect() < 1e-12);
        let mags = f.magnitudes();
        let (arg, max) = mags.iter().enumerate().fold((0, 0.0), |b, (i, &m)| if m > b.1 { (i, m) } else { b });
        assert_eq!(arg, g.index_of(&[10, 12, 16]));
        assert!((max - 2.0).abs() < 1e-6, "{max}");
    }

    #[test]
    fn json_round_trip() {
        let spec = InitialDataSpec {
            generator: Generator::HalfSpace { level: 3, c: 0.5 },
            post: vec![PostOp::LerayProject, PostOp::Rescale { lambda: 2.0 }],
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: InitialDataSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
