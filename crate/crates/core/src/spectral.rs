//! Leray projection, heat semigroup and the projected nonlinear term.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Direction;
use crate::field::{real_inverse, FieldKind, SpectralField};
use crate::grid::Grid;

/// Tolerance on the relative longitudinal part accepted as divergence free.
pub const DIVERGENCE_TOL: f64 = 1e-10;

/// Projects onto divergence-free fields: `û - ξ (ξ · û) / |ξ|²`.
pub fn leray_project(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    leray_in_place(&mut out);
    out
}

pub(crate) fn leray_in_place(f: &mut SpectralField) {
    let g = f.grid().clone();
    let d = g.dim();
    let comps = f.components_mut();
    for idx in 0..g.len() {
        let k2 = g.k2()[idx];
        if k2 == 0 {
            continue;
        }
        let k = g.mode(idx);
        let dot: Complex64 = (0..d).map(|a| comps[a][idx] * k[a] as f64).sum();
        let s = dot / k2 as f64;
        for a in 0..d {
            comps[a][idx] -= s * k[a] as f64;
        }
    }
}

/// Heat semigroup `e^{tΔ} f`, multiplying each mode by `e^{-t|ξ|²}`.
pub fn heat_propagate(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTime(format!("heat time must be finite and >= 0, got {t}")));
    }
    let g = f.grid().clone();
    Ok(f.with_multiplier(|idx| (-t * g.xi2(idx)).exp()))
}

/// A `d × d` matrix field with entries `f_{ji}` stored by Fourier coefficients.
///
/// The divergence contracts the first index: `(∇ · f)_i = Σ_j ∂_j f_{ji}`.
#[derive(Debug, Clone)]
pub struct TensorField {
    grid: Arc<Grid>,
    kind: FieldKind,
    entries: Vec<Vec<Complex64>>,
}

impl TensorField {
    pub fn zeros(grid: &Arc<Grid>, kind: FieldKind) -> TensorField {
        TensorField {
            grid: grid.clone(),
            kind,
            entries: vec![vec![Complex64::default(); grid.len()]; grid.dim() * grid.dim()],
        }
    }

    pub fn from_entries(grid: &Arc<Grid>, kind: FieldKind, entries: Vec<Vec<Complex64>>) -> Result<TensorField> {
        let d = grid.dim();
        if entries.len() != d * d || entries.iter().any(|e| e.len() != grid.len()) {
            return Err(Error::GridMismatch(format!("expected {} entries of length {}", d * d, grid.len())));
        }
        Ok(TensorField {
            grid: grid.clone(),
            kind,
            entries,
        })
    }

    /// The pointwise product `u_j v_i`, formed on the lattice without dealiasing.
    pub fn outer(u: &SpectralField, v: &SpectralField) -> Result<TensorField> {
        u.grid().same_as(v.grid())?;
        let g = u.grid().clone();
        let d = g.dim();
        let kind = u.kind().join(v.kind());
        let symmetric = std::ptr::eq(u, v);
        let mut entries = vec![Vec::new(); d * d];
        if kind == FieldKind::Real {
            let pu = real_inverse(g.fft(), u.components());
            let pv = if symmetric { pu.clone() } else { real_inverse(g.fft(), v.components()) };
            let mut pairs = Vec::new();
            for j in 0..d {
                for i in 0..d {
                    if symmetric && i < j {
                        continue;
                    }
                    pairs.push((j, i));
                }
            }
            let products: Vec<Vec<f64>> = pairs
                .iter()
                .map(|&(j, i)| pu[j].iter().zip(&pv[i]).map(|(a, b)| a * b).collect())
                .collect();
            let coeffs = crate::field::real_forward(&g, &products);
            for (&(j, i), c) in pairs.iter().zip(coeffs) {
                if symmetric && i != j {
                    entries[i * d + j] = c.clone();
                }
                entries[j * d + i] = c;
            }
        } else {
            let pu = u.to_physical_complex();
            let pv = if symmetric { pu.clone() } else { v.to_physical_complex() };
            let scale = 1.0 / g.len() as f64;
            for j in 0..d {
                for i in 0..d {
                    let mut buf: Vec<Complex64> = pu[j].iter().zip(&pv[i]).map(|(a, b)| a * b).collect();
                    g.fft().process(&mut buf, Direction::Forward);
                    buf.iter_mut().for_each(|z| *z *= scale);
                    entries[j * d + i] = buf;
                }
            }
        }
        Ok(TensorField {
            grid: g,
            kind,
            entries,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Entry `f_{ji}`.
    pub fn entry(&self, j: usize, i: usize) -> &[Complex64] {
        &self.entries[j * self.grid.dim() + i]
    }

    pub fn entries(&self) -> &[Vec<Complex64>] {
        &self.entries
    }

    pub fn axpy(&mut self, alpha: f64, other: &TensorField) -> Result<()> {
        self.grid.same_as(&other.grid)?;
        self.kind = self.kind.join(other.kind);
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y * alpha);
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.entries.iter_mut().flatten().for_each(|z| *z *= alpha);
    }

    /// Multiplies every mode of every entry by a real symbol.
    pub fn apply_multiplier<F: Fn(usize) -> f64>(&mut self, m: F) {
        let symbol: Vec<f64> = (0..self.grid.len()).map(m).collect();
        for e in &mut self.entries {
            e.iter_mut().zip(&symbol).for_each(|(z, s)| *z *= *s);
        }
    }

    /// `(∇ · f)_i = Σ_j ∂_j f_{ji}`.
    pub fn divergence(&self) -> SpectralField {
        let g = &self.grid;
        let d = g.dim();
        let s = 1.0 / g.box_scale();
        let mut comps = vec![vec![Complex64::default(); g.len()]; d];
        for idx in 0..g.len() {
            let k = g.mode(idx);
            for (i, comp) in comps.iter_mut().enumerate() {
                let mut acc = Complex64::default();
                for j in 0..d {
                    acc += self.entries[j * d + i][idx] * (k[j] as f64 * s);
                }
                comp[idx] = Complex64::new(-acc.im, acc.re);
            }
        }
        SpectralField::from_coefficients(g, self.kind, comps).expect("shapes agree by construction")
    }

    /// Pointwise Frobenius norm on the lattice.
    pub fn magnitudes(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut acc = vec![0.0; g.len()];
        for e in &self.entries {
            let mut buf = e.clone();
            g.fft().process(&mut buf, Direction::Inverse);
            match self.kind {
                FieldKind::Real => acc.iter_mut().zip(&buf).for_each(|(s, v)| *s += v.re * v.re),
                FieldKind::Complex => acc.iter_mut().zip(&buf).for_each(|(s, v)| *s += v.norm_sqr()),
            }
        }
        acc.iter_mut().for_each(|s| *s = s.sqrt());
        acc
    }

    /// Lattice sup norm of the Frobenius magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.magnitudes().into_iter().fold(0.0, f64::max)
    }
}

/// The projected nonlinear term `ℙ Σ_j ∂_j (u_j v_i)` with two-thirds dealiasing
/// of both inputs and of the output.
pub fn nonlinear_div(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.grid().same_as(v.grid())?;
    for f in [u, v] {
        let defect = f.divergence_defect();
        if defect > DIVERGENCE_TOL {
            return Err(Error::NotDivergenceFree {
                residual: defect,
                allowed: DIVERGENCE_TOL,
            });
        }
    }
    if std::ptr::eq(u, v) {
        Ok(nonlinear_self(u))
    } else {
        Ok(nonlinear_pair(u, v))
    }
}

pub(crate) fn nonlinear_self(u: &SpectralField) -> SpectralField {
    let ud = u.dealiased();
    project_band(TensorField::outer(&ud, &ud).expect("same grid").divergence())
}

pub(crate) fn nonlinear_pair(u: &SpectralField, v: &SpectralField) -> SpectralField {
    let ud = u.dealiased();
    let vd = v.dealiased();
    project_band(TensorField::outer(&ud, &vd).expect("same grid").divergence())
}

pub(crate) fn project_band(mut f: SpectralField) -> SpectralField {
    let g = f.grid().clone();
    f.apply_multiplier(|idx| if g.in_band(idx) { 1.0 } else { 0.0 });
    leray_in_place(&mut f);
    f
}
