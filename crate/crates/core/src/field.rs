//! Vector fields stored by their Fourier coefficients.
//!
//! The coefficients `c_k` of a field `u` satisfy
//! `u(x) = Σ_k c_k e^{i ξ_k · x}` with `ξ_k = k / Λ`, so the continuum transform
//! is `û(ξ_k) = (2πΛ)^d c_k` and Parseval reads `‖u‖₂² = (2πΛ)^d Σ |c_k|²`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{CubeFft, Direction};
use crate::grid::Grid;

/// Whether a field takes real values in physical space.
///
/// Real fields keep Hermitian-symmetric coefficients. Complex fields carry
/// arbitrary coefficients and arise for data supported in a half-space of
/// frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Real,
    Complex,
}

impl FieldKind {
    pub fn join(self, other: FieldKind) -> FieldKind {
        if self == FieldKind::Real && other == FieldKind::Real {
            FieldKind::Real
        } else {
            FieldKind::Complex
        }
    }
}

/// A `d`-component vector field on a periodic grid.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    kind: FieldKind,
    comps: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>, kind: FieldKind) -> SpectralField {
        SpectralField {
            grid: grid.clone(),
            kind,
            comps: vec![vec![Complex64::default(); grid.len()]; grid.dim()],
        }
    }

    /// Builds a field from coefficient arrays, one per component.
    pub fn from_coefficients(
        grid: &Arc<Grid>,
        kind: FieldKind,
        comps: Vec<Vec<Complex64>>,
    ) -> Result<SpectralField> {
        if comps.len() != grid.dim() || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch(format!(
                "expected {} components of length {}",
                grid.dim(),
                grid.len()
            )));
        }
        if comps.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("coefficient".into()));
        }
        let mut f = SpectralField {
            grid: grid.clone(),
            kind,
            comps,
        };
        if kind == FieldKind::Real {
            f.symmetrize();
        }
        Ok(f)
    }

    /// Transforms real physical samples, one array per component.
    pub fn from_physical(grid: &Arc<Grid>, values: &[Vec<f64>]) -> Result<SpectralField> {
        check_samples(grid, values.len(), values.iter().map(|v| v.len()))?;
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("physical sample".into()));
        }
        let comps = real_forward(grid, values);
        let mut f = SpectralField {
            grid: grid.clone(),
            kind: FieldKind::Real,
            comps,
        };
        f.symmetrize();
        Ok(f)
    }

    /// Transforms complex physical samples.
    pub fn from_physical_complex(grid: &Arc<Grid>, values: &[Vec<Complex64>]) -> Result<SpectralField> {
        check_samples(grid, values.len(), values.iter().map(|v| v.len()))?;
        let scale = 1.0 / grid.len() as f64;
        let comps = values
            .iter()
            .map(|v| {
                let mut buf = v.clone();
                grid.fft().process(&mut buf, Direction::Forward);
                buf.iter_mut().for_each(|z| *z *= scale);
                buf
            })
            .collect();
        SpectralField::from_coefficients(grid, FieldKind::Complex, comps)
    }

    /// Samples a real vector function at the lattice points.
    pub fn from_fn<F>(grid: &Arc<Grid>, f: F) -> Result<SpectralField>
    where
        F: Fn(&[f64; 3]) -> [f64; 3],
    {
        let d = grid.dim();
        let mut values = vec![vec![0.0; grid.len()]; d];
        for idx in 0..grid.len() {
            let v = f(&grid.position(idx));
            for a in 0..d {
                values[a][idx] = v[a];
            }
        }
        SpectralField::from_physical(grid, &values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, a: usize) -> &[Complex64] {
        &self.comps[a]
    }

    pub fn component_mut(&mut self, a: usize) -> &mut [Complex64] {
        &mut self.comps[a]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    /// Coefficient of component `a` at integer wavevector `k`.
    pub fn coefficient(&self, a: usize, k: &[i64]) -> Complex64 {
        self.comps[a][self.grid.index_of(k)]
    }

    pub fn set_coefficient(&mut self, a: usize, k: &[i64], value: Complex64) {
        let idx = self.grid.index_of(k);
        self.comps[a][idx] = value;
    }

    /// Marks the field as complex valued, dropping any symmetry requirement.
    pub fn into_complex(mut self) -> SpectralField {
        self.kind = FieldKind::Complex;
        self
    }

    /// Largest defect `|c_k - conj(c_{-k})|` over all modes and components.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        self.comps
            .iter()
            .flat_map(|c| (0..g.len()).map(move |idx| (c[idx] - c[g.conjugate_index(idx)].conj()).norm()))
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Projects onto Hermitian-symmetric coefficients if the field is real.
    pub fn symmetrize(&mut self) {
        if self.kind != FieldKind::Real {
            return;
        }
        let g = self.grid.clone();
        for c in &mut self.comps {
            for idx in 0..g.len() {
                let j = g.conjugate_index(idx);
                if j < idx {
                    continue;
                }
                let avg = (c[idx] + c[j].conj()) * 0.5;
                c[idx] = avg;
                c[j] = avg.conj();
            }
        }
    }

    /// Real physical samples, one array per component.
    pub fn to_physical(&self) -> Result<Vec<Vec<f64>>> {
        if self.kind != FieldKind::Real {
            return Err(Error::Domain("complex field has no real physical representation".into()));
        }
        Ok(real_inverse(self.grid.fft(), &self.comps))
    }

    /// Complex physical samples, one array per component.
    pub fn to_physical_complex(&self) -> Vec<Vec<Complex64>> {
        self.comps
            .iter()
            .map(|c| {
                let mut buf = c.clone();
                self.grid.fft().process(&mut buf, Direction::Inverse);
                buf
            })
            .collect()
    }

    /// Pointwise Euclidean magnitude `|u(x_j)|` on the lattice.
    pub fn magnitudes(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid.len()];
        match self.kind {
            FieldKind::Real => {
                for comp in real_inverse(self.grid.fft(), &self.comps) {
                    acc.iter_mut().zip(&comp).for_each(|(s, v)| *s += v * v);
                }
            }
            FieldKind::Complex => {
                for c in &self.comps {
                    let mut buf = c.clone();
                    self.grid.fft().process(&mut buf, Direction::Inverse);
                    acc.iter_mut().zip(&buf).for_each(|(s, v)| *s += v.norm_sqr());
                }
            }
        }
        acc.iter_mut().for_each(|s| *s = s.sqrt());
        acc
    }

    /// Largest lattice magnitude.
    pub fn sup_norm_lattice(&self) -> f64 {
        self.magnitudes().into_iter().fold(0.0, f64::max)
    }

    /// Largest magnitude on the lattice refined twice by spectral interpolation.
    pub fn sup_norm_refined(&self) -> f64 {
        let fine = self.grid.fine_fft();
        let mut acc = vec![0.0f64; fine.len()];
        let mut buf = vec![Complex64::default(); fine.len()];
        let targets = padding_targets(&self.grid, 2 * self.grid.n());
        for c in &self.comps {
            buf.iter_mut().for_each(|z| *z = Complex64::default());
            for (idx, list) in targets.iter().enumerate() {
                for &(j, w) in list {
                    buf[j] += c[idx] * w;
                }
            }
            fine.process(&mut buf, Direction::Inverse);
            match self.kind {
                FieldKind::Real => acc.iter_mut().zip(&buf).for_each(|(s, v)| *s += v.re * v.re),
                FieldKind::Complex => acc.iter_mut().zip(&buf).for_each(|(s, v)| *s += v.norm_sqr()),
            }
        }
        acc.into_iter().fold(0.0, f64::max).sqrt()
    }

    /// The sup norm, refined or not according to the grid setting.
    pub fn sup_norm(&self) -> f64 {
        if self.grid.refine_sup() {
            self.sup_norm_refined()
        } else {
            self.sup_norm_lattice()
        }
    }

    /// Rigorous upper bound `Σ_k |c_k|` on the sup norm.
    pub fn coefficient_l1(&self) -> f64 {
        (0..self.grid.len())
            .map(|idx| self.comps.iter().map(|c| c[idx].norm_sqr()).sum::<f64>().sqrt())
            .sum()
    }

    /// `Σ_k |c_k|²`.
    pub fn coefficient_l2_sq(&self) -> f64 {
        self.comps.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// `‖u‖₂` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.volume() * self.coefficient_l2_sq()).sqrt()
    }

    /// `½‖u‖₂²`.
    pub fn energy(&self) -> f64 {
        0.5 * self.grid.volume() * self.coefficient_l2_sq()
    }

    /// `‖∇u‖₂²`.
    pub fn gradient_l2_sq(&self) -> f64 {
        let g = &self.grid;
        let s: f64 = self
            .comps
            .iter()
            .flat_map(|c| c.iter().enumerate().map(|(idx, z)| g.xi2(idx) * z.norm_sqr()))
            .sum();
        g.volume() * s
    }

    /// Homogeneous Sobolev norm `‖(-Δ)^{s/2} u‖₂`, ignoring the zero mode.
    pub fn hdot_norm(&self, s: f64) -> f64 {
        let g = &self.grid;
        let sum: f64 = (0..g.len())
            .filter(|&idx| g.k2()[idx] > 0)
            .map(|idx| g.xi2(idx).powf(s) * self.comps.iter().map(|c| c[idx].norm_sqr()).sum::<f64>())
            .sum();
        (g.volume() * sum).sqrt()
    }

    /// Lattice `L^p` norm; `p = 2` uses Parseval and `p = ∞` the sup norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            return Ok(self.sup_norm());
        }
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("L^p exponent must be >= 1, got {p}")));
        }
        if p == 2.0 {
            return Ok(self.l2_norm());
        }
        Ok(lattice_lp(&self.magnitudes(), p, self.grid.cell_volume()))
    }

    /// Largest longitudinal coefficient `|k · c_k| / |k|` relative to the
    /// coefficient `ℓ²` norm. Zero for exactly solenoidal fields.
    pub fn divergence_defect(&self) -> f64 {
        let g = &self.grid;
        let norm = self.coefficient_l2_sq().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for idx in 0..g.len() {
            let k2 = g.k2()[idx];
            if k2 == 0 {
                continue;
            }
            let k = g.mode(idx);
            let dot: Complex64 = (0..g.dim()).map(|a| self.comps[a][idx] * k[a] as f64).sum();
            worst = worst.max(dot.norm() / (k2 as f64).sqrt());
        }
        worst / norm
    }

    /// `max_ξ |ξ · û(ξ)|` with the continuum normalization of `û`.
    pub fn max_divergence(&self) -> f64 {
        let g = &self.grid;
        let vol = g.volume();
        (0..g.len())
            .map(|idx| {
                let xi = g.frequency(idx);
                let dot: Complex64 = (0..g.dim()).map(|a| self.comps[a][idx] * xi[a]).sum();
                dot.norm() * vol
            })
            .fold(0.0, f64::max)
    }

    /// Fails unless the field is solenoidal to relative round-off.
    pub fn ensure_divergence_free(&self, tol: f64) -> Result<()> {
        let defect = self.divergence_defect();
        if defect <= tol {
            Ok(())
        } else {
            Err(Error::NotDivergenceFree {
                residual: defect,
                allowed: tol,
            })
        }
    }

    fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        self.grid.same_as(&other.grid)
    }

    /// `self + alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) -> Result<()> {
        self.check_compatible(other)?;
        self.kind = self.kind.join(other.kind);
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y * alpha);
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scaled(&self, alpha: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn scale(&mut self, alpha: f64) {
        self.comps.iter_mut().flatten().for_each(|z| *z *= alpha);
    }

    /// Multiplies every mode by a real symbol `m(idx)`.
    pub fn apply_multiplier<F: Fn(usize) -> f64>(&mut self, m: F) {
        let len = self.grid.len();
        let symbol: Vec<f64> = (0..len).map(m).collect();
        for c in &mut self.comps {
            c.iter_mut().zip(&symbol).for_each(|(z, s)| *z *= *s);
        }
    }

    pub fn with_multiplier<F: Fn(usize) -> f64>(&self, m: F) -> SpectralField {
        let mut out = self.clone();
        out.apply_multiplier(m);
        out
    }

    /// Multiplies every mode by a complex symbol `m(idx)`. The result is
    /// complex unless the caller knows the symbol preserves realness.
    pub fn with_complex_multiplier<F: Fn(usize) -> Complex64>(&self, kind: FieldKind, m: F) -> SpectralField {
        let mut out = self.clone();
        out.kind = kind;
        let symbol: Vec<Complex64> = (0..self.grid.len()).map(m).collect();
        for c in &mut out.comps {
            c.iter_mut().zip(&symbol).for_each(|(z, s)| *z *= *s);
        }
        out
    }

    /// Zeroes every mode outside the dealiasing band.
    pub fn dealiased(&self) -> SpectralField {
        let g = self.grid.clone();
        self.with_multiplier(|idx| if g.in_band(idx) { 1.0 } else { 0.0 })
    }

    /// Shifts the field by a whole number of lattice cells: `u(· - a)`.
    pub fn translated(&self, shift: &[i64]) -> SpectralField {
        let g = &self.grid;
        let n = g.n() as f64;
        let mut out = self.clone();
        for idx in 0..g.len() {
            let k = g.mode(idx);
            let phase: f64 = (0..g.dim()).map(|a| (k[a] * shift[a]) as f64).sum();
            let rot = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * phase / n);
            for c in &mut out.comps {
                c[idx] *= rot;
            }
        }
        out
    }

    /// The Navier-Stokes rescaling `λ u(λ x)`, carried to the grid with box
    /// scale `Λ / λ`.
    pub fn rescaled(&self, lambda: f64) -> Result<SpectralField> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Domain(format!("scaling factor must be positive, got {lambda}")));
        }
        let grid = self.grid.with_box_scale(self.grid.box_scale() / lambda)?;
        Ok(SpectralField {
            grid,
            kind: self.kind,
            comps: self.comps.iter().map(|c| c.iter().map(|z| z * lambda).collect()).collect(),
        })
    }

    /// Carries the coefficients to a grid over the same box with a different
    /// number of points, zero padding or truncating as needed.
    pub fn resampled(&self, target: &Arc<Grid>) -> Result<SpectralField> {
        let g = &self.grid;
        if target.dim() != g.dim() || target.box_scale() != g.box_scale() {
            return Err(Error::GridMismatch("resampling needs the same box".into()));
        }
        let mut out = SpectralField::zeros(target, self.kind);
        if target.n() >= g.n() {
            let targets = padding_targets(g, target.n());
            for (a, c) in self.comps.iter().enumerate() {
                for (idx, list) in targets.iter().enumerate() {
                    for &(j, w) in list {
                        out.comps[a][j] += c[idx] * w;
                    }
                }
            }
        } else {
            let half = (target.n() / 2) as i64;
            for idx in 0..g.len() {
                let k = g.mode(idx);
                if (0..g.dim()).all(|a| k[a] > -half && k[a] < half) {
                    let j = target.index_of(&k);
                    for a in 0..g.dim() {
                        out.comps[a][j] = self.comps[a][idx];
                    }
                }
            }
        }
        Ok(out)
    }
}

fn check_samples<I: Iterator<Item = usize>>(grid: &Grid, count: usize, lens: I) -> Result<()> {
    if count != grid.dim() {
        return Err(Error::GridMismatch(format!("expected {} components, got {count}", grid.dim())));
    }
    for l in lens {
        if l != grid.len() {
            return Err(Error::GridMismatch(format!("expected {} samples, got {l}", grid.len())));
        }
    }
    Ok(())
}

pub(crate) fn lattice_lp(magnitudes: &[f64], p: f64, cell: f64) -> f64 {
    let m = magnitudes.iter().fold(0.0f64, |a, &b| a.max(b));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = magnitudes.iter().map(|&v| (v / m).powf(p)).sum();
    m * (s * cell).powf(1.0 / p)
}

/// Inverse transforms of Hermitian coefficient arrays, two per complex FFT.
pub(crate) fn real_inverse(fft: &CubeFft, comps: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(comps.len());
    let mut a = 0;
    while a < comps.len() {
        if a + 1 < comps.len() {
            let mut buf: Vec<Complex64> = comps[a]
                .iter()
                .zip(&comps[a + 1])
                .map(|(x, y)| x + Complex64::new(-y.im, y.re))
                .collect();
            fft.process(&mut buf, Direction::Inverse);
            out.push(buf.iter().map(|z| z.re).collect());
            out.push(buf.iter().map(|z| z.im).collect());
            a += 2;
        } else {
            let mut buf = comps[a].clone();
            fft.process(&mut buf, Direction::Inverse);
            out.push(buf.iter().map(|z| z.re).collect());
            a += 1;
        }
    }
    out
}

/// Forward transforms of real arrays, two per complex FFT, normalized to
/// Fourier coefficients.
pub(crate) fn real_forward(grid: &Grid, values: &[Vec<f64>]) -> Vec<Vec<Complex64>> {
    let fft = grid.fft();
    let scale = 1.0 / grid.len() as f64;
    let mut out = Vec::with_capacity(values.len());
    let mut a = 0;
    while a < values.len() {
        if a + 1 < values.len() {
            let mut buf: Vec<Complex64> = values[a]
                .iter()
                .zip(&values[a + 1])
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect();
            fft.process(&mut buf, Direction::Forward);
            let mut ca = vec![Complex64::default(); grid.len()];
            let mut cb = vec![Complex64::default(); grid.len()];
            for idx in 0..grid.len() {
                let z = buf[idx];
                let zc = buf[grid.conjugate_index(idx)].conj();
                ca[idx] = (z + zc) * (0.5 * scale);
                cb[idx] = (z - zc) * Complex64::new(0.0, -0.5 * scale);
            }
            out.push(ca);
            out.push(cb);
            a += 2;
        } else {
            let mut buf: Vec<Complex64> = values[a].iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fft.process(&mut buf, Direction::Forward);
            buf.iter_mut().for_each(|z| *z *= scale);
            out.push(buf);
            a += 1;
        }
    }
    out
}

/// For each coarse mode, the fine-lattice indices and weights that realize
/// band-limited interpolation. Nyquist modes are split evenly between `±N/2`.
fn padding_targets(coarse: &Grid, fine_n: usize) -> Vec<Vec<(usize, f64)>> {
    let d = coarse.dim();
    let half = (coarse.n() / 2) as i64;
    let fine = fine_n as i64;
    (0..coarse.len())
        .map(|idx| {
            let k = coarse.mode(idx);
            let mut list: Vec<(usize, f64)> = vec![(0, 1.0)];
            for a in 0..d {
                let options: Vec<(i64, f64)> = if k[a] == -half {
                    vec![(-half, 0.5), (half, 0.5)]
                } else {
                    vec![(k[a], 1.0)]
                };
                let mut next = Vec::with_capacity(list.len() * options.len());
                for &(j, w) in &list {
                    for &(ka, wa) in &options {
                        next.push((j * fine_n + ka.rem_euclid(fine) as usize, w * wa));
                    }
                }
                list = next;
            }
            list
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn sample_field(dim: usize, n: usize) -> SpectralField {
        let g = GridSpec::new(dim, n).build().unwrap();
        SpectralField::from_fn(&g, |x| {
            [
                x[0].sin() * (2.0 * x[1]).cos() + 0.3,
                (x[0] + x[2]).cos(),
                (3.0 * x[1]).sin() * x[0].cos(),
            ]
        })
        .unwrap()
    }

    #[test]
    fn physical_round_trip_is_exact_to_roundoff() {
        for dim in 1..=3 {
            let f = sample_field(dim, 16);
            let phys = f.to_physical().unwrap();
            let back = SpectralField::from_physical(f.grid(), &phys).unwrap();
            let diff = back.sub(&f).unwrap().coefficient_l2_sq().sqrt();
            assert!(diff < 1e-14, "dim {dim}: {diff}");
        }
    }

    #[test]
    fn parseval_matches_lattice_quadrature() {
        let f = sample_field(3, 16);
        let quad = lattice_lp(&f.magnitudes(), 2.0, f.grid().cell_volume());
        assert!((quad - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
    }

    #[test]
    fn refined_sup_dominates_lattice_sup() {
        let f = sample_field(2, 16);
        assert!(f.sup_norm_refined() >= f.sup_norm_lattice() - 1e-14);
        assert!(f.coefficient_l1() >= f.sup_norm_refined() - 1e-14);
    }

    #[test]
    fn refinement_with_nyquist_content_preserves_lattice_values() {
        let g = GridSpec::new(1, 8).build().unwrap();
        let f = SpectralField::from_fn(&g, |x| [(4.0 * x[0]).cos(), 0.0, 0.0]).unwrap();
        assert!((f.sup_norm_lattice() - 1.0).abs() < 1e-14);
        assert!((f.sup_norm_refined() - 1.0).abs() < 1e-14);
        let fine = f.resampled(&g.with_points(16).unwrap()).unwrap();
        assert!(fine.is_hermitian(1e-15));
    }

    #[test]
    fn translation_by_whole_cells_moves_samples() {
        let f = sample_field(2, 16);
        let t = f.translated(&[3, -2]);
        let a = f.to_physical().unwrap();
        let b = t.to_physical().unwrap();
        let g = f.grid();
        for idx in 0..g.len() {
            let p = g.point(idx);
            let src = g.index_of(&[p[0] as i64 - 3, p[1] as i64 + 2]);
            assert!((b[0][idx] - a[0][src]).abs() < 1e-13);
        }
    }

    #[test]
    fn rescaling_scales_sup_and_box() {
        let f = sample_field(2, 16);
        let r = f.rescaled(2.0).unwrap();
        assert!((r.grid().box_scale() - 0.5).abs() < 1e-15);
        assert!((r.sup_norm() - 2.0 * f.sup_norm()).abs() < 1e-12);
    }

    #[test]
    fn complex_fields_skip_symmetrization() {
        let g = GridSpec::new(2, 8).build().unwrap();
        let mut f = SpectralField::zeros(&g, FieldKind::Complex);
        f.set_coefficient(0, &[1, 0], Complex64::new(1.0, 0.0));
        assert!(!f.is_hermitian(1e-3));
        assert!(f.to_physical().is_err());
        assert!((f.sup_norm() - 1.0).abs() < 1e-14);
    }
}
