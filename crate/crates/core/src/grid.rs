//! Periodic lattices and their Fourier duals.
//!
//! A grid of dimension `d` with `N` points per axis and box scale `Λ` samples
//! the cube `[0, 2πΛ)^d` at `x_j = 2πΛ j / N`. Fourier modes are the integer
//! vectors `k` with `-N/2 <= k_i < N/2` and physical frequency `ξ = k / Λ`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::CubeFft;

/// Serializable description of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    #[serde(default = "default_box_scale")]
    pub box_scale: f64,
    #[serde(default = "default_dealias")]
    pub dealias: f64,
    #[serde(default = "default_refine")]
    pub refine_sup: bool,
}

fn default_box_scale() -> f64 {
    1.0
}

fn default_dealias() -> f64 {
    2.0 / 3.0
}

fn default_refine() -> bool {
    true
}

impl GridSpec {
    pub fn new(dim: usize, n: usize) -> GridSpec {
        GridSpec {
            dim,
            n,
            box_scale: 1.0,
            dealias: default_dealias(),
            refine_sup: true,
        }
    }

    pub fn box_scale(mut self, box_scale: f64) -> GridSpec {
        self.box_scale = box_scale;
        self
    }

    pub fn dealias(mut self, dealias: f64) -> GridSpec {
        self.dealias = dealias;
        self
    }

    pub fn refine_sup(mut self, refine: bool) -> GridSpec {
        self.refine_sup = refine;
        self
    }

    pub fn build(&self) -> Result<Arc<Grid>> {
        Grid::new(self)
    }
}

/// A periodic lattice with precomputed spectral bookkeeping.
pub struct Grid {
    spec: GridSpec,
    kcut: i64,
    wavenumbers: Vec<i64>,
    k2: Vec<u32>,
    modes: Vec<[i32; 3]>,
    conj: Vec<u32>,
    band: Vec<bool>,
    band_levels: Vec<u32>,
    level_of: Vec<u32>,
    fft: CubeFft,
    fine_fft: CubeFft,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Grid) -> bool {
        self.spec.dim == other.spec.dim
            && self.spec.n == other.spec.n
            && self.spec.box_scale == other.spec.box_scale
            && self.spec.dealias == other.spec.dealias
    }
}

pub const NO_LEVEL: u32 = u32::MAX;

impl Grid {
    pub fn new(spec: &GridSpec) -> Result<Arc<Grid>> {
        let GridSpec {
            dim,
            n,
            box_scale,
            dealias,
            ..
        } = *spec;
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(box_scale.is_finite() && box_scale > 0.0) {
            return Err(Error::InvalidGrid(format!("box scale must be positive, got {box_scale}")));
        }
        if !(dealias > 0.0 && dealias <= 1.0) {
            return Err(Error::InvalidGrid(format!("dealias fraction must lie in (0, 1], got {dealias}")));
        }
        let kcut = (dealias * n as f64 / 2.0 + 1e-9).floor() as i64;
        let half = (n / 2) as i64;
        let kcut = kcut.min(half - 1);
        let wavenumbers: Vec<i64> = (0..n as i64).map(|i| if i < half { i } else { i - n as i64 }).collect();
        let len = n.pow(dim as u32);
        let mut k2 = Vec::with_capacity(len);
        let mut band = Vec::with_capacity(len);
        let mut modes = Vec::with_capacity(len);
        let mut conj = Vec::with_capacity(len);
        for idx in 0..len {
            let mut rem = idx;
            let mut s = 0u32;
            let mut inside = true;
            let mut mode = [0i32; 3];
            let mut digits = [0usize; 3];
            for a in (0..dim).rev() {
                digits[a] = rem % n;
                let k = wavenumbers[digits[a]];
                rem /= n;
                mode[a] = k as i32;
                s += (k * k) as u32;
                inside &= k.abs() <= kcut;
            }
            let c = (0..dim).fold(0usize, |acc, a| acc * n + (n - digits[a]) % n);
            k2.push(s);
            band.push(inside);
            modes.push(mode);
            conj.push(c as u32);
        }
        let max_band = (dim as u32) * (kcut * kcut) as u32;
        let mut present = vec![false; max_band as usize + 1];
        for (s, &b) in k2.iter().zip(&band) {
            if b {
                present[*s as usize] = true;
            }
        }
        let band_levels: Vec<u32> = (0..=max_band).filter(|&s| present[s as usize]).collect();
        let mut level_of = vec![NO_LEVEL; max_band as usize + 1];
        for (i, &s) in band_levels.iter().enumerate() {
            level_of[s as usize] = i as u32;
        }
        Ok(Arc::new(Grid {
            spec: spec.clone(),
            kcut,
            wavenumbers,
            k2,
            modes,
            conj,
            band,
            band_levels,
            level_of,
            fft: CubeFft::new(dim, n),
            fine_fft: CubeFft::new(dim, 2 * n),
        }))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn box_scale(&self) -> f64 {
        self.spec.box_scale
    }

    pub fn refine_sup(&self) -> bool {
        self.spec.refine_sup
    }

    /// Number of lattice points, equal to the number of Fourier modes.
    pub fn len(&self) -> usize {
        self.k2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k2.is_empty()
    }

    /// Largest retained integer wavenumber per axis after dealiasing.
    pub fn dealias_cut(&self) -> i64 {
        self.kcut
    }

    /// Side length `2πΛ` of the periodic box.
    pub fn box_length(&self) -> f64 {
        2.0 * PI * self.spec.box_scale
    }

    /// Lattice spacing `2πΛ / N`.
    pub fn spacing(&self) -> f64 {
        self.box_length() / self.spec.n as f64
    }

    /// Volume of one lattice cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.spec.dim as i32)
    }

    /// Volume `(2πΛ)^d` of the box.
    pub fn volume(&self) -> f64 {
        self.box_length().powi(self.spec.dim as i32)
    }

    pub fn wavenumber(&self, i: usize) -> i64 {
        self.wavenumbers[i]
    }

    /// Integer wavevector of a mode index.
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let m = self.modes[idx];
        [m[0] as i64, m[1] as i64, m[2] as i64]
    }

    /// Lattice multi-index of a flat index.
    pub fn point(&self, idx: usize) -> [usize; 3] {
        let n = self.spec.n;
        let mut out = [0usize; 3];
        let mut rem = idx;
        for a in (0..self.spec.dim).rev() {
            out[a] = rem % n;
            rem /= n;
        }
        out
    }

    /// Flat index of a lattice multi-index, wrapping periodically.
    pub fn index_of(&self, point: &[i64]) -> usize {
        let n = self.spec.n as i64;
        point
            .iter()
            .take(self.spec.dim)
            .fold(0usize, |acc, &p| acc * n as usize + p.rem_euclid(n) as usize)
    }

    /// Physical coordinates of a lattice point.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let p = self.point(idx);
        [p[0] as f64 * h, p[1] as f64 * h, p[2] as f64 * h]
    }

    /// Physical frequency `ξ = k / Λ` of a mode.
    pub fn frequency(&self, idx: usize) -> [f64; 3] {
        let k = self.mode(idx);
        let s = 1.0 / self.spec.box_scale;
        [k[0] as f64 * s, k[1] as f64 * s, k[2] as f64 * s]
    }

    /// Integer `|k|^2` of every mode.
    pub fn k2(&self) -> &[u32] {
        &self.k2
    }

    /// `|ξ|^2` of a mode.
    pub fn xi2(&self, idx: usize) -> f64 {
        self.k2[idx] as f64 / (self.spec.box_scale * self.spec.box_scale)
    }

    /// Whether a mode survives the dealiasing mask.
    pub fn in_band(&self, idx: usize) -> bool {
        self.band[idx]
    }

    pub fn band_mask(&self) -> &[bool] {
        &self.band
    }

    /// Distinct values of `|k|^2` inside the dealiasing band, ascending.
    pub fn band_levels(&self) -> &[u32] {
        &self.band_levels
    }

    /// Position of `k2` in [`Grid::band_levels`].
    pub fn level_index(&self, k2: u32) -> Option<usize> {
        match self.level_of.get(k2 as usize) {
            Some(&l) if l != NO_LEVEL => Some(l as usize),
            _ => None,
        }
    }

    /// Index of the mode `-k`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        self.conj[idx] as usize
    }

    pub fn fft(&self) -> &CubeFft {
        &self.fft
    }

    pub(crate) fn fine_fft(&self) -> &CubeFft {
        &self.fine_fft
    }

    /// Minimum-image displacement `x - y` in the periodic box.
    pub fn displacement(&self, x: &[f64], y: &[f64]) -> [f64; 3] {
        let l = self.box_length();
        let mut out = [0.0; 3];
        for a in 0..self.spec.dim {
            let mut d = (x[a] - y[a]) % l;
            if d >= 0.5 * l {
                d -= l;
            } else if d < -0.5 * l {
                d += l;
            }
            out[a] = d;
        }
        out
    }

    /// The same lattice with a different box scale.
    pub fn with_box_scale(&self, box_scale: f64) -> Result<Arc<Grid>> {
        Grid::new(&self.spec.clone().box_scale(box_scale))
    }

    /// The same box with a different number of points per axis.
    pub fn with_points(&self, n: usize) -> Result<Arc<Grid>> {
        let mut spec = self.spec.clone();
        spec.n = n;
        Grid::new(&spec)
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.spec, other.spec)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridSpec::new(2, 12).build().is_err());
        assert!(GridSpec::new(2, 4).build().is_err());
        assert!(GridSpec::new(4, 8).build().is_err());
        assert!(GridSpec::new(2, 16).box_scale(-1.0).build().is_err());
    }

    #[test]
    fn dealias_band_follows_two_thirds_rule() {
        let g = GridSpec::new(2, 64).build().unwrap();
        assert_eq!(g.dealias_cut(), 21);
        let idx = g.index_of(&[21, -21]);
        assert!(g.in_band(idx));
        assert!(!g.in_band(g.index_of(&[22, 0])));
        assert_eq!(g.k2()[idx], 882);
    }

    #[test]
    fn conjugate_index_negates_the_mode() {
        let g = GridSpec::new(3, 8).build().unwrap();
        for idx in 0..g.len() {
            let k = g.mode(idx);
            let c = g.mode(g.conjugate_index(idx));
            for a in 0..3 {
                let n = 8;
                assert_eq!((k[a] + c[a]).rem_euclid(n), 0);
            }
        }
    }

    #[test]
    fn band_levels_index_round_trip() {
        let g = GridSpec::new(2, 32).build().unwrap();
        for (i, &s) in g.band_levels().iter().enumerate() {
            assert_eq!(g.level_index(s), Some(i));
        }
        assert_eq!(g.level_index(3), None);
    }

    #[test]
    fn displacement_uses_minimum_image() {
        let g = GridSpec::new(2, 16).build().unwrap();
        let l = g.box_length();
        let d = g.displacement(&[0.1, l - 0.1], &[l - 0.1, 0.1]);
        assert!((d[0] - 0.2).abs() < 1e-12 && (d[1] + 0.2).abs() < 1e-12);
    }
}
