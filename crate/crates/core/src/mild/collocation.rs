//! Exponential collocation on one time interval.
//!
//! On an interval of length `h` the Duhamel integral is written in the unit
//! variable `c = (t - t_i) / h`. The integrand is replaced by its Lagrange
//! interpolant through `m` Gauss-Legendre nodes, while the heat factor is kept
//! exact, so for a mode with `z = h |ξ|²` the node weights are
//!
//! ```text
//! W_l(z, c) = ∫_0^c e^{-z (c - σ)} ℓ_l(σ) dσ.
//! ```
//!
//! These integrals are evaluated by composite Gauss-Legendre quadrature on
//! panels graded geometrically toward `σ = c`, with the finest panel shorter
//! than `1 / (64 z)`, so that stiff modes are integrated to round-off.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::field::SpectralField;
use crate::grid::Grid;
use crate::quadrature::{Lagrange, Rule};

const PANEL_POINTS: usize = 16;
const MIN_DEPTH: u32 = 6;
const MAX_DEPTH: u32 = 60;

struct TargetQuadrature {
    /// Distances `r = c - σ`, ascending.
    r: Vec<f64>,
    w: Vec<f64>,
    /// Lagrange basis values at `σ`, `m` per point.
    basis: Vec<f64>,
}

/// Nodes, quadrature weights and exponential weight generator for `m` nodes.
pub(crate) struct IntervalRule {
    rule: Rule,
    lagrange: Lagrange,
    panel: Rule,
    targets: Vec<f64>,
    cache: Mutex<HashMap<u32, Arc<Vec<TargetQuadrature>>>>,
}

impl IntervalRule {
    pub fn new(m: usize) -> IntervalRule {
        let rule = Rule::gauss_legendre(m);
        let lagrange = Lagrange::new(&rule.nodes);
        let mut targets = rule.nodes.clone();
        targets.push(1.0);
        IntervalRule {
            rule,
            lagrange,
            panel: Rule::gauss_legendre(PANEL_POINTS),
            targets,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.rule.weights
    }

    /// The nodes followed by the interval end `1`.
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    fn quadrature(&self, depth: u32) -> Arc<Vec<TargetQuadrature>> {
        let mut cache = self.cache.lock().expect("weight cache poisoned");
        cache
            .entry(depth)
            .or_insert_with(|| {
                let m = self.len();
                let quads = self
                    .targets
                    .iter()
                    .map(|&c| {
                        let mut edges = vec![0.0];
                        for p in (0..depth).rev() {
                            edges.push(c * 0.5f64.powi(p as i32));
                        }
                        let mut q = TargetQuadrature {
                            r: Vec::new(),
                            w: Vec::new(),
                            basis: Vec::new(),
                        };
                        for e in edges.windows(2) {
                            let (a, b) = (e[0], e[1]);
                            for (&x, &wt) in self.panel.nodes.iter().zip(&self.panel.weights) {
                                let r = a + (b - a) * x;
                                q.r.push(r);
                                q.w.push((b - a) * wt);
                                q.basis.extend(self.lagrange.basis(c - r));
                            }
                        }
                        debug_assert_eq!(q.basis.len(), q.r.len() * m);
                        q
                    })
                    .collect();
                Arc::new(quads)
            })
            .clone()
    }

    /// Writes `W_l(z, c_t)` into `out[t * m + l]` for every target `t`.
    pub fn exp_weights(&self, z: f64, out: &mut [f64]) {
        let m = self.len();
        let depth = if z <= 1.0 {
            MIN_DEPTH
        } else {
            (z.log2().ceil() as u32 + MIN_DEPTH).min(MAX_DEPTH)
        };
        let quads = self.quadrature(depth);
        for (t, q) in quads.iter().enumerate() {
            let row = &mut out[t * m..(t + 1) * m];
            row.iter_mut().for_each(|x| *x = 0.0);
            for (i, (&r, &w)) in q.r.iter().zip(&q.w).enumerate() {
                let zr = z * r;
                if zr > 745.0 {
                    break;
                }
                let e = w * (-zr).exp();
                for (acc, b) in row.iter_mut().zip(&q.basis[i * m..(i + 1) * m]) {
                    *acc += e * b;
                }
            }
        }
    }
}

/// Weights and decay factors of every band level for one interval length.
pub(crate) struct ExpTable {
    h: f64,
    m: usize,
    targets: Vec<f64>,
    weights: Vec<f64>,
    decay: Vec<f64>,
}

impl ExpTable {
    pub fn new(rule: &IntervalRule, grid: &Grid, h: f64) -> ExpTable {
        let m = rule.len();
        let nt = m + 1;
        let levels = grid.band_levels();
        let inv = 1.0 / (grid.box_scale() * grid.box_scale());
        let mut weights = vec![0.0; levels.len() * nt * m];
        let mut decay = vec![0.0; levels.len() * nt];
        for (l, &k2) in levels.iter().enumerate() {
            let z = k2 as f64 * inv * h;
            rule.exp_weights(z, &mut weights[l * nt * m..(l + 1) * nt * m]);
            for (t, &c) in rule.targets().iter().enumerate() {
                decay[l * nt + t] = (-z * c).exp();
            }
        }
        ExpTable {
            h,
            m,
            targets: rule.targets().to_vec(),
            weights,
            decay,
        }
    }

}

/// Evaluates `e^{c_t h Δ} start + sign · h Σ_l W_l(c_t) sources_l` at every
/// target. Sources are band limited; an empty slice means no sources.
pub(crate) fn propagate(table: &ExpTable, start: &SpectralField, sources: &[SpectralField], sign: f64) -> Vec<SpectralField> {
    let grid = start.grid().clone();
    let m = table.m;
    let nt = m + 1;
    assert!(sources.is_empty() || sources.len() == m, "one source per node");
    let kind = sources.iter().fold(start.kind(), |k, s| k.join(s.kind()));
    let d = grid.dim();
    let mut outs: Vec<Vec<Vec<Complex64>>> = (0..nt).map(|_| vec![vec![Complex64::new(0.0, 0.0); grid.len()]; d]).collect();
    let hs = sign * table.h;
    let mut acc = vec![Complex64::new(0.0, 0.0); d];
    for idx in 0..grid.len() {
        let level = if grid.in_band(idx) {
            grid.level_index(grid.k2()[idx])
        } else {
            None
        };
        match level {
            Some(l) if !sources.is_empty() => {
                for t in 0..nt {
                    let w = &table.weights[(l * nt + t) * m..(l * nt + t + 1) * m];
                    let e = table.decay[l * nt + t];
                    for (a, slot) in acc.iter_mut().enumerate() {
                        let mut s = Complex64::new(0.0, 0.0);
                        for (src, &wl) in sources.iter().zip(w) {
                            s += src.component(a)[idx] * wl;
                        }
                        *slot = start.component(a)[idx] * e + s * hs;
                    }
                    for (a, v) in acc.iter().enumerate() {
                        outs[t][a][idx] = *v;
                    }
                }
            }
            _ => {
                let xi2 = grid.xi2(idx);
                for t in 0..nt {
                    let e = match level {
                        Some(l) => table.decay[l * nt + t],
                        None => (-xi2 * table.h * table.targets[t]).exp(),
                    };
                    for a in 0..d {
                        outs[t][a][idx] = start.component(a)[idx] * e;
                    }
                }
            }
        }
    }
    outs.into_iter()
        .map(|comps| SpectralField::from_coefficients(&grid, kind, comps).expect("shapes match the grid"))
        .collect()
}
