#![allow(dead_code)]

use std::sync::Arc;

use mildns::initial::half_space;
use mildns::lp::besov_norm;
use mildns::spectral::{heat_propagate, nonlinear_div};
use mildns::{Grid, GridSpec, SpectralField};

/// Integrating-factor RK4 for `u_t = Δu - ℙ∇·(u ⊗ u)`, exact on the heat part.
pub fn rk4_integrating_factor(u0: &SpectralField, t_end: f64, dt: f64) -> SpectralField {
    let steps = (t_end / dt).round() as usize;
    let h = t_end / steps as f64;
    let rhs = |u: &SpectralField| nonlinear_div(u, u).unwrap().scaled(-1.0);
    let e = |f: &SpectralField, s: f64| heat_propagate(f, s).unwrap();
    let mut u = u0.clone();
    for _ in 0..steps {
        let k1 = rhs(&u);
        let eu_half = e(&u, 0.5 * h);
        let mut a = u.clone();
        a.axpy(0.5 * h, &k1).unwrap();
        let k2 = rhs(&e(&a, 0.5 * h));
        let mut b = eu_half.clone();
        b.axpy(0.5 * h, &k2).unwrap();
        let k3 = rhs(&b);
        let mut c = e(&u, h);
        c.axpy(h, &e(&k3, 0.5 * h)).unwrap();
        let k4 = rhs(&c);
        let mut next = e(&u, h);
        next.axpy(h / 6.0, &e(&k1, h)).unwrap();
        let mut mid = k2.clone();
        mid.axpy(1.0, &k3).unwrap();
        next.axpy(h / 3.0, &e(&mid, 0.5 * h)).unwrap();
        next.axpy(h / 6.0, &k4).unwrap();
        u = next;
    }
    u
}

pub fn grid(dim: usize, n: usize) -> Arc<Grid> {
    GridSpec::new(dim, n).build().unwrap()
}

pub fn relative_l2(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm()
}

/// Fitted exponent of `L ↦ ‖u₀‖_{Ḃ^{-1+3/6}_{6,2}}` in base 2, with `d = 3`.
/// Each level uses the box scale `2^{2-L}`, which keeps the lattice sampling
/// of the data identical across levels.
pub fn besov_growth_exponent() -> (f64, Vec<f64>) {
    let (d, p) = (3.0, 6.0);
    let levels: Vec<i32> = (2..=5).collect();
    let norms: Vec<f64> = levels
        .iter()
        .map(|&l| {
            let g = GridSpec::new(3, 32).box_scale(2f64.powi(2 - l)).build().unwrap();
            besov_norm(&half_space(&g, l, 0.1).unwrap(), -1.0 + d / p, p, 2.0).unwrap().value
        })
        .collect();
    let xs: Vec<f64> = levels.iter().map(|&l| l as f64).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.log2()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (cov / var, norms)
}
