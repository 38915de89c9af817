//! Gauss-Legendre rules and Lagrange interpolation on their nodes.

use std::f64::consts::PI;

/// A quadrature rule on the unit interval `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// The `m`-point Gauss-Legendre rule mapped to `[0, 1]`, nodes ascending.
    pub fn gauss_legendre(m: usize) -> Rule {
        assert!(m >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = 0.5 * (1.0 - x);
            nodes[m - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[m - 1 - i] = 0.5 * w;
        }
        Rule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&c, &w)| w * f(a + h * c))
            .sum::<f64>()
            * h
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Barycentric Lagrange interpolation through a fixed node set.
#[derive(Debug, Clone)]
pub struct Lagrange {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl Lagrange {
    pub fn new(nodes: &[f64]) -> Lagrange {
        let bary = nodes
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                let prod: f64 = nodes
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &xj)| xi - xj)
                    .product();
                1.0 / prod
            })
            .collect();
        Lagrange {
            nodes: nodes.to_vec(),
            bary,
        }
    }

    /// Values of every basis polynomial at `x`.
    pub fn basis(&self, x: f64) -> Vec<f64> {
        if let Some(i) = self.nodes.iter().position(|&n| n == x) {
            let mut out = vec![0.0; self.nodes.len()];
            out[i] = 1.0;
            return out;
        }
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.bary)
            .map(|(&n, &b)| b / (x - n))
            .collect();
        let denom: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / denom).collect()
    }
}

/// Composite Gauss-Legendre points on `[0, len]` with panels graded
/// geometrically toward zero.
pub fn graded_points(len: f64, panels: usize, rule: &Rule) -> (Vec<f64>, Vec<f64>) {
    let mut edges = Vec::with_capacity(panels + 1);
    edges.push(0.0);
    for p in (0..panels).rev() {
        edges.push(len * 0.5f64.powi(p as i32));
    }
    let mut pts = Vec::with_capacity(panels * rule.len());
    let mut wts = Vec::with_capacity(panels * rule.len());
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (&c, &wt) in rule.nodes.iter().zip(&rule.weights) {
            pts.push(a + (b - a) * c);
            wts.push((b - a) * wt);
        }
    }
    (pts, wts)
}
