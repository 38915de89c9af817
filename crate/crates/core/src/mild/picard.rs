use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::spectral::{heat_propagate, nonlinear_pair, DIVERGENCE_TOL};
use crate::trajectory::Trajectory;

use super::collocation::{propagate, ExpTable, IntervalRule};
use super::{SolverConfig, SUPPORT_MASS_TOL};

/// Extra Picard iterates computed beyond `n0_max` for the Cauchy check.
const CAUCHY_TAIL: usize = 4;

/// Statistics of the iterate `u^{(n)}` and of the next difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    /// `‖u^{(n)}‖_{L^∞}` over space and the time lattice.
    pub sup_norm: f64,
    /// `d_n = ‖u^{(n+1)} - u^{(n)}‖_{L^∞}` over space and the time lattice.
    pub difference: f64,
    /// Largest `ρ_n` with all but a `1e-8` mass fraction of the difference
    /// in `{ξ₁ >= ρ_n}`; infinite when the difference vanishes.
    pub support_threshold: f64,
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub records: Vec<IterationRecord>,
    /// `u^{(n_max + 1)}` on the time lattice.
    pub final_iterate: Trajectory,
}

struct Lattice {
    rule: IntervalRule,
    table: ExpTable,
    intervals: usize,
    times: Vec<f64>,
}

impl Lattice {
    fn new(config: &SolverConfig, horizon: f64, grid: &crate::Grid) -> Lattice {
        let rule = IntervalRule::new(config.nodes);
        let k = config.picard_intervals;
        let h = horizon / k as f64;
        let table = ExpTable::new(&rule, grid, h);
        let mut times = vec![0.0];
        for i in 0..k {
            let t0 = i as f64 * h;
            times.extend(rule.targets().iter().map(|&c| if c == 1.0 { (i + 1) as f64 * h } else { t0 + c * h }));
        }
        *times.last_mut().expect("nonempty lattice") = horizon;
        Lattice {
            rule,
            table,
            intervals: k,
            times,
        }
    }

    fn index(&self, interval: usize, target: usize) -> usize {
        1 + interval * (self.rule.len() + 1) + target
    }
}

fn x1_histogram(fields: &[SpectralField]) -> Vec<f64> {
    let g = fields[0].grid();
    let n = g.n() as i64;
    let mut hist = vec![0.0; g.n()];
    for f in fields {
        for idx in 0..g.len() {
            let k1 = g.mode(idx)[0];
            hist[(k1 + n / 2) as usize] += f.components().iter().map(|c| c[idx].norm_sqr()).sum::<f64>();
        }
    }
    hist
}

/// Largest lattice `ξ₁` threshold keeping all but the tolerated mass above it.
fn support_threshold(fields: &[SpectralField]) -> f64 {
    let g = fields[0].grid();
    let hist = x1_histogram(fields);
    let total: f64 = hist.iter().sum();
    if total == 0.0 {
        return f64::INFINITY;
    }
    let mut below = 0.0;
    for (i, m) in hist.iter().enumerate() {
        below += m;
        if below > SUPPORT_MASS_TOL * total {
            return (i as i64 - g.n() as i64 / 2) as f64 / g.box_scale();
        }
    }
    f64::INFINITY
}

/// Mass fraction of the fields in `{ξ₁ < threshold}`.
fn mass_below(fields: &[SpectralField], threshold: f64) -> f64 {
    let g = fields[0].grid();
    let hist = x1_histogram(fields);
    let total: f64 = hist.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let below: f64 = hist
        .iter()
        .enumerate()
        .filter(|(i, _)| ((*i as i64 - g.n() as i64 / 2) as f64 / g.box_scale()) < threshold * (1.0 - 1e-12))
        .map(|(_, m)| m)
        .sum();
    below / total
}

/// The projected product `ℙ∇·(a ⊗ b)` with every coefficient below the
/// round-off bound of the transform-based product set to zero, so that exact
/// frequency supports are not smeared by floating point noise.
fn floored_pair(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let g = a.grid().clone();
    let mut out = nonlinear_pair(a, b);
    let top = g.band_levels().last().copied().unwrap_or(0) as f64;
    let xi_max = top.sqrt() / g.box_scale();
    let floor = 8.0 * f64::EPSILON * (g.len() as f64).log2() * a.dealiased().coefficient_l1() * b.dealiased().coefficient_l1() * xi_max;
    for c in out.components_mut() {
        for z in c.iter_mut() {
            if z.norm() <= floor {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
    out
}

fn lattice_sup(fields: &[SpectralField]) -> f64 {
    fields.iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
}

struct Iterates {
    records: Vec<IterationRecord>,
    differences: Vec<Vec<SpectralField>>,
    last: Vec<SpectralField>,
    times: Vec<f64>,
}

fn iterate(
    u0: &SpectralField,
    n_max: usize,
    horizon: f64,
    config: &SolverConfig,
    keep_differences: bool,
) -> Result<Iterates> {
    config.validate()?;
    if n_max == 0 {
        return Err(Error::Domain("at least one Picard iterate is required".into()));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidTime(format!("Picard horizon must be positive, got {horizon}")));
    }
    u0.ensure_divergence_free(DIVERGENCE_TOL)?;
    let grid = u0.grid().clone();
    let lat = Lattice::new(config, horizon, &grid);
    let m = lat.rule.len();
    let zero = SpectralField::zeros(&grid, u0.kind());
    let mut prev: Vec<SpectralField> = vec![zero.clone(); lat.times.len()];
    let mut cur = lat
        .times
        .iter()
        .map(|&t| heat_propagate(u0, t))
        .collect::<Result<Vec<_>>>()?;
    let mut delta = cur.clone();
    let mut records = Vec::with_capacity(n_max);
    let mut differences = Vec::new();
    for n in 1..=n_max {
        let mut next_delta = Vec::with_capacity(cur.len());
        next_delta.push(zero.clone());
        let mut b = zero.clone();
        for i in 0..lat.intervals {
            let sources: Vec<SpectralField> = (0..m)
                .map(|l| {
                    let k = lat.index(i, l);
                    let mut s = floored_pair(&delta[k], &cur[k]);
                    if n > 1 {
                        s.axpy(1.0, &floored_pair(&prev[k], &delta[k]))?;
                    }
                    Ok(s)
                })
                .collect::<Result<Vec<_>>>()?;
            let outs = propagate(&lat.table, &b, &sources, -1.0);
            next_delta.extend(outs.iter().cloned());
            b = outs.into_iter().last().expect("interval end target");
        }
        let difference = lattice_sup(&next_delta);
        if !difference.is_finite() {
            return Err(Error::Divergence(format!("Picard difference {n} is {difference}")));
        }
        records.push(IterationRecord {
            n,
            sup_norm: lattice_sup(&cur),
            difference,
            support_threshold: support_threshold(&next_delta),
        });
        let next = cur
            .iter()
            .zip(&next_delta)
            .map(|(a, d)| a.add(d))
            .collect::<Result<Vec<_>>>()?;
        if keep_differences {
            differences.push(next_delta.clone());
        }
        prev = std::mem::replace(&mut cur, next);
        delta = next_delta;
    }
    Ok(Iterates {
        records,
        differences,
        last: cur,
        times: lat.times,
    })
}

/// Picard iterates `u^{(1)} = e^{tΔ}u₀`, `u^{(n+1)} = e^{tΔ}u₀ - B(u^{(n)}, u^{(n)})`
/// on a lattice of `config.picard_intervals` collocation intervals of
/// `[0, t_horizon]`, recording `n = 1..=n_max`.
pub fn picard_iterate(u0: &SpectralField, n_max: usize, t_horizon: f64, config: &SolverConfig) -> Result<PicardOutcome> {
    let it = iterate(u0, n_max, t_horizon, config, false)?;
    Ok(PicardOutcome {
        records: it.records,
        final_iterate: Trajectory::from_samples(it.times, it.last)?,
    })
}

/// Measured and predicted frequency thresholds of one Picard difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportRecord {
    pub n: usize,
    /// Measured `ρ_n` of `u^{(n+1)} - u^{(n)}`.
    pub measured: f64,
    /// The predicted threshold `(n + 1) ρ`.
    pub predicted: f64,
    /// Mass fraction of the difference in `{ξ₁ < (n + 1) ρ}`.
    pub outside_fraction: f64,
}

fn check_half_space(u0: &SpectralField, rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Domain(format!("support threshold must be positive, got {rho}")));
    }
    let outside = mass_below(std::slice::from_ref(u0), rho);
    if outside > 1e-12 {
        return Err(Error::Support(format!(
            "a fraction {outside:e} of the data lies in {{ξ₁ < {rho}}}"
        )));
    }
    Ok(())
}

/// Tracks the frequency support of successive Picard differences for data
/// supported in `{ξ₁ >= ρ}`.
pub fn frequency_support_tracker(
    u0: &SpectralField,
    rho: f64,
    n_max: usize,
    t_horizon: f64,
    config: &SolverConfig,
) -> Result<Vec<SupportRecord>> {
    check_half_space(u0, rho)?;
    let it = iterate(u0, n_max, t_horizon, config, true)?;
    Ok(it
        .records
        .iter()
        .zip(&it.differences)
        .map(|(r, diff)| {
            let predicted = (r.n + 1) as f64 * rho;
            SupportRecord {
                n: r.n,
                measured: r.support_threshold,
                predicted,
                outside_fraction: mass_below(diff, predicted),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionEntry {
    pub n0: usize,
    /// `‖u^{(n0)}‖ + ‖u^{(n0+1)}‖` with `u^{(0)} = 0`.
    pub m: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyCheck {
    pub m0: f64,
    /// `d_ℓ` for `ℓ = n0, n0 + 1, ...`.
    pub differences: Vec<f64>,
    /// `M₀ / 2^{ℓ - n0}` for the same `ℓ`.
    pub bounds: Vec<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalCriterionReport {
    pub satisfied: bool,
    /// First `n0` meeting the criterion, or the one closest to it.
    pub best_n0: usize,
    pub margin: f64,
    pub rho: f64,
    pub c_glob: f64,
    pub t_probe: f64,
    pub entries: Vec<CriterionEntry>,
    /// `d_ℓ = ‖u^{(ℓ+1)} - u^{(ℓ)}‖` for `ℓ = 0, 1, ...`.
    pub differences: Vec<f64>,
    pub cauchy: Option<CauchyCheck>,
}

/// Evaluates `4 C (‖u^{(n0)}‖ + ‖u^{(n0+1)}‖) <= (n0 + 1) ρ` for
/// `n0 = 0..=n0_max`, with sup norms over space and `[0, t_probe]`.
///
/// When some `n0` qualifies, the successive differences are also checked
/// against the geometric bound `M₀ / 2^{ℓ - n0}`.
pub fn check_global_criterion(
    u0: &SpectralField,
    rho: f64,
    n0_max: usize,
    c_glob: f64,
    t_probe: f64,
    config: &SolverConfig,
) -> Result<GlobalCriterionReport> {
    check_half_space(u0, rho)?;
    if !(c_glob > 0.0) {
        return Err(Error::Domain(format!("C_glob must be positive, got {c_glob}")));
    }
    let n_max = n0_max + CAUCHY_TAIL;
    let it = iterate(u0, n_max, t_probe, config, false)?;
    let mut sups = vec![0.0];
    sups.extend(it.records.iter().map(|r| r.sup_norm));
    let mut differences = vec![sups[1]];
    differences.extend(it.records.iter().map(|r| r.difference));
    let entries: Vec<CriterionEntry> = (0..=n0_max)
        .map(|n0| {
            let m = sups[n0] + sups[n0 + 1];
            let lhs = 4.0 * c_glob * m;
            let rhs = (n0 + 1) as f64 * rho;
            CriterionEntry {
                n0,
                m,
                lhs,
                rhs,
                margin: rhs - lhs,
            }
        })
        .collect();
    let first = entries.iter().find(|e| e.margin >= 0.0);
    let best = first.unwrap_or_else(|| {
        entries
            .iter()
            .max_by(|a, b| a.margin.total_cmp(&b.margin))
            .expect("at least one entry")
    });
    let cauchy = first.map(|e| {
        let ds: Vec<f64> = differences[e.n0..].to_vec();
        let bounds: Vec<f64> = (0..ds.len()).map(|k| e.m * 0.5f64.powi(k as i32)).collect();
        let holds = ds.iter().zip(&bounds).all(|(d, b)| *d <= b * (1.0 + 1e-12));
        CauchyCheck {
            m0: e.m,
            differences: ds,
            bounds,
            holds,
        }
    });
    Ok(GlobalCriterionReport {
        satisfied: first.is_some(),
        best_n0: best.n0,
        margin: best.margin,
        rho,
        c_glob,
        t_probe,
        entries,
        differences,
        cauchy,
    })
}
