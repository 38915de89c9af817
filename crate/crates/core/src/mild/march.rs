use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::spectral::{leray_in_place, nonlinear_pair, nonlinear_self, project_band, DIVERGENCE_TOL};
use crate::trajectory::{StepRecord, TensorTrajectory, Trajectory};

use super::collocation::{propagate, ExpTable, IntervalRule};
use super::{spectral_radius, BlowupCause, LocalSolution, Outcome, SolverConfig};

/// The background terms of the perturbed equation; both absent for plain NS.
struct Drift<'a> {
    w: Option<&'a Trajectory>,
    f: Option<&'a TensorTrajectory>,
}

impl Drift<'_> {
    fn source(&self, t: f64, v: &SpectralField) -> Result<SpectralField> {
        let mut s = nonlinear_self(v);
        if let Some(w) = self.w {
            let wt = w.at(t)?;
            s.axpy(1.0, &nonlinear_pair(v, &wt))?;
            s.axpy(1.0, &nonlinear_pair(&wt, v))?;
        }
        if let Some(f) = self.f {
            s.axpy(1.0, &project_band(f.at(t)?.divergence()))?;
        }
        Ok(s)
    }

    fn background(&self, t: f64) -> Result<f64> {
        match self.w {
            Some(w) => Ok(w.at(t)?.sup_norm()),
            None => Ok(0.0),
        }
    }
}

struct Attempt {
    nodes: Vec<SpectralField>,
    endpoint: SpectralField,
    sweeps: usize,
    converged: bool,
}

fn interval(
    rule: &IntervalRule,
    u: &SpectralField,
    t: f64,
    h: f64,
    omega: f64,
    drift: &Drift,
    config: &SolverConfig,
) -> Result<Attempt> {
    let m = rule.len();
    let table = ExpTable::new(rule, u.grid(), h);
    let mut states = propagate(&table, u, &[], 0.0);
    let tol = config.picard_tol * omega.max(1.0);
    let mut prev = f64::INFINITY;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < config.max_sweeps {
        sweeps += 1;
        let sources = (0..m)
            .map(|l| drift.source(t + rule.nodes()[l] * h, &states[l]))
            .collect::<Result<Vec<_>>>()?;
        let next = propagate(&table, u, &sources, -1.0);
        let mut diff = 0.0f64;
        for (a, b) in next.iter().zip(&states) {
            diff = diff.max(a.sub(b)?.coefficient_l1());
        }
        states = next;
        if !diff.is_finite() {
            break;
        }
        if diff <= tol {
            converged = true;
            break;
        }
        if sweeps >= 3 && diff > prev {
            break;
        }
        prev = diff;
    }
    let endpoint = states.pop().expect("interval end target");
    Ok(Attempt {
        nodes: states,
        endpoint,
        sweeps,
        converged,
    })
}

fn check_input(u0: &SpectralField) -> Result<()> {
    if u0.components().iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite("initial data".into()));
    }
    u0.ensure_divergence_free(DIVERGENCE_TOL)
}

fn march(u0: &SpectralField, config: &SolverConfig, drift: &Drift) -> Result<LocalSolution> {
    config.validate()?;
    check_input(u0)?;
    let horizon = config.t_horizon;
    let rule = IntervalRule::new(config.nodes);
    let mut traj = Trajectory::new(0.0, u0.clone());
    let mut u = u0.clone();
    let mut t = 0.0;
    let mut omega_u = u.sup_norm();
    let omega0 = omega_u + drift.background(0.0)?;
    let mut dissipated = 0.0;
    let mut shrink = 0i32;
    let mut steps = 0usize;
    let mut outcome = Outcome::ReachedHorizon;
    let mut saved_last = true;
    while horizon - t > 1e-14 * horizon {
        let omega = omega_u + drift.background(t)?;
        if !omega.is_finite() {
            return Err(Error::Divergence(format!("sup norm became {omega} at t = {t}")));
        }
        if omega0 > 0.0 && omega > config.omega_cap * omega0 {
            outcome = Outcome::DeclaredBlowup {
                cause: BlowupCause::OmegaCap,
                t,
            };
            break;
        }
        if steps >= config.max_steps {
            outcome = Outcome::StepLimit { t };
            break;
        }
        let law = if omega > 0.0 {
            (8.0 * config.c_solve * config.c_solve * omega).powi(-2)
        } else {
            f64::INFINITY
        };
        let mut h = (law * 0.5f64.powi(shrink)).min(horizon - t);
        let mut halvings = 0;
        let mut floor_hit = h < config.dt_floor;
        let mut attempt = None;
        while !floor_hit {
            let a = interval(&rule, &u, t, h, omega, drift, config)?;
            if a.converged || halvings == config.max_halvings {
                attempt = Some(a);
                break;
            }
            halvings += 1;
            shrink += 1;
            h *= 0.5;
            floor_hit = h < config.dt_floor;
        }
        let Some(attempt) = attempt else {
            outcome = Outcome::DeclaredBlowup {
                cause: BlowupCause::StepFloor,
                t,
            };
            break;
        };
        let mut next = attempt.endpoint;
        leray_in_place(&mut next);
        dissipated += h * attempt
            .nodes
            .iter()
            .zip(rule.weights())
            .map(|(f, b)| b * f.gradient_l2_sq())
            .sum::<f64>();
        t = if horizon - (t + h) <= 1e-14 * horizon { horizon } else { t + h };
        steps += 1;
        omega_u = next.sup_norm();
        if !omega_u.is_finite() {
            return Err(Error::Divergence(format!("non-finite field after the step ending at t = {t}")));
        }
        traj.record(StepRecord {
            t,
            dt: h,
            omega: omega_u,
            lp_norm: config.norm_p.map(|p| next.lp_norm(p)).transpose()?,
            energy: next.energy(),
            dissipation: dissipated,
            divergence: next.divergence_defect(),
            spectral_radius: spectral_radius(&next),
            sweeps: attempt.sweeps,
            halvings,
            converged: attempt.converged,
        });
        saved_last = steps % config.save_stride == 0;
        if saved_last {
            traj.push(t, next.clone())?;
        }
        u = next;
    }
    if !saved_last {
        traj.push(t, u)?;
    }
    let t_est = match outcome {
        Outcome::DeclaredBlowup { t, .. } => Some(t),
        _ => None,
    };
    Ok(LocalSolution {
        trajectory: traj,
        outcome,
        t_est,
    })
}

/// Marches the mild formulation from `u0` up to `config.t_horizon`.
///
/// Each interval has length `h = (8 C² ω)^{-2}` with `ω` the sup norm at its
/// start, halved (persistently) whenever the fixed-point sweeps inside the
/// interval fail to contract. The march stops early with a declared blowup
/// when `ω` exceeds `omega_cap · ω(0)` or `h` drops below `dt_floor`.
pub fn solve_local(u0: &SpectralField, config: &SolverConfig) -> Result<LocalSolution> {
    march(u0, config, &Drift { w: None, f: None })
}

/// Marches `v` in `v_t - Δv + ℙ∇·(v⊗v + v⊗w + w⊗v + f) = 0`, with `w` and `f`
/// interpolated linearly in time from their samples.
pub fn solve_perturbed(
    v0: &SpectralField,
    w: Option<&Trajectory>,
    f: Option<&TensorTrajectory>,
    config: &SolverConfig,
) -> Result<LocalSolution> {
    let covers = |start: f64, end: f64| start <= 0.0 && end >= config.t_horizon;
    if let Some(w) = w {
        v0.grid().same_as(w.grid())?;
        if !covers(w.start(), w.end()) {
            return Err(Error::InvalidTime(format!(
                "background covers [{}, {}], horizon is {}",
                w.start(),
                w.end(),
                config.t_horizon
            )));
        }
    }
    if let Some(f) = f {
        let times = f.times();
        if !covers(times[0], times[times.len() - 1]) {
            return Err(Error::InvalidTime(format!(
                "forcing covers [{}, {}], horizon is {}",
                times[0],
                times[times.len() - 1],
                config.t_horizon
            )));
        }
        v0.grid().same_as(f.fields()[0].grid())?;
    }
    march(v0, config, &Drift { w, f })
}

/// `max(sup_t ‖v‖_p, (∫ ‖v‖_r^r dt)^{1/r})` with `r = 5p/3`, on the stored samples.
pub fn xspace_norm(traj: &Trajectory, p: f64) -> Result<f64> {
    let r = 5.0 * p / 3.0;
    let mut sup = 0.0f64;
    let mut vals = Vec::with_capacity(traj.len());
    for f in traj.fields() {
        sup = sup.max(f.lp_norm(p)?);
        vals.push(f.lp_norm(r)?.powf(r));
    }
    let integral: f64 = traj
        .times()
        .windows(2)
        .zip(vals.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum();
    Ok(sup.max(integral.powf(1.0 / r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::initial::{random_divfree, taylor_green};
    use crate::FieldKind;

    #[test]
    fn taylor_green_decays_exactly() {
        let g = GridSpec::new(2, 16).build().unwrap();
        let u0 = taylor_green(&g, 1.0).unwrap();
        let sol = solve_local(&u0, &SolverConfig::default().with_horizon(0.5)).unwrap();
        assert_eq!(sol.outcome, Outcome::ReachedHorizon);
        assert_eq!(sol.t_est, None);
        let want = u0.scaled((-1.0f64).exp());
        let err = sol.trajectory.last().sub(&want).unwrap().l2_norm() / want.l2_norm();
        assert!(err < 1e-12, "{err}");
        assert!((sol.trajectory.end() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_data_takes_one_step() {
        let g = GridSpec::new(3, 8).build().unwrap();
        let sol = solve_local(&SpectralField::zeros(&g, FieldKind::Real), &SolverConfig::default()).unwrap();
        assert_eq!(sol.trajectory.steps().len(), 1);
        assert_eq!(sol.trajectory.last().coefficient_l1(), 0.0);
        assert_eq!(sol.t_est, None);
    }

    #[test]
    fn energy_identity_on_random_data() {
        let g = GridSpec::new(2, 32).build().unwrap();
        let u0 = random_divfree(&g, 3, 1.0, -1.0, 1.0, 6.0).unwrap();
        let sol = solve_local(&u0, &SolverConfig::default().with_horizon(0.2)).unwrap();
        let last = sol.trajectory.steps().last().unwrap();
        let defect = (last.energy + last.dissipation - u0.energy()).abs() / u0.energy();
        assert!(defect < 1e-9, "{defect}");
        assert!(sol.trajectory.steps().iter().all(|s| s.converged && s.divergence < 1e-13));
    }

    #[test]
    fn rejects_compressible_data() {
        let g = GridSpec::new(2, 16).build().unwrap();
        let u0 = SpectralField::from_fn(&g, |x| [x[0].sin(), 0.0, 0.0]).unwrap();
        assert!(matches!(
            solve_local(&u0, &SolverConfig::default()),
            Err(Error::NotDivergenceFree { .. })
        ));
    }

    #[test]
    fn large_data_declares_blowup_by_step_floor() {
        let g = GridSpec::new(2, 16).build().unwrap();
        let u0 = taylor_green(&g, 1.0e6).unwrap();
        let sol = solve_local(&u0, &SolverConfig::default()).unwrap();
        assert!(matches!(
            sol.outcome,
            Outcome::DeclaredBlowup {
                cause: BlowupCause::StepFloor,
                ..
            }
        ));
        assert_eq!(sol.t_est, Some(0.0));
    }

    #[test]
    fn stride_keeps_the_final_state() {
        let g = GridSpec::new(2, 16).build().unwrap();
        let u0 = taylor_green(&g, 1.0).unwrap();
        let cfg = SolverConfig {
            save_stride: 7,
            ..SolverConfig::default().with_horizon(0.3)
        };
        let sol = solve_local(&u0, &cfg).unwrap();
        let steps = sol.trajectory.steps().len();
        assert_eq!(sol.trajectory.len(), 1 + steps / 7 + usize::from(steps % 7 != 0));
        assert_eq!(sol.trajectory.end(), 0.3);
    }

    #[test]
    fn perturbed_with_zero_background_matches_plain_solve() {
        let g = GridSpec::new(2, 16).build().unwrap();
        let v0 = random_divfree(&g, 11, 1.0, 0.0, 1.0, 4.0).unwrap();
        let cfg = SolverConfig::default().with_horizon(0.1);
        let zero = SpectralField::zeros(&g, FieldKind::Real);
        let w = Trajectory::from_samples(vec![0.0, 1.0], vec![zero.clone(), zero]).unwrap();
        let a = solve_local(&v0, &cfg).unwrap();
        let b = solve_perturbed(&v0, Some(&w), None, &cfg).unwrap();
        let gap = a.trajectory.last().sub(b.trajectory.last()).unwrap().l2_norm();
        assert!(gap <= 1e-10 * v0.l2_norm());
        let short = Trajectory::from_samples(vec![0.0, 0.05], vec![v0.clone(), v0.clone()]).unwrap();
        assert!(matches!(solve_perturbed(&v0, Some(&short), None, &cfg), Err(Error::InvalidTime(_))));
    }
}
