use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::spectral::nonlinear_pair;
use crate::trajectory::Trajectory;

use super::collocation::{propagate, ExpTable, IntervalRule};

/// The Duhamel bilinear form `∫₀ᵗ e^{(t-s)Δ} ℙ ∇·(u ⊗ v)(s) ds`.
///
/// Both trajectories are read as piecewise linear in time between their
/// samples, so on every segment between consecutive sample times of either
/// one the integrand is quadratic in `s` and three collocation nodes with
/// exact exponential weights integrate it without time discretization error.
/// The lower limit is the common start time of the trajectories.
pub fn bilinear_b(u: &Trajectory, v: &Trajectory, t: f64) -> Result<SpectralField> {
    u.grid().same_as(v.grid())?;
    let start = u.start();
    if v.start() != start {
        return Err(Error::InvalidTime(format!(
            "trajectories start at {} and {}",
            u.start(),
            v.start()
        )));
    }
    if !(t >= start && t <= u.end().min(v.end())) {
        return Err(Error::InvalidTime(format!(
            "t = {t} outside the common range [{start}, {}]",
            u.end().min(v.end())
        )));
    }
    let mut breaks: Vec<f64> = u
        .times()
        .iter()
        .chain(v.times())
        .copied()
        .filter(|&s| s > start && s < t)
        .collect();
    breaks.push(start);
    breaks.push(t);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let rule = IntervalRule::new(3);
    let kind = u.last().kind().join(v.last().kind());
    let mut acc = SpectralField::zeros(u.grid(), kind);
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let h = b - a;
        let sources = rule
            .nodes()
            .iter()
            .map(|&c| {
                let s = a + c * h;
                Ok(nonlinear_pair(&u.at(s)?, &v.at(s)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let table = ExpTable::new(&rule, u.grid(), h);
        acc = propagate(&table, &acc, &sources, 1.0).pop().expect("interval end target");
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::spectral::nonlinear_div;
    use std::sync::Arc;

    fn pair(g: &Arc<crate::Grid>) -> (SpectralField, SpectralField) {
        let a = SpectralField::from_fn(g, |x| [(2.0 * x[1]).sin(), x[0].cos(), 0.0]).unwrap();
        let b = SpectralField::from_fn(g, |x| [(x[1] + 3.0).cos(), (3.0 * x[0]).sin(), 0.0]).unwrap();
        (a, b)
    }

    #[test]
    fn constant_in_time_matches_closed_form() {
        let g = GridSpec::new(2, 32).build().unwrap();
        let (a, b) = pair(&g);
        let u = Trajectory::from_samples(vec![0.0, 0.4, 1.0], vec![a.clone(), a.clone(), a.clone()]).unwrap();
        let v = Trajectory::from_samples(vec![0.0, 1.0], vec![b.clone(), b.clone()]).unwrap();
        let t = 0.7;
        let got = bilinear_b(&u, &v, t).unwrap();
        let n = nonlinear_div(&a, &b).unwrap();
        let gg = g.clone();
        let want = n.with_multiplier(|idx| {
            let q = gg.xi2(idx);
            if q == 0.0 {
                t
            } else {
                (1.0 - (-q * t).exp()) / q
            }
        });
        assert!(got.sub(&want).unwrap().coefficient_l1() < 1e-14 * want.coefficient_l1());
    }

    #[test]
    fn linear_growth_matches_closed_form() {
        let g = GridSpec::new(2, 32).build().unwrap();
        let (a, b) = pair(&g);
        let zero = SpectralField::zeros(&g, crate::FieldKind::Real);
        let u = Trajectory::from_samples(vec![0.0, 1.0], vec![zero.clone(), a.clone()]).unwrap();
        let v = Trajectory::from_samples(vec![0.0, 1.0], vec![zero, b.clone()]).unwrap();
        let t = 1.0;
        let got = bilinear_b(&u, &v, t).unwrap();
        let n = nonlinear_div(&a, &b).unwrap();
        let gg = g.clone();
        let want = n.with_multiplier(|idx| {
            let q = gg.xi2(idx);
            if q == 0.0 {
                return t.powi(3) / 3.0;
            }
            let e = (-q * t).exp();
            t * t / q - 2.0 * t / (q * q) + 2.0 * (1.0 - e) / (q * q * q)
        });
        assert!(got.sub(&want).unwrap().coefficient_l1() < 1e-13 * want.coefficient_l1());
    }

    #[test]
    fn taylor_green_self_interaction_vanishes() {
        let g = GridSpec::new(2, 16).build().unwrap();
        let tg = crate::initial::taylor_green(&g, 1.0).unwrap();
        let u = Trajectory::from_samples(vec![0.0, 1.0], vec![tg.clone(), tg.scaled(0.5)]).unwrap();
        assert!(bilinear_b(&u, &u, 1.0).unwrap().coefficient_l1() < 1e-14);
        assert!(bilinear_b(&u, &u, 2.0).is_err());
    }
}
