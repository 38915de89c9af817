use std::sync::Arc;

use approx::assert_relative_eq;
use mildns::initial::random_divfree;
use mildns::io::{load_field, save_field};
use mildns::mild::SolverConfig;
use mildns::profile::{
    classify_scale, elementary_inequality_check, representable_scales, rescaled_profile, Frame, ProfileDecomposition,
    ProfileShape, ProfileSpec, Remainder, ScaleClass, Schedule,
};
use mildns::spectral::leray_project;
use mildns::{Grid, GridSpec, SpectralField};
use proptest::prelude::*;

fn grid2(n: usize) -> Arc<Grid> {
    GridSpec::new(2, n).build().unwrap()
}

/// A smooth field with a nonzero longitudinal part.
fn trig_field(grid: &Arc<Grid>, k: (i32, i32, i32, i32), amp: (f64, f64), phase: f64) -> SpectralField {
    let (k1, k2, k3, k4) = (k.0 as f64, k.1 as f64, k.2 as f64, k.3 as f64);
    SpectralField::from_fn(grid, |x| {
        [
            amp.0 * (k1 * x[0] + k2 * x[1] + phase).sin(),
            amp.1 * (k3 * x[0] + k4 * x[1] - phase).cos() + 0.3 * (k1 * x[1]).cos(),
            0.0,
        ]
    })
    .unwrap()
}

fn schedule() -> impl Strategy<Value = Schedule> {
    prop_oneof![
        (-10.0..10.0f64).prop_map(|value| Schedule::Constant { value }),
        (0.01..10.0f64, 0.1..3.0f64).prop_map(|(value, ratio)| Schedule::Geometric { value, ratio }),
        (0.01..10.0f64, -3.0..3.0f64).prop_map(|(coeff, exponent)| Schedule::Power { coeff, exponent }),
        (-10.0..10.0f64, -2.0..2.0f64).prop_map(|(start, slope)| Schedule::Linear { start, slope }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn leray_projection_is_idempotent_and_solenoidal(
        k in (-6..=6i32, -6..=6i32, -6..=6i32, -6..=6i32),
        amp in (0.1..3.0f64, 0.1..3.0f64),
        phase in 0.0..6.3f64,
    ) {
        let f = trig_field(&grid2(32), k, amp, phase);
        let p = leray_project(&f);
        let pp = leray_project(&p);
        let scale = f.coefficient_l1().max(f64::MIN_POSITIVE);
        prop_assert!(pp.sub(&p).unwrap().coefficient_l1() <= 1e-14 * scale);
        let longitudinal = p.divergence_defect() * p.coefficient_l2_sq().sqrt();
        prop_assert!(longitudinal <= 1e-14 * f.coefficient_l2_sq().sqrt());
        prop_assert!(p.coefficient_l2_sq() <= f.coefficient_l2_sq() * (1.0 + 1e-14));
    }

    #[test]
    fn solver_config_json_round_trip(
        c_solve in 0.01..10.0f64,
        nodes in 2usize..16,
        t_horizon in 1e-3..1e3f64,
        norm_p in proptest::option::of(1.0..20.0f64),
        save_stride in 1usize..100,
        picard_tol in 1e-15..1e-3f64,
    ) {
        let config = SolverConfig {
            c_solve,
            nodes,
            t_horizon,
            norm_p,
            save_stride,
            picard_tol,
            ..SolverConfig::default()
        };
        let json = serde_json::to_string(&config).unwrap();
        let back: SolverConfig = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, config);
    }

    #[test]
    fn schedule_json_round_trip(s in schedule(), n in 0u32..50) {
        let back: Schedule = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        prop_assert_eq!(back.eval(n), s.eval(n));
        prop_assert_eq!(back, s);
    }

    #[test]
    fn lp_frame_rescaling_preserves_the_lp_norm(t in 0.0..1.0f64, p in 1.5..6.0f64, cx in 0.0..6.2f64, cy in 0.0..6.2f64) {
        let g = grid2(128);
        let (lo, hi) = representable_scales(&g);
        let lambda = lo * (hi / lo).powf(t);
        let shape = ProfileShape::Gaussian { amplitude: 1.0 };
        let frame = Frame::Lp { p };
        let reference = rescaled_profile(&g, &shape, hi, &[3.1, 3.1], frame).unwrap().lp_norm(p).unwrap();
        let moved = rescaled_profile(&g, &shape, lambda, &[cx, cy], frame).unwrap().lp_norm(p).unwrap();
        prop_assert!((moved / reference - 1.0).abs() <= 1e-6, "lambda {lambda}: {moved} vs {reference}");
    }

    #[test]
    fn scales_outside_the_representable_range_are_rejected(factor in 1.01..10.0f64) {
        let g = grid2(64);
        let (lo, hi) = representable_scales(&g);
        let shape = ProfileShape::Gaussian { amplitude: 1.0 };
        prop_assert!(rescaled_profile(&g, &shape, lo / factor, &[0.0, 0.0], Frame::Sobolev).is_err());
        prop_assert!(rescaled_profile(&g, &shape, hi * factor, &[0.0, 0.0], Frame::Sobolev).is_err());
    }

    #[test]
    fn orthogonality_entries_follow_the_closed_form(
        scales in proptest::collection::vec(0.01..5.0f64, 2..5),
        cores in proptest::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 5),
        n in 0u32..10,
    ) {
        let profiles: Vec<ProfileSpec> = scales
            .iter()
            .zip(&cores)
            .map(|(&lambda, &(x, y))| ProfileSpec {
                shape: ProfileShape::Gaussian { amplitude: 1.0 },
                scale: Schedule::Geometric { value: lambda, ratio: 0.9 },
                core: vec![Schedule::Constant { value: x }, Schedule::Linear { start: y, slope: 0.5 }],
            })
            .collect();
        let decomp = ProfileDecomposition { profiles, remainder: Remainder::Zero, frame: Frame::Sobolev };
        let q = decomp.orthogonality_matrix(n);
        for j in 0..decomp.len() {
            prop_assert_eq!(q[j][j], 0.0);
            for k in 0..decomp.len() {
                if j == k {
                    continue;
                }
                let (lj, lk) = (decomp.profiles[j].scale_at(n), decomp.profiles[k].scale_at(n));
                let (xj, xk) = (decomp.profiles[j].core_at(n), decomp.profiles[k].core_at(n));
                let dist = ((xj[0] - xk[0]).powi(2) + (xj[1] - xk[1]).powi(2)).sqrt();
                assert_relative_eq!(q[j][k], lj / lk + lk / lj + dist / lj, max_relative = 1e-14);
                prop_assert!(q[j][k] >= 2.0 - 1e-12);
                assert_relative_eq!(q[j][k] * lj - dist, q[k][j] * lj - dist * lj / lk, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn elementary_inequality_is_homogeneous(
        a in proptest::collection::vec(-5.0..5.0f64, 1..6),
        m in 1.1..4.0f64,
        t in 0.1..10.0f64,
    ) {
        let base = elementary_inequality_check(&a, m).unwrap();
        let scaled: Vec<f64> = a.iter().map(|v| v * t).collect();
        let r = elementary_inequality_check(&scaled, m).unwrap();
        let f = t.powf(m);
        assert_relative_eq!(r.lhs, base.lhs * f, max_relative = 1e-9, epsilon = 1e-9 * f * (1.0 + base.rhs));
        assert_relative_eq!(r.rhs, base.rhs * f, max_relative = 1e-9, epsilon = 1e-300);
    }

    #[test]
    fn elementary_inequality_holds_for_two_terms(a in -5.0..5.0f64, b in -5.0..5.0f64, m in 2.0..4.0f64) {
        let r = elementary_inequality_check(&[a, b], m).unwrap();
        let c = m * 2f64.powf(m - 1.0) + 1.0;
        prop_assert!(r.lhs <= c * r.rhs + 1e-12, "lhs {} rhs {}", r.lhs, r.rhs);
    }

    #[test]
    fn single_term_has_no_interaction(a in -5.0..5.0f64, m in 1.1..4.0f64) {
        let r = elementary_inequality_check(&[a], m).unwrap();
        prop_assert_eq!(r.rhs, 0.0);
        prop_assert!(r.lhs <= 1e-12 * (1.0 + a.abs().powf(m)));
    }

    #[test]
    fn scale_classes_of_geometric_and_power_schedules(value in 0.01..10.0f64, gap in 1e-3..0.9f64, e in 0.01..3.0f64) {
        prop_assert_eq!(classify_scale(&Schedule::Geometric { value, ratio: 1.0 - gap }), ScaleClass::Vanishing);
        prop_assert_eq!(classify_scale(&Schedule::Geometric { value, ratio: 1.0 + gap }), ScaleClass::Divergent);
        prop_assert_eq!(classify_scale(&Schedule::Power { coeff: value, exponent: -e }), ScaleClass::Vanishing);
        prop_assert_eq!(classify_scale(&Schedule::Power { coeff: value, exponent: e }), ScaleClass::Divergent);
        prop_assert_eq!(classify_scale(&Schedule::Constant { value }), ScaleClass::Constant);
    }

    #[test]
    fn critical_rescaling_preserves_the_l2_norm_in_two_dimensions(
        seed in 0u64..10_000,
        lambda in 0.1..10.0f64,
    ) {
        let f = random_divfree(&grid2(32), seed, 1.0, -1.0, 1.0, 10.0).unwrap();
        let g = f.rescaled(lambda).unwrap();
        assert_relative_eq!(g.l2_norm(), f.l2_norm(), max_relative = 1e-12, epsilon = 1e-300);
        assert_relative_eq!(g.sup_norm_lattice(), lambda * f.sup_norm_lattice(), max_relative = 1e-12, epsilon = 1e-300);
        prop_assert!(g.divergence_defect() <= 1e-14);
    }

    #[test]
    fn field_files_round_trip(k in (-6..=6i32, -6..=6i32, -6..=6i32, -6..=6i32), phase in 0.0..6.3f64) {
        let f = trig_field(&grid2(16), k, (1.0, 2.0), phase);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        save_field(&path, &f).unwrap();
        let back = load_field(&path).unwrap();
        prop_assert_eq!(back.components(), f.components());
        prop_assert_eq!(back.grid().spec(), f.grid().spec());
    }
}
