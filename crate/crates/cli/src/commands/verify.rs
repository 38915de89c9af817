use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use mildns::initial::{half_space, random_divfree};
use mildns::lp::{calibrate_decay_constant, verify_exp_decay, verify_heat_spacetime};
use mildns::lp::{dyadic_blocks, CutoffFamily};
use mildns::mild::{check_global_criterion, frequency_support_tracker, SolverConfig};
use mildns::profile::{
    elementary_inequality_check, greedy_extract, norm_splitting_check, ExtractConfig, Frame, ProfileDecomposition,
    ProfileShape, ProfileSpec, Remainder, Schedule,
};
use mildns::{GridSpec, SpectralField};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Cutoffs,
    Decay,
    HeatSpacetime,
    Support,
    GlobalCriterion,
    Profiles,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Cutoffs,
        Suite::Decay,
        Suite::HeatSpacetime,
        Suite::Support,
        Suite::GlobalCriterion,
        Suite::Profiles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Cutoffs => "cutoffs",
            Suite::Decay => "decay",
            Suite::HeatSpacetime => "heat_spacetime",
            Suite::Support => "support",
            Suite::GlobalCriterion => "global_criterion",
            Suite::Profiles => "profiles",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CliError::config("suite", format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            passed: value <= bound,
            value,
            bound,
        }
    }

    fn at_least(name: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.into(),
            passed: value >= bound,
            value,
            bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn smooth_sample(grid: &std::sync::Arc<mildns::Grid>) -> CliResult<SpectralField> {
    Ok(SpectralField::from_fn(grid, |x| {
        [
            (x[1]).sin() + 0.5 * (3.0 * x[1] + 1.0).cos() + 0.25 * (6.0 * x[1]).sin(),
            (2.0 * x[0]).cos() - 0.3 * (5.0 * x[0] + 2.0).sin(),
            0.0,
        ]
    })?)
}

fn cutoffs() -> CliResult<Vec<Check>> {
    let grid = GridSpec::new(2, 64).build()?;
    let family = CutoffFamily::for_grid(&grid);
    let (lo, hi) = family.exact_range();
    let mut worst = 0.0f64;
    for i in 0..=400 {
        let r = lo * (hi / lo).powf(i as f64 / 400.0);
        worst = worst.max((family.window_sum(r) - 1.0).abs());
    }
    let f = random_divfree(&grid, 3, 1.0, -1.0, 1.0, 21.0)?;
    let set = dyadic_blocks(&f, &family);
    let rec = set.reconstruct()?.sub(&f)?.coefficient_l1() / f.coefficient_l1();
    Ok(vec![
        Check::at_most("partition_of_unity", worst, 1e-14),
        Check::at_most("block_reconstruction", rec, 1e-13),
        Check::at_most("window_truncation", set.truncation_fraction(), 1e-12),
    ])
}

fn decay() -> CliResult<Vec<Check>> {
    let coarse = GridSpec::new(2, 64).build()?;
    let fine = GridSpec::new(2, 128).build()?;
    let f64_ = smooth_sample(&coarse)?;
    let f128 = f64_.resampled(&fine)?;
    let times = [0.0, 0.01, 0.1, 1.0];
    let mut out = Vec::new();
    let mut worst_change = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for j in 0..=3 {
        let a = verify_exp_decay(&f64_, j, f64::INFINITY, &times)?.max_ratio;
        let b = verify_exp_decay(&f128, j, f64::INFINITY, &times)?.max_ratio;
        worst_ratio = worst_ratio.max(a).max(b);
        if a > 0.0 {
            worst_change = worst_change.max((a - b).abs() / a);
        }
    }
    out.push(Check::at_most("sup_ratio_finite", worst_ratio, 1e6));
    out.push(Check::at_most("refinement_change", worst_change, 0.2));
    let c = calibrate_decay_constant(&coarse, 2, 11)?;
    out.push(Check::at_most("high_frequency_constant", c, 1e3));
    Ok(out)
}

fn heat_spacetime() -> CliResult<Vec<Check>> {
    let grid = GridSpec::new(2, 64).build()?;
    let mut ratios = Vec::new();
    for seed in 0..4 {
        let f = random_divfree(&grid, seed, 1.0, -1.0, 1.0, 16.0)?;
        ratios.push(verify_heat_spacetime(&f, 0.0, 2.0, 4.0, 4.0)?.ratio);
    }
    ratios.push(verify_heat_spacetime(&smooth_sample(&grid)?, 0.0, 2.0, 4.0, 4.0)?.ratio);
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::at_most("ratio_upper", max, 10.0),
        Check::at_least("ratio_lower", min, 0.1),
    ])
}

fn picard_config() -> SolverConfig {
    SolverConfig {
        nodes: 8,
        picard_intervals: 2,
        ..SolverConfig::default()
    }
}

fn support() -> CliResult<Vec<Check>> {
    let grid = GridSpec::new(2, 64).refine_sup(false).build()?;
    let u0 = half_space(&grid, 3, 1e-2)?;
    let records = frequency_support_tracker(&u0, 4.0, 3, 0.05, &picard_config())?;
    let worst = records.iter().map(|r| r.outside_fraction).fold(0.0, f64::max);
    Ok(vec![Check::at_most("outside_fraction", worst, 1e-8)])
}

fn global_criterion() -> CliResult<Vec<Check>> {
    let grid = GridSpec::new(2, 64).refine_sup(false).build()?;
    let c_glob = calibrate_decay_constant(&grid, 2, 11)?;
    let u0 = half_space(&grid, 3, 1e-2)?;
    let r = check_global_criterion(&u0, 4.0, 2, c_glob, 1.0, &picard_config())?;
    let cauchy = r.cauchy.as_ref().map(|c| c.holds).unwrap_or(false);
    Ok(vec![
        Check::at_least("criterion_margin", r.margin, 0.0),
        Check::at_least("cauchy_bound", if cauchy { 1.0 } else { 0.0 }, 1.0),
    ])
}

fn constant(value: f64) -> Schedule {
    Schedule::Constant { value }
}

fn profiles() -> CliResult<Vec<Check>> {
    let grid = GridSpec::new(2, 128).build()?;
    let spec = |lambda: f64, x: f64, y: f64| ProfileSpec {
        shape: ProfileShape::Gaussian { amplitude: 1.0 },
        scale: constant(lambda),
        core: vec![constant(x), constant(y)],
    };
    let decomp = ProfileDecomposition {
        profiles: vec![spec(0.25, 1.5, 1.5), spec(0.5, 4.5, 4.0)],
        remainder: Remainder::Zero,
        frame: Frame::Lp { p: 4.0 },
    };
    let f = decomp.synthesize(&grid, 0, 2)?;
    let config = ExtractConfig {
        max_profiles: 2,
        ..ExtractConfig::default()
    };
    let out = greedy_extract(&[f], &config)?;
    let mut worst_scale = f64::INFINITY;
    let mut worst_core = f64::INFINITY;
    if out.snapshots[0].pieces.len() == 2 {
        worst_scale = 1.0;
        worst_core = 0.0;
        for p in &decomp.profiles {
            let lam = p.scale_at(0);
            let core = p.core_at(0);
            let best = out.snapshots[0]
                .pieces
                .iter()
                .min_by(|a, b| {
                    let da = grid.displacement(&a.core, &core);
                    let db = grid.displacement(&b.core, &core);
                    da.iter().map(|v| v * v).sum::<f64>().total_cmp(&db.iter().map(|v| v * v).sum::<f64>())
                })
                .expect("two pieces");
            worst_scale = worst_scale.max((best.scale / lam).max(lam / best.scale));
            let dist = grid.displacement(&best.core, &core).iter().map(|v| v * v).sum::<f64>().sqrt();
            worst_core = worst_core.max(dist / lam);
        }
    }
    let split = norm_splitting_check(&decomp, &grid, 0, 2)?;
    let hand = elementary_inequality_check(&[1.0, -1.0], 2.0)?;
    Ok(vec![
        Check::at_most("scale_recovery_factor", worst_scale, 2.0),
        Check::at_most("core_recovery_in_scales", worst_core, 1.0),
        Check::at_most("norm_splitting_gap", split.gap.abs(), 1e-4),
        Check::at_most("elementary_hand_case", (hand.lhs - 2.0).abs() + (hand.rhs - 2.0).abs(), 0.0),
    ])
}

/// Runs one verification suite and writes `verify_<suite>.json` to `out_dir`.
pub fn run_verify(suite: Suite, out_dir: &Path) -> CliResult<VerifyReport> {
    let checks = match suite {
        Suite::Cutoffs => cutoffs()?,
        Suite::Decay => decay()?,
        Suite::HeatSpacetime => heat_spacetime()?,
        Suite::Support => support()?,
        Suite::GlobalCriterion => global_criterion()?,
        Suite::Profiles => profiles()?,
    };
    let report = VerifyReport { suite, checks };
    fs::create_dir_all(out_dir)?;
    fs::write(
        out_dir.join(format!("verify_{suite}.json")),
        serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}
