use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mildns_cli::commands::{run_scenario, RunSummary};
use mildns_cli::{CliError, Scenario, OUT_ROOT_VAR};

fn mildns() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mildns"))
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL_TG: &str = r#"{
    "name": "tg_small",
    "initial": {"generator": {"kind": "taylor_green", "amplitude": 1.0}},
    "grid": {"dim": 2, "n": 16},
    "solver": {"t_horizon": 0.25},
    "diagnostics": [{"kind": "energy"}]
}"#;

#[test]
fn run_writes_artifacts_and_decays_like_the_exact_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = mildns()
        .args(["run", "--config"])
        .arg(scenario_path("taylor_green.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["scenario.json", "trajectory.bin", "steps.csv", "samples.csv", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let summary: RunSummary = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.t_end, 1.0);
    let mut rdr = csv::Reader::from_path(dir.path().join("samples.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let e0: f64 = rows[0][1].parse().unwrap();
    for r in &rows {
        let t: f64 = r[0].parse().unwrap();
        let e: f64 = r[1].parse().unwrap();
        assert!((e - e0 * (-4.0 * t).exp()).abs() <= 1e-9 * e0, "t={t}");
    }
}

#[test]
fn fixed_seed_gives_byte_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = mildns()
            .args(["run", "--seed", "5", "--config"])
            .arg(scenario_path("random_2d.json"))
            .arg("--out")
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["steps.csv", "samples.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn output_root_variable_places_runs() {
    let root = tempfile::tempdir().unwrap();
    let cfg = write(root.path(), "tg.json", SMALL_TG);
    let out = mildns()
        .env(OUT_ROOT_VAR, root.path())
        .args(["run", "--stride", "2", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(root.path().join("tg_small").join("summary.json").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &SMALL_TG.replace("\"n\": 16", "\"n\": 15"));
    let out = mildns().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("scenario.grid"));
    let out = mildns().args(["run"]).output().unwrap();
    assert_eq!(code(&out), 2);
    let out = mildns().args(["verify", "nonsense"]).output().unwrap();
    assert_eq!(code(&out), 2);
    let missing = mildns().args(["run", "--config", "/nonexistent/x.json"]).output().unwrap();
    assert_eq!(code(&missing), 2);
}

#[test]
fn exit_codes_follow_error_kind() {
    assert_eq!(CliError::Assertion("x".into()).exit_code(), 1);
    assert_eq!(CliError::config("a", "b").exit_code(), 2);
    assert_eq!(CliError::Divergence("x".into()).exit_code(), 3);
    assert_eq!(CliError::Core(mildns::Error::Divergence("x".into())).exit_code(), 3);
}

#[test]
fn verify_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = mildns()
        .args(["verify", "cutoffs", "support", "profiles", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert!(dir.path().join("verify_support.json").exists());
}

#[test]
fn sweep_finds_the_criterion_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let out = mildns()
        .args(["sweep", "--threads", "1", "--config"])
        .arg(scenario_path("half_space_sweep.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let satisfied: Vec<bool> = rdr
        .deserialize::<mildns_cli::commands::SweepRow>()
        .map(|r| r.unwrap().criterion_satisfied.unwrap())
        .collect();
    assert!(satisfied[0]);
    assert!(!satisfied[satisfied.len() - 1]);
    let first_fail = satisfied.iter().position(|s| !s).unwrap();
    assert!(satisfied[first_fail..].iter().all(|s| !s));
}

#[test]
fn analyze_reads_a_stored_run() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = Scenario::from_json(SMALL_TG).unwrap();
    let summary = run_scenario(&scenario, dir.path()).unwrap();
    let spec = write(
        dir.path(),
        "analyze.json",
        r#"{"diagnostics": [{"kind": "xspace", "p": 4.0}, {"kind": "blowup", "c_conc": 0.01, "t_blow": 1.0, "p": 4.0}]}"#,
    );
    let out_dir = dir.path().join("analysis");
    let out = mildns()
        .arg("analyze")
        .arg(dir.path().join("trajectory.bin"))
        .arg("--config")
        .arg(&spec)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("diagnostics.json").exists());
    let a: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("analysis.json")).unwrap()).unwrap();
    assert_eq!(a["samples"].as_u64().unwrap() as usize, summary.samples);
}
