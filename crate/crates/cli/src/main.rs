use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mildns_cli::commands::{run_analyze, run_scenario, run_sweep, run_verify, AnalyzeSpec, Suite, SweepSpec};
use mildns_cli::scenario::output_root;
use mildns_cli::{CliError, CliResult, Scenario};

#[derive(Debug, Parser)]
#[command(name = "mildns", version, about = "Mild-solution Navier-Stokes scenario runner")]
struct Cli {
    /// Scenario, sweep or analysis manifest (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the manifest and MILDNS_OUT_ROOT.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for random initial data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Keep every K-th accepted step in the stored trajectory.
    #[arg(long, global = true)]
    stride: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one scenario and write its trajectory and reports.
    Run,
    /// Run a scenario template over a list of parameter values.
    Sweep,
    /// Run built-in verification suites (all of them when none are named).
    Verify {
        #[arg(value_parser = parse_suite)]
        suites: Vec<Suite>,
    },
    /// Analyze a stored trajectory file.
    Analyze { trajectory: PathBuf },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn require_config(cli: &Cli) -> CliResult<&Path> {
    cli.config
        .as_deref()
        .ok_or_else(|| CliError::config("--config", "this subcommand needs a manifest"))
}

fn default_out(cli: &Cli, name: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| output_root().join(name))
}

fn execute(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config("--threads", e.to_string()))?;
    }
    match &cli.command {
        Command::Run => {
            let scenario = Scenario::load(require_config(cli)?)?.with_overrides(cli.seed, cli.stride)?;
            let dir = scenario.output_dir(cli.out.as_deref());
            let s = run_scenario(&scenario, &dir)?;
            println!(
                "{}: {:?} at t = {} after {} steps ({} samples) -> {}",
                s.name,
                s.outcome,
                s.t_end,
                s.steps,
                s.samples,
                dir.display()
            );
        }
        Command::Sweep => {
            let mut spec = SweepSpec::load(require_config(cli)?)?;
            spec.template = spec.template.with_overrides(cli.seed, cli.stride)?;
            let dir = spec.template.output_dir(cli.out.as_deref());
            let (rows, summary) = run_sweep(&spec, &dir)?;
            for r in &rows {
                println!("{} = {}: {}", spec.parameter, r.value, r.status);
            }
            println!(
                "{} points, {} declared blowups -> {}",
                summary.points,
                summary.declared_blowups,
                dir.display()
            );
        }
        Command::Verify { suites } => {
            let list: Vec<Suite> = if suites.is_empty() { Suite::ALL.to_vec() } else { suites.clone() };
            let dir = default_out(cli, "verify");
            let mut failed = Vec::new();
            for suite in list {
                let report = run_verify(suite, &dir)?;
                for c in &report.checks {
                    println!(
                        "{} {suite}/{}: {:e} (bound {:e})",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.value,
                        c.bound
                    );
                    if !c.passed {
                        failed.push(format!("{suite}/{}", c.name));
                    }
                }
            }
            if !failed.is_empty() {
                return Err(CliError::Assertion(failed.join(", ")));
            }
        }
        Command::Analyze { trajectory } => {
            let spec = match &cli.config {
                Some(p) => AnalyzeSpec::load(p)?,
                None => AnalyzeSpec::default(),
            };
            let dir = default_out(cli, "analysis");
            let s = run_analyze(trajectory, &spec, &dir)?;
            println!(
                "{} samples on [{}, {}], {} diagnostic reports -> {}",
                s.samples,
                s.t_start,
                s.t_end,
                s.diagnosed,
                dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
