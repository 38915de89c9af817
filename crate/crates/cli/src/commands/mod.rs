mod analyze;
mod run;
mod sweep;
mod verify;

pub use analyze::{run_analyze, AnalyzeSpec, AnalyzeSummary};
pub use run::{divergence_ratio, run_scenario, RunSummary, DIVERGENCE_TOL};
pub use sweep::{run_sweep, SweepAction, SweepRow, SweepSpec, SweepSummary};
pub use verify::{run_verify, Check, Suite, VerifyReport};
