//! Scenario runner, metrics and the identification-to-design pipeline.

mod compare;
mod metrics;
mod pipeline;
mod report;
mod scenario;
mod sim;
mod telemetry;

pub use metrics::{
    block_rms, detrend, dominant_frequency, envelope_growth, first_order_fit, settle_time, sliding_growth,
    step_overshoots, FirstOrderFit, StepOvershoot,
};
pub use compare::{compare_runs, ColumnDiff, CompareReport};
pub use pipeline::{
    analyze_loop, design_pipeline, notch_free_limit, LoopAnalysis, PipelineConfig, PipelineResult, PipelineTargets,
    StabilityLimit, BODE_EXPORTS,
};
pub use report::{
    evaluate, CheckResult, RunReport, CONVERGED_FRACTION, DIVERGENCE_GROWTH, DIVERGENCE_HOP_S, DIVERGENCE_MIN_RMS, DIVERGENCE_WINDOW_S,
    ENVELOPE_BLOCK_S,
};
pub use scenario::{builtin, Action, Check, Event, InitialCondition, PlantMode, Scenario, BUILTIN_SCENARIOS};
pub use sim::{simulate, simulate_with_table};
pub use telemetry::*;

use crate::error::HarnessError;
use crate::plant::AeroTable;

/// Simulates a scenario and evaluates its checks.
pub fn run_scenario(sc: &Scenario) -> Result<(Telemetry, RunReport), HarnessError> {
    run_scenario_with_table(sc, &AeroTable::default())
}

/// As [`run_scenario`] with a custom aerodynamic table.
pub fn run_scenario_with_table(sc: &Scenario, table: &AeroTable) -> Result<(Telemetry, RunReport), HarnessError> {
    let tel = simulate_with_table(sc, table)?;
    let rep = evaluate(sc, &tel);
    Ok((tel, rep))
}
