//! Machine-readable run summary printed as one JSON line on stdout.

use aep_core::driver::{AuditReport, DiagnosticsRecord, RunOutcome};
use serde_json::json;

pub fn run_summary(outcome: &RunOutcome, audit: &AuditReport, exit_reason: &str) -> String {
    let last: Option<&DiagnosticsRecord> = outcome.records.last();
    json!({
        "exit_reason": exit_reason,
        "final_t": last.map(|r| r.t).unwrap_or(0.0),
        "steps_recorded": outcome.records.len(),
        "energy_initial": audit.initial_energy,
        "energy_drift_rel": audit.max_drift_rel,
        "final_div_res": last.map(|r| r.div_res).unwrap_or(0.0),
        "final_kin_res_g0": last.map(|r| r.kin_res_g0).unwrap_or(0.0),
        "final_kin_res_g1": last.map(|r| r.kin_res_g1).unwrap_or(0.0),
        "final_min_j": last.map(|r| r.min_j).unwrap_or(1.0),
        "final_max_j": last.map(|r| r.max_j).unwrap_or(1.0),
        "projections": outcome.projections,
        "validation_pass": outcome.validation.pass(),
    })
    .to_string()
}

pub fn error_summary(reason: &str, detail: &str) -> String {
    json!({ "exit_reason": reason, "detail": detail }).to_string()
}
