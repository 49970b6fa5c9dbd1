//! Energy bookkeeping over a trajectory.
//!
//! The audited quantity is the total energy plus the accumulated plate
//! dissipation; exchange through the interface pressure cancels between the
//! fluid and the plate, so the audit drifts only by discretization error.

use super::diag::DiagnosticsRecord;

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub initial_energy: f64,
    pub final_energy: f64,
    pub final_dissipation: f64,
    /// max_t |E(t) + D(t) - E(0)| (absolute).
    pub max_drift_abs: f64,
    /// Drift relative to the initial energy (zero when starting from rest).
    pub max_drift_rel: f64,
}

pub fn energy_audit(records: &[DiagnosticsRecord]) -> AuditReport {
    assert!(!records.is_empty(), "audit requires at least one record");
    let e0 = records[0].e_total + records[0].dissip_cum;
    let mut max_abs = 0.0f64;
    for r in records {
        max_abs = max_abs.max((r.e_total + r.dissip_cum - e0).abs());
    }
    let last = records.last().unwrap();
    AuditReport {
        initial_energy: e0,
        final_energy: last.e_total,
        final_dissipation: last.dissip_cum,
        max_drift_abs: max_abs,
        max_drift_rel: if e0 > 0.0 { max_abs / e0 } else { max_abs },
    }
}
