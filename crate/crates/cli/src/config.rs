//! Flat key-value run configuration with one section per subsystem.
//! Unknown keys are rejected. The reference schema with defaults ships in
//! `configs/reference.toml`.

use aep_core::ale::GeometryThresholds;
use aep_core::driver::{NormOrders, RunConfig, SolverMode, Tolerances};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub grid: GridSection,
    pub time: TimeSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub tolerances: TolerancesSection,
    #[serde(default)]
    pub monitor: MonitorSection,
    pub ic: IcSection,
    #[serde(default)]
    pub norms: NormsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_cadence")]
    pub cadence: usize,
}

fn default_cadence() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub nu: f64,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default)]
    pub seed: u64,
    /// Steps between cross-solver reconstruction checks (0 = off).
    #[serde(default)]
    pub recon_check_every: usize,
}

fn default_mode() -> String {
    "semi_implicit".into()
}

fn default_window() -> f64 {
    0.01
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolerancesSection {
    pub elliptic: f64,
    pub elliptic_max_iter: usize,
    pub divcurl: f64,
    pub divcurl_max_iter: usize,
    pub divergence: f64,
    pub boundary: f64,
    pub picard: f64,
    pub picard_max_sweeps: usize,
    pub picard_weight: f64,
}

impl Default for TolerancesSection {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            elliptic: t.elliptic,
            elliptic_max_iter: t.elliptic_max_iter,
            divcurl: t.divcurl,
            divcurl_max_iter: t.divcurl_max_iter,
            divergence: t.divergence,
            boundary: t.boundary,
            picard: t.picard,
            picard_max_sweeps: t.picard_max_sweeps,
            picard_weight: t.picard_weight,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorSection {
    pub j_min: f64,
    pub j_max: f64,
    pub a_dev_max: f64,
}

impl Default for MonitorSection {
    fn default() -> Self {
        let t = GeometryThresholds::default();
        Self { j_min: t.j_min, j_max: t.j_max, a_dev_max: t.a_dev_max }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcSection {
    pub generator: String,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_k1")]
    pub k1: i64,
    #[serde(default)]
    pub k2: i64,
    #[serde(default = "default_count")]
    pub count: usize,
    /// Snapshot path for `generator = "snapshot"`.
    #[serde(default)]
    pub snapshot: Option<String>,
}

fn default_k1() -> i64 {
    1
}

fn default_count() -> usize {
    4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsSection {
    pub delta: f64,
}

impl Default for NormsSection {
    fn default() -> Self {
        Self { delta: NormOrders::default().delta }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub snapshots: bool,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    pub fn run_config(&self) -> Result<RunConfig, String> {
        let mode = SolverMode::parse(&self.solver.mode)
            .ok_or_else(|| format!("unknown solver mode {:?}", self.solver.mode))?;
        if !(0.0..=1.0).contains(&self.solver.nu) {
            return Err(format!("damping {} outside [0, 1]", self.solver.nu));
        }
        if self.time.dt <= 0.0 {
            return Err("dt must be positive".into());
        }
        let mut cfg = RunConfig::new(
            self.grid.n1,
            self.grid.n2,
            self.grid.n3,
            self.time.dt,
            self.time.t_end,
            self.solver.nu,
        );
        cfg.mode = mode;
        cfg.cadence = self.time.cadence.max(1);
        cfg.seed = self.solver.seed;
        cfg.window = self.solver.window;
        cfg.tolerances = Tolerances {
            elliptic: self.tolerances.elliptic,
            elliptic_max_iter: self.tolerances.elliptic_max_iter,
            divcurl: self.tolerances.divcurl,
            divcurl_max_iter: self.tolerances.divcurl_max_iter,
            divergence: self.tolerances.divergence,
            boundary: self.tolerances.boundary,
            picard: self.tolerances.picard,
            picard_max_sweeps: self.tolerances.picard_max_sweeps,
            picard_weight: self.tolerances.picard_weight,
        };
        cfg.thresholds = GeometryThresholds {
            j_min: self.monitor.j_min,
            j_max: self.monitor.j_max,
            a_dev_max: self.monitor.a_dev_max,
        };
        cfg.norms = NormOrders { delta: self.norms.delta, ..NormOrders::default() };
        cfg.recon_check_every = self.solver.recon_check_every;
        Ok(cfg)
    }
}
