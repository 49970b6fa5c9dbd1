//! Run configuration shared by the coupled drivers.

use crate::ale::GeometryThresholds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    /// Coupled stepper with the plate load folded into the interface Robin
    /// data; works for any damping including zero.
    SemiImplicit,
    /// Alternating given-coefficient fluid and plate window sweeps; requires
    /// positive damping.
    PicardWindow,
    /// Transported-vorticity form with per-stage velocity reconstruction.
    VorticityForm,
}

impl SolverMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "semi_implicit" => Some(Self::SemiImplicit),
            "picard_window" => Some(Self::PicardWindow),
            "vorticity_form" => Some(Self::VorticityForm),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SemiImplicit => "semi_implicit",
            Self::PicardWindow => "picard_window",
            Self::VorticityForm => "vorticity_form",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Successive-iterate tolerance of the pressure solves.
    pub elliptic: f64,
    pub elliptic_max_iter: usize,
    /// Reconstruction tolerance of the vorticity-form stepper.
    pub divcurl: f64,
    pub divcurl_max_iter: usize,
    /// Monitored divergence residual; the defensive projection triggers at
    /// ten times this value.
    pub divergence: f64,
    /// Characteristic-wall residual gate of the vorticity transport.
    pub boundary: f64,
    /// Window-metric tolerance of the alternating iteration.
    pub picard: f64,
    pub picard_max_sweeps: usize,
    /// Weight pairing the plate and velocity window metrics.
    pub picard_weight: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            elliptic: 1e-10,
            elliptic_max_iter: 200,
            divcurl: 1e-10,
            divcurl_max_iter: 100,
            divergence: 1e-6,
            boundary: 1e-6,
            picard: 1e-16,
            picard_max_sweeps: 40,
            picard_weight: 0.25,
        }
    }
}

/// Orders of the diagnostic norms; `delta` shifts all of them.
#[derive(Debug, Clone, Copy)]
pub struct NormOrders {
    pub delta: f64,
    pub velocity: f64,
    pub displacement: f64,
    pub velocity_plate: f64,
}

impl Default for NormOrders {
    fn default() -> Self {
        Self { delta: 0.5, velocity: 2.5, displacement: 4.0, velocity_plate: 2.0 }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub dt: f64,
    pub t_end: f64,
    pub nu: f64,
    pub mode: SolverMode,
    pub tolerances: Tolerances,
    pub thresholds: GeometryThresholds,
    /// Steps between diagnostics rows (the first and last step always
    /// emit one).
    pub cadence: usize,
    pub seed: u64,
    /// Window length of the alternating iteration.
    pub window: f64,
    pub norms: NormOrders,
    /// Steps between cross-solver reconstruction checks (0 disables them).
    pub recon_check_every: usize,
}

impl RunConfig {
    pub fn new(n1: usize, n2: usize, n3: usize, dt: f64, t_end: f64, nu: f64) -> Self {
        assert!(dt > 0.0, "dt must be positive");
        assert!((0.0..=1.0).contains(&nu), "damping must lie in [0, 1]");
        Self {
            n1,
            n2,
            n3,
            dt,
            t_end,
            nu,
            mode: SolverMode::SemiImplicit,
            tolerances: Tolerances::default(),
            thresholds: GeometryThresholds::default(),
            cadence: 1,
            seed: 0,
            window: 0.01,
            norms: NormOrders::default(),
            recon_check_every: 0,
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}
