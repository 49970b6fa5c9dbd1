//! Subcommand implementations. Each returns the process exit code.

use crate::config::ConfigFile;
use crate::{exit_code_for, exit_codes, summary};
use aep_core::driver::{
    diag, dt_sweep, energy_audit, generator, nu_sweep, resolution_sweep, run_coupled_on,
    validate_initial_data, ExitReason, InitialData, RunConfig,
};
use aep_core::fields::norms::{sobolev_norm_2d, sobolev_norm_3d};
use aep_core::fields::snapshot::{self, FieldOwned, FieldRef};
use aep_core::fields::{Grid, ScalarField2D, VectorField3D};
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub nu: Option<f64>,
    pub until: Option<f64>,
    pub cadence: Option<usize>,
}

fn apply_overrides(cfg: &mut RunConfig, ov: &Overrides) -> Result<(), String> {
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = &ov.mode {
        cfg.mode = aep_core::driver::SolverMode::parse(mode).ok_or_else(|| format!("unknown mode {mode:?}"))?;
    }
    if let Some(nu) = ov.nu {
        if !(0.0..=1.0).contains(&nu) {
            return Err(format!("damping {nu} outside [0, 1]"));
        }
        cfg.nu = nu;
    }
    if let Some(t) = ov.until {
        cfg.t_end = t;
    }
    if let Some(c) = ov.cadence {
        cfg.cadence = c.max(1);
    }
    Ok(())
}

fn build_initial(file: &ConfigFile, cfg: &RunConfig, grid: &Arc<Grid>) -> Result<InitialData, String> {
    if file.ic.generator == "snapshot" {
        let path = file.ic.snapshot.as_ref().ok_or("snapshot generator requires a path")?;
        return load_state_snapshot(Path::new(path)).map(|(_, d)| d);
    }
    generator::by_name(
        grid,
        &file.ic.generator,
        file.ic.amplitude,
        file.ic.k1,
        file.ic.k2,
        cfg.seed,
        file.ic.count,
    )
    .ok_or_else(|| format!("unknown generator {:?}", file.ic.generator))
}

/// Read `(v1, v2, v3, w@g1, w_t@g1)` from a snapshot.
pub fn load_state_snapshot(path: &Path) -> Result<(Arc<Grid>, InitialData), String> {
    let file = fs::File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    let (grid, fields) = snapshot::read_snapshot(std::io::BufReader::new(file))
        .map_err(|e| format!("bad snapshot {}: {e}", path.display()))?;
    let mut v = VectorField3D::zeros(&grid);
    let mut w0 = ScalarField2D::zeros(&grid);
    let mut w1 = ScalarField2D::zeros(&grid);
    let mut seen_v = 0;
    for (name, field) in fields {
        match (name.as_str(), field) {
            ("v1", FieldOwned::Scalar3(f)) => {
                *v.comp_mut(1) = f;
                seen_v += 1;
            }
            ("v2", FieldOwned::Scalar3(f)) => {
                *v.comp_mut(2) = f;
                seen_v += 1;
            }
            ("v3", FieldOwned::Scalar3(f)) => {
                *v.comp_mut(3) = f;
                seen_v += 1;
            }
            ("w@g1", FieldOwned::Scalar2(f)) => w0 = f,
            ("w_t@g1", FieldOwned::Scalar2(f)) => w1 = f,
            _ => {}
        }
    }
    if seen_v != 3 {
        return Err("snapshot lacks the three velocity components".into());
    }
    Ok((grid, InitialData { v0: v, w0, w1 }))
}

fn write_state_snapshot(
    path: &Path,
    grid: &Grid,
    data: &InitialData,
) -> Result<(), String> {
    let file = fs::File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
    snapshot::write_snapshot(
        BufWriter::new(file),
        grid,
        &[
            ("v1", FieldRef::Scalar3(data.v0.comp(1))),
            ("v2", FieldRef::Scalar3(data.v0.comp(2))),
            ("v3", FieldRef::Scalar3(data.v0.comp(3))),
            ("w@g1", FieldRef::Scalar2(&data.w0)),
            ("w_t@g1", FieldRef::Scalar2(&data.w1)),
        ],
    )
    .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Execute the configured run; write diagnostics, snapshots, and a summary.
pub fn cmd_run(config_path: &Path, ov: &Overrides) -> i32 {
    let file = match ConfigFile::load(config_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            println!("{}", summary::error_summary("config_error", &e));
            return exit_codes::USAGE;
        }
    };
    let mut cfg = match file.run_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            println!("{}", summary::error_summary("config_error", &e));
            return exit_codes::USAGE;
        }
    };
    if let Err(e) = apply_overrides(&mut cfg, ov) {
        eprintln!("{e}");
        println!("{}", summary::error_summary("config_error", &e));
        return exit_codes::USAGE;
    }
    let grid = Grid::new(cfg.n1, cfg.n2, cfg.n3);
    let initial = match build_initial(&file, &cfg, &grid) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{e}");
            println!("{}", summary::error_summary("config_error", &e));
            return exit_codes::USAGE;
        }
    };

    let out_dir = ov
        .out
        .clone()
        .or_else(|| file.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = fs::create_dir_all(&out_dir) {
        eprintln!("cannot create {}: {e}", out_dir.display());
        return exit_codes::USAGE;
    }

    let outcome = match run_coupled_on(&cfg, &grid, &initial) {
        Ok(o) => o,
        Err(err) => {
            eprintln!("run failed: {err}");
            println!("{}", summary::error_summary("error", &err.to_string()));
            return exit_code_for(&err);
        }
    };

    // diagnostics stream
    let csv_path = out_dir.join("diagnostics.csv");
    if let Err(e) = fs::File::create(&csv_path)
        .map_err(|e| e.to_string())
        .and_then(|f| diag::write_csv(BufWriter::new(f), &outcome.records).map_err(|e| e.to_string()))
    {
        eprintln!("cannot write {}: {e}", csv_path.display());
        return exit_codes::USAGE;
    }

    if file.output.snapshots {
        let final_data = InitialData {
            v0: outcome.final_state.fluid.v.clone(),
            w0: outcome.final_state.interface.w.clone(),
            w1: outcome.final_state.interface.w_t.clone(),
        };
        if let Err(e) = write_state_snapshot(&out_dir.join("initial.aepf"), &grid, &initial)
            .and_then(|_| write_state_snapshot(&out_dir.join("final.aepf"), &grid, &final_data))
        {
            eprintln!("{e}");
            return exit_codes::USAGE;
        }
    }

    let audit = energy_audit(&outcome.records);
    let (reason, code) = match outcome.exit {
        ExitReason::Completed => ("completed", exit_codes::OK),
        ExitReason::GeometryAbort { .. } => ("geometry_abort", exit_codes::GEOMETRY),
    };
    eprintln!(
        "run {}: t={:.6}, energy drift {:.3e}, records {}",
        reason,
        outcome.records.last().map(|r| r.t).unwrap_or(0.0),
        audit.max_drift_rel,
        outcome.records.len()
    );
    println!("{}", summary::run_summary(&outcome, &audit, reason));
    code
}

/// Validate initial data from a config or a snapshot.
pub fn cmd_validate(path: &Path) -> i32 {
    let result: Result<(Arc<Grid>, InitialData), String> =
        if path.extension().map(|e| e == "toml").unwrap_or(false) {
            ConfigFile::load(path).and_then(|file| {
                let cfg = file.run_config()?;
                let grid = Grid::new(cfg.n1, cfg.n2, cfg.n3);
                let d = build_initial(&file, &cfg, &grid)?;
                Ok((grid, d))
            })
        } else {
            load_state_snapshot(path)
        };
    let (_, data) = match result {
        Ok(ok) => ok,
        Err(e) => {
            eprintln!("{e}");
            println!("{}", summary::error_summary("config_error", &e));
            return exit_codes::USAGE;
        }
    };
    match validate_initial_data(&data.v0, &data.w1, Some(&data.w0), aep_core::driver::validate::VALIDATION_TOL) {
        Ok(report) => {
            for c in &report.checks {
                println!("{:26} {:>13.6e}  {}", c.name, c.residual, if c.pass { "pass" } else { "FAIL" });
            }
            if report.pass() {
                exit_codes::OK
            } else {
                exit_codes::VALIDATION
            }
        }
        Err(e) => {
            eprintln!("{e}");
            exit_code_for(&e)
        }
    }
}

/// Parameter sweeps with a convergence-table CSV.
pub fn cmd_sweep(config_path: &Path, kind: &str, ov: &Overrides) -> i32 {
    let file = match ConfigFile::load(config_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("{e}");
            return exit_codes::USAGE;
        }
    };
    let mut cfg = match file.run_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return exit_codes::USAGE;
        }
    };
    if let Err(e) = apply_overrides(&mut cfg, ov) {
        eprintln!("{e}");
        return exit_codes::USAGE;
    }
    let grid = Grid::new(cfg.n1, cfg.n2, cfg.n3);
    let initial = match build_initial(&file, &cfg, &grid) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{e}");
            return exit_codes::USAGE;
        }
    };
    let out_dir = ov
        .out
        .clone()
        .or_else(|| file.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Err(e) = fs::create_dir_all(&out_dir) {
        eprintln!("cannot create {}: {e}", out_dir.display());
        return exit_codes::USAGE;
    }

    let table = match kind {
        "nu" => {
            let nus = [1e-1, 1e-2, 1e-3];
            match nu_sweep(&cfg, &initial, &nus) {
                Ok(report) => {
                    let mut rows = vec!["nu,distance_to_next,damping_budget".to_string()];
                    for (i, &nu) in report.nus.iter().enumerate() {
                        let d = report.distances.get(i).copied().unwrap_or(f64::NAN);
                        rows.push(format!("{:.6e},{:.16e},{:.16e}", nu, d, report.damping_budgets[i]));
                    }
                    eprintln!(
                        "distances decreasing: {}, budgets decreasing: {}",
                        report.distances_decreasing(),
                        report.budgets_decreasing()
                    );
                    rows.join("\n")
                }
                Err(e) => {
                    eprintln!("{e}");
                    return exit_code_for(&e);
                }
            }
        }
        "dt" => {
            let dts = [4.0 * cfg.dt, 2.0 * cfg.dt, cfg.dt];
            let dt_ref = cfg.dt / 4.0;
            match dt_sweep(&cfg, &initial, &dts, dt_ref) {
                Ok(report) => {
                    let mut rows = vec!["dt,distance_to_finest,observed_order".to_string()];
                    for (i, &dt) in report.dts.iter().enumerate() {
                        let order = if i == 0 { f64::NAN } else { report.orders[i - 1] };
                        rows.push(format!("{:.6e},{:.16e},{:.6}", dt, report.errors[i], order));
                    }
                    eprintln!("observed orders: {:?}", report.orders);
                    rows.join("\n")
                }
                Err(e) => {
                    eprintln!("{e}");
                    return exit_code_for(&e);
                }
            }
        }
        "resolution" => {
            let n3s = [9usize, 13, 17, 21, 33];
            match resolution_sweep(cfg.n1, cfg.n2, &n3s) {
                Ok(report) => {
                    let mut rows = vec!["n3,extension_residual,elliptic_error".to_string()];
                    for (i, &n3) in report.n3_values.iter().enumerate() {
                        rows.push(format!(
                            "{},{:.16e},{:.16e}",
                            n3, report.extension_residuals[i], report.elliptic_errors[i]
                        ));
                    }
                    rows.join("\n")
                }
                Err(e) => {
                    eprintln!("{e}");
                    return exit_code_for(&e);
                }
            }
        }
        other => {
            eprintln!("unknown sweep kind {other:?} (expected nu, dt, or resolution)");
            return exit_codes::USAGE;
        }
    };
    let path = out_dir.join(format!("sweep_{kind}.csv"));
    if let Err(e) = fs::write(&path, table + "\n") {
        eprintln!("cannot write {}: {e}", path.display());
        return exit_codes::USAGE;
    }
    eprintln!("wrote {}", path.display());
    exit_codes::OK
}

/// Print a norm table for every field in a snapshot.
pub fn cmd_norms(path: &Path, orders: &[f64]) -> i32 {
    let file = match fs::File::open(path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("cannot open {}: {e}", path.display());
            return exit_codes::USAGE;
        }
    };
    let (_, fields) = match snapshot::read_snapshot(std::io::BufReader::new(file)) {
        Ok(ok) => ok,
        Err(e) => {
            eprintln!("bad snapshot {}: {e}", path.display());
            return exit_codes::USAGE;
        }
    };
    print!("{:14}", "field");
    for s in orders {
        print!(" {:>14}", format!("H^{s}"));
    }
    println!();
    for (name, field) in &fields {
        print!("{name:14}");
        for &s in orders {
            let value = match field {
                FieldOwned::Scalar3(f) => sobolev_norm_3d(f, s),
                FieldOwned::Scalar2(f) => sobolev_norm_2d(f, s),
            };
            print!(" {value:>14.6e}");
        }
        println!();
    }
    exit_codes::OK
}
