//! Per-step diagnostics.

use super::config::NormOrders;
use super::state::CoupledState;
use crate::fields::norms::{sobolev_norm_2d, sobolev_norm_3d};
use crate::fields::scalar::Boundary;
use crate::ops;
use crate::plate::{damping_dissipation, plate_energy};
use std::io::{self, Write};

pub const CSV_HEADER: &str = "t,e_fluid,e_kin_plate,e_bend_plate,e_total,dissip_rate,dissip_cum,div_res,piola_res,kin_res_g0,kin_res_g1,compat_res,min_J,max_J,a_dev,norm_v,norm_w,norm_wt";

#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_fluid: f64,
    pub e_kin_plate: f64,
    pub e_bend_plate: f64,
    pub e_total: f64,
    pub dissip_rate: f64,
    pub dissip_cum: f64,
    pub div_res: f64,
    pub piola_res: f64,
    pub kin_res_g0: f64,
    pub kin_res_g1: f64,
    pub compat_res: f64,
    pub min_j: f64,
    pub max_j: f64,
    pub a_dev: f64,
    pub norm_v: f64,
    pub norm_w: f64,
    pub norm_wt: f64,
}

impl DiagnosticsRecord {
    /// Evaluate every monitored quantity on the current state. The
    /// cumulative dissipation and the latest solvability residual are carried
    /// by the caller; the latter is zero outside the given-coefficient mode.
    pub fn measure(state: &CoupledState, nu: f64, dissip_cum: f64, compat_res: f64, orders: &NormOrders) -> Self {
        let map = &state.map;
        let v = &state.fluid.v;
        // kinetic energy weighted by the volume factor of the moving domain
        let mut speed_sq = v.comp(1).mul(v.comp(1));
        speed_sq.add_assign(&v.comp(2).mul(v.comp(2)));
        speed_sq.add_assign(&v.comp(3).mul(v.comp(3)));
        let e_fluid = 0.5 * map.j.mul(&speed_sq).integrate();
        let (e_kin_plate, e_bend_plate) = plate_energy(&state.interface);
        let e_total = e_fluid + e_kin_plate + e_bend_plate;
        let dissip_rate = damping_dissipation(&state.interface, nu);

        let kin_g1 = {
            let mut d = ops::cofactor_normal_component(map, v).trace(Boundary::Gamma1);
            d.axpy(-1.0, &state.interface.w_t);
            d.max_abs()
        };
        let s = orders.delta;
        let norm_v = (1..=3)
            .map(|i| sobolev_norm_3d(v.comp(i), orders.velocity + s).powi(2))
            .sum::<f64>()
            .sqrt();
        Self {
            t: state.t(),
            e_fluid,
            e_kin_plate,
            e_bend_plate,
            e_total,
            dissip_rate,
            dissip_cum,
            div_res: ops::ale_divergence(map, v).max_abs(),
            piola_res: map.piola_residual(),
            kin_res_g0: v.comp(3).trace(Boundary::Gamma0).max_abs(),
            kin_res_g1: kin_g1,
            compat_res,
            min_j: map.min_j(),
            max_j: map.max_j(),
            a_dev: map.a_deviation(),
            norm_v,
            norm_w: sobolev_norm_2d(&state.interface.w, orders.displacement + s),
            norm_wt: sobolev_norm_2d(&state.interface.w_t, orders.velocity_plate + s),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.t,
            self.e_fluid,
            self.e_kin_plate,
            self.e_bend_plate,
            self.e_total,
            self.dissip_rate,
            self.dissip_cum,
            self.div_res,
            self.piola_res,
            self.kin_res_g0,
            self.kin_res_g1,
            self.compat_res,
            self.min_j,
            self.max_j,
            self.a_dev,
            self.norm_v,
            self.norm_w,
            self.norm_wt
        )
    }
}

pub fn write_csv<W: Write>(mut w: W, records: &[DiagnosticsRecord]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}
