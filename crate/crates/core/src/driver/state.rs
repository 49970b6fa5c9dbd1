//! Coupled solution state.

use crate::ale::{build_map, AleMap, InterfaceState};
use crate::error::Result;
use crate::euler::FluidState;
use crate::fields::scalar::ScalarField2D;
use crate::fields::Grid;
use crate::pressure::PressureField;
use std::sync::Arc;

/// The full solution tuple at one time, with the derived map cached; the map
/// is rebuilt whenever the interface changes.
#[derive(Debug, Clone)]
pub struct CoupledState {
    pub fluid: FluidState,
    pub interface: InterfaceState,
    pub map: AleMap,
    pub q_last: Option<PressureField>,
    pub w_tt_last: Option<ScalarField2D>,
}

impl CoupledState {
    pub fn new(fluid: FluidState, interface: InterfaceState) -> Result<Self> {
        let map = build_map(&interface)?;
        Ok(Self { fluid, interface, map, q_last: None, w_tt_last: None })
    }

    pub fn rest(grid: &Arc<Grid>) -> Self {
        Self::new(FluidState::rest(grid), InterfaceState::rest(grid)).expect("rest state is valid")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.fluid.grid()
    }

    pub fn t(&self) -> f64 {
        self.fluid.t
    }

    /// Replace both evolving components and refresh the cached map.
    pub fn advanced(
        &self,
        fluid: FluidState,
        interface: InterfaceState,
        q_last: Option<PressureField>,
        w_tt_last: Option<ScalarField2D>,
    ) -> Result<Self> {
        let map = build_map(&interface)?;
        Ok(Self { fluid, interface, map, q_last, w_tt_last })
    }
}
