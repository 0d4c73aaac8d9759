//! Lumped-parameter transient simulation of an architecture's coolant loops.
//!
//! Each component passage carries one coolant segment. The segments of a
//! loop circulate together, so they share a temperature; segments left out
//! of every loop in a mode stagnate. Fixed-step RK4 at 0.1 s by default.

mod control;
mod drive;
mod params;
mod plant;
mod run;

pub use control::{control_error, pi_update, season, select_mode};
pub use drive::{heat_loads, DriveCycle};
pub use params::PlantParams;
pub use plant::{heat_pump, loop_topology, mix_loops, step, stored_energy, LoopWiring, ModeWiring, StepInputs, Wiring};
pub use run::{
    fixed_test_initials, run_dynamic_test, run_fixed_test, simulate, Initials, Scenario, ScenarioKind, SimOutput,
    FIXED_TEST_MODES,
};

use serde::{Deserialize, Serialize};

/// Instantaneous plant and controller state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub time: f64,
    pub t_cabin: f64,
    pub t_battery: f64,
    pub t_dt: f64,
    /// Coolant in each component passage, indexed like the components.
    pub coolant: [f64; 7],
    pub integral: f64,
    pub mode: u8,
    /// When the active mode was entered.
    pub mode_since: f64,
    /// Cumulative heat entering and leaving the plant, J. Compressor work
    /// counts as entering.
    pub energy_in: f64,
    pub energy_out: f64,
}
