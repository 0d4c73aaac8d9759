use std::io::Write;

use serde::{Deserialize, Serialize};

use super::control::{control_error, pi_update, select_mode};
use super::drive::{heat_loads, DriveCycle};
use super::plant::{mix_loops, step, stored_energy, ModeWiring, StepInputs, Wiring};
use super::{PlantParams, ThermalState};
use crate::assess::assess_all;
use crate::domain::{ComponentId, ModeCatalog};
use crate::preprocess::DirectedArch;
use crate::{Error, Result};

const KELVIN: f64 = 273.15;
const T_MIN: f64 = 150.0;
const T_MAX: f64 = 450.0;

/// Modes run one by one in the fixed test protocol. Mode 7 needs a charging
/// vehicle and is left out.
pub const FIXED_TEST_MODES: [u8; 12] = [1, 2, 3, 4, 5, 6, 8, 9, 10, 11, 12, 13];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScenarioKind {
    FixedMode(u8),
    Dynamic,
}

/// Ambient and starting temperatures, K.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Initials {
    pub ambient: f64,
    pub cabin: f64,
    pub battery: f64,
    pub dt: f64,
}

impl Initials {
    pub fn uniform(t: f64) -> Self {
        Self { ambient: t, cabin: t, battery: t, dt: t }
    }

    fn celsius(ambient: f64, cabin: f64, battery: f64, dt: f64) -> Self {
        Self { ambient: ambient + KELVIN, cabin: cabin + KELVIN, battery: battery + KELVIN, dt: dt + KELVIN }
    }
}

/// Starting conditions of the fixed test of `mode`.
pub fn fixed_test_initials(mode: u8) -> Option<Initials> {
    let i = Initials::celsius;
    Some(match mode {
        1 => i(0.0, 0.0, 0.0, 0.0),
        2 => i(0.0, 0.0, 0.0, 26.0),
        3 => i(0.0, 0.0, 26.0, 26.0),
        4 => i(0.0, 0.0, 26.0, 0.0),
        5 => i(0.0, 0.0, 16.0, 0.0),
        6 => i(0.0, 0.0, 16.0, 26.0),
        8 => i(35.0, 35.0, 35.0, 51.0),
        9 => i(35.0, 35.0, 41.0, 51.0),
        10 => i(35.0, 35.0, 35.0, 35.0),
        11 => i(35.0, 35.0, 41.0, 35.0),
        12 => i(35.0, 35.0, 24.0, 35.0),
        13 => i(35.0, 35.0, 24.0, 51.0),
        _ => return None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub initials: Initials,
    pub duration: f64,
    pub cycle: DriveCycle,
    pub setpoint: f64,
    pub dt: f64,
    pub charging: bool,
}

impl Scenario {
    /// Ten minutes in one mode from its tabulated start.
    pub fn fixed(mode: u8, cycle: DriveCycle) -> Result<Self> {
        if mode == 7 {
            return Err(Error::UnsupportedFixedMode(7));
        }
        let initials = fixed_test_initials(mode).ok_or(Error::UnsupportedFixedMode(mode))?;
        Ok(Self {
            kind: ScenarioKind::FixedMode(mode),
            initials,
            duration: 600.0,
            cycle: cycle.with_repeats(1),
            setpoint: 293.0,
            dt: 0.1,
            charging: false,
        })
    }

    /// Cold start at 273 K with the mode picked each step, for the length
    /// of the cycle (three repeats by default).
    pub fn dynamic(cycle: DriveCycle) -> Self {
        Self {
            kind: ScenarioKind::Dynamic,
            initials: Initials::uniform(273.0),
            duration: cycle.duration(),
            cycle,
            setpoint: 293.0,
            dt: 0.1,
            charging: false,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }
}

/// Sampled trajectory of one run. All series share `time`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub time: Vec<f64>,
    pub t_cabin: Vec<f64>,
    pub t_battery: Vec<f64>,
    pub t_dt: Vec<f64>,
    pub coolant: Vec<[f64; 7]>,
    pub mode: Vec<u8>,
    pub p_compressor: Vec<f64>,
    pub p_pump: [Vec<f64>; 4],
    /// Coolant mass flow through each pump's loop, kg/s; 0 when idle.
    pub loop_flow: [Vec<f64>; 4],
    /// Flow lost to unused branches on each pump's loop, kg/s.
    pub loop_waste: [Vec<f64>; 4],
    pub energy_in: Vec<f64>,
    pub energy_out: Vec<f64>,
    pub stored: Vec<f64>,
}

impl SimOutput {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Modes in order of activation, repeats collapsed.
    pub fn mode_trace(&self) -> Vec<u8> {
        let mut out: Vec<u8> = Vec::new();
        for &m in &self.mode {
            if out.last() != Some(&m) {
                out.push(m);
            }
        }
        out
    }

    /// Times at which the active mode changed.
    pub fn switch_times(&self) -> Vec<f64> {
        self.mode.windows(2).zip(&self.time[1..]).filter(|(w, _)| w[0] != w[1]).map(|(_, &t)| t).collect()
    }

    /// Mismatch between stored-energy change and net heat, relative to the
    /// heat throughput.
    pub fn energy_residual(&self) -> f64 {
        let (Some(e0), Some(e1)) = (self.stored.first(), self.stored.last()) else {
            return 0.0;
        };
        let q_in = *self.energy_in.last().unwrap();
        let q_out = *self.energy_out.last().unwrap();
        let throughput = q_in + q_out;
        if throughput == 0.0 {
            return (e1 - e0).abs();
        }
        ((e1 - e0) - (q_in - q_out)).abs() / throughput
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "t_s",
            "T_cabin_K",
            "T_battery_K",
            "T_dt_K",
            "mode",
            "P_comp_W",
            "P_pump1_W",
            "P_pump2_W",
            "P_pump3_W",
            "P_pump4_W",
        ])?;
        for k in 0..self.len() {
            let mut row = vec![
                format!("{:.1}", self.time[k]),
                format!("{:.6}", self.t_cabin[k]),
                format!("{:.6}", self.t_battery[k]),
                format!("{:.6}", self.t_dt[k]),
                self.mode[k].to_string(),
                format!("{:.6}", self.p_compressor[k]),
            ];
            row.extend(self.p_pump.iter().map(|s| format!("{:.6}", s[k])));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    fn record(&mut self, s: &ThermalState, p_comp: f64, w: &ModeWiring, params: &PlantParams) {
        self.time.push(s.time);
        self.t_cabin.push(s.t_cabin);
        self.t_battery.push(s.t_battery);
        self.t_dt.push(s.t_dt);
        self.coolant.push(s.coolant);
        self.mode.push(s.mode);
        self.p_compressor.push(p_comp);
        for i in 0..4 {
            let pump = i as u8 + 1;
            let l = w.loops.iter().find(|l| l.pumps.contains(&pump));
            let on = l.is_some();
            self.p_pump[i].push(if on { params.pump_power } else { 0.0 });
            let f = l.map_or(0.0, |l| l.flow_factor(params.junction_leak));
            self.loop_flow[i].push(if on { params.pump_flow * f } else { 0.0 });
            self.loop_waste[i].push(if on { params.pump_flow * (1.0 - f) } else { 0.0 });
        }
        self.energy_in.push(s.energy_in);
        self.energy_out.push(s.energy_out);
        self.stored.push(stored_energy(s, params));
    }
}

fn check(s: &ThermalState) -> Result<()> {
    for (name, t) in [("cabin", s.t_cabin), ("battery", s.t_battery), ("drive train", s.t_dt)]
        .into_iter()
        .chain(ComponentId::ALL.iter().map(|c| (c.name(), s.coolant[c.index()])))
    {
        if !(t.is_finite() && t > T_MIN && t < T_MAX) {
            return Err(Error::SimulationFault {
                time: s.time,
                detail: format!("{name} temperature {t} K left ({T_MIN}, {T_MAX})"),
            });
        }
    }
    Ok(())
}

/// Heat pump is usable only when both its exchangers sit on a loop.
fn heat_pump_wired(w: &ModeWiring) -> bool {
    w.loop_of(ComponentId::Lcc).is_some() && w.loop_of(ComponentId::Chiller).is_some()
}

/// Runs a scenario on given wiring.
pub fn simulate(wiring: &Wiring, catalog: &ModeCatalog, params: &PlantParams, sc: &Scenario) -> Result<SimOutput> {
    params.validate()?;
    if !(sc.dt > 0.0 && sc.dt.is_finite()) {
        return Err(Error::Invalid(format!("time step must be positive, got {}", sc.dt)));
    }
    let init = sc.initials;
    let mut s = ThermalState {
        time: 0.0,
        t_cabin: init.cabin,
        t_battery: init.battery,
        t_dt: init.dt,
        coolant: [init.ambient; 7],
        integral: 0.0,
        mode: 0,
        mode_since: 0.0,
        energy_in: 0.0,
        energy_out: 0.0,
    };
    s.coolant[ComponentId::CabinHX.index()] = init.cabin;
    s.coolant[ComponentId::BatteryHX.index()] = init.battery;
    s.coolant[ComponentId::DriveTrain.index()] = init.dt;

    let pick = |s: &ThermalState| -> Result<u8> {
        match sc.kind {
            ScenarioKind::FixedMode(m) => Ok(m),
            ScenarioKind::Dynamic => match select_mode(s, init.ambient, catalog, params, sc.charging) {
                0 => Err(Error::Invariant("no catalog mode fits the season".into())),
                m => Ok(m),
            },
        }
    };
    s.mode = pick(&s)?;
    let first = wiring.mode(s.mode)?;
    mix_loops(&mut s, first);
    check(&s)?;

    let loads = |t: f64| heat_loads(&sc.cycle, t, params, sc.charging);
    let steps = (sc.duration / sc.dt).round() as usize;
    let mut out = SimOutput::default();
    for k in 0..=steps {
        let m = pick(&s)?;
        if m != s.mode {
            s.mode = m;
            s.mode_since = s.time;
            mix_loops(&mut s, wiring.mode(m)?);
        }
        let w = wiring.mode(s.mode)?;
        let mode = catalog.mode(s.mode)?;
        let err = if heat_pump_wired(w) { control_error(mode, &s, sc.setpoint, params) } else { None };
        let (p_comp, integral) = pi_update(err, s.integral, sc.dt, params);
        out.record(&s, p_comp, w, params);
        if k == steps {
            break;
        }
        let inputs = StepInputs { ambient: init.ambient, p_compressor: p_comp, loads: &loads };
        let mut next = step(&s, sc.dt, w, params, &inputs);
        next.integral = integral;
        // Keep the grid exact rather than accumulating rounding.
        next.time = (k + 1) as f64 * sc.dt;
        check(&next)?;
        s = next;
    }
    Ok(out)
}

fn wiring_for(d: &DirectedArch, catalog: &ModeCatalog) -> Result<Wiring> {
    let report = assess_all(d, catalog)?;
    Ok(Wiring::from_directed(d, &report))
}

/// Fixed-mode test of one architecture from the tabulated start.
pub fn run_fixed_test(
    d: &DirectedArch,
    mode_id: u8,
    catalog: &ModeCatalog,
    params: &PlantParams,
    cycle: &DriveCycle,
) -> Result<SimOutput> {
    let sc = Scenario::fixed(mode_id, cycle.clone())?;
    let wiring = wiring_for(d, catalog)?;
    wiring.mode(mode_id)?;
    simulate(&wiring, catalog, params, &sc)
}

/// Cold-start drive with automatic mode selection.
pub fn run_dynamic_test(
    d: &DirectedArch,
    catalog: &ModeCatalog,
    params: &PlantParams,
    cycle: &DriveCycle,
) -> Result<SimOutput> {
    let wiring = wiring_for(d, catalog)?;
    simulate(&wiring, catalog, params, &Scenario::dynamic(cycle.clone()))
}
