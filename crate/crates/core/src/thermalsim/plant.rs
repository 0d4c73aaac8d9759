use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{PlantParams, ThermalState};
use crate::assess::{AssessmentReport, Loop};
use crate::domain::{constraint_graph, transfer_groups, ComponentId, ModeCatalog};
use crate::preprocess::{DirectedArch, NodeLabel, PUMP_SITES};
use crate::{Error, Result};

/// What the plant needs to know about one coolant loop in one mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopWiring {
    pub group_index: usize,
    pub components: BTreeSet<ComponentId>,
    pub pumps: BTreeSet<u8>,
    pub open_valves: usize,
    /// Junctions on the loop with at least one branch the loop does not use.
    pub unused_junctions: usize,
}

impl LoopWiring {
    /// Share of nominal flow left after every unused branch bled off its leak.
    pub fn flow_factor(&self, leak: f64) -> f64 {
        (1.0 - leak).powi(self.unused_junctions as i32)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeWiring {
    pub mode_id: u8,
    pub loops: Vec<LoopWiring>,
}

impl ModeWiring {
    pub fn loop_of(&self, c: ComponentId) -> Option<&LoopWiring> {
        self.loops.iter().find(|l| l.components.contains(&c))
    }

    pub fn active_pumps(&self) -> BTreeSet<u8> {
        self.loops.iter().flat_map(|l| l.pumps.iter().copied()).collect()
    }
}

/// Per-mode wiring of one architecture.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Wiring {
    pub modes: BTreeMap<u8, ModeWiring>,
}

impl Wiring {
    /// Wiring of every mode that passed assessment.
    pub fn from_directed(d: &DirectedArch, report: &AssessmentReport) -> Self {
        let modes = report.loops.iter().map(|(&m, loops)| (m, loop_topology(d, m, loops))).collect();
        Self { modes }
    }

    /// Leak-free wiring straight from the catalog: one loop per transfer
    /// group, each pump counted where its site component sits.
    pub fn ideal(catalog: &ModeCatalog) -> Self {
        let modes = catalog
            .modes
            .iter()
            .map(|m| {
                let loops = transfer_groups(&constraint_graph(m))
                    .into_iter()
                    .map(|g| LoopWiring {
                        group_index: g.index,
                        pumps: PUMP_SITES
                            .iter()
                            .filter(|(_, c, _)| g.components.contains(c))
                            .map(|(p, _, _)| *p)
                            .collect(),
                        components: g.components,
                        open_valves: 0,
                        unused_junctions: 0,
                    })
                    .collect();
                (m.id, ModeWiring { mode_id: m.id, loops })
            })
            .collect();
        Self { modes }
    }

    pub fn mode(&self, id: u8) -> Result<&ModeWiring> {
        self.modes.get(&id).ok_or_else(|| Error::Invariant(format!("no coolant wiring for mode {id}")))
    }
}

/// Reads the loops of one mode off the directed architecture.
pub fn loop_topology(d: &DirectedArch, mode_id: u8, loops: &[Loop]) -> ModeWiring {
    let loops = loops
        .iter()
        .map(|l| {
            let mut components = BTreeSet::new();
            let mut pumps = BTreeSet::new();
            let mut open_valves = 0;
            let mut unused_junctions = 0;
            for &n in &l.node_ids {
                match d.label(n) {
                    Some(NodeLabel::Component(c)) => {
                        components.insert(c);
                    }
                    Some(NodeLabel::Pump(p)) => {
                        pumps.insert(p);
                    }
                    Some(NodeLabel::Valve(_)) => open_valves += 1,
                    Some(label) if label.is_junction() => {
                        let spare = d.in_arcs(n).chain(d.out_arcs(n)).any(|a| !l.arc_ids.contains(&a.id));
                        if spare {
                            unused_junctions += 1;
                        }
                    }
                    _ => {}
                }
            }
            LoopWiring { group_index: l.group_index, components, pumps, open_valves, unused_junctions }
        })
        .collect();
    ModeWiring { mode_id, loops }
}

/// Exogenous inputs held or sampled during one step.
pub struct StepInputs<'a> {
    pub ambient: f64,
    pub p_compressor: f64,
    /// Battery and drive-train heat at a given time.
    pub loads: &'a dyn Fn(f64) -> (f64, f64),
}

/// Heat pump duties (chiller extraction, LCC rejection) for compressor power
/// `p` with loop temperatures `t_lcc` and `t_ch`. The refrigerant runs
/// `duty/G` beyond each loop temperature, which feeds back into the lift.
pub fn heat_pump(params: &PlantParams, p: f64, t_lcc: f64, t_ch: f64, g_lcc: f64, g_ch: f64) -> (f64, f64) {
    if p <= 0.0 {
        return (0.0, 0.0);
    }
    let b = params.cop_slope;
    let raw = (params.cop_intercept - b * (t_lcc - t_ch) - b * p / g_lcc) / (1.0 + b * p * (1.0 / g_lcc + 1.0 / g_ch));
    let cop = raw.clamp(params.cop_min, params.cop_max);
    (cop * p, (1.0 + cop) * p)
}

const N: usize = 12;
const IN: usize = 10;
const OUT: usize = 11;

fn pack(s: &ThermalState) -> [f64; N] {
    let mut y = [0.0; N];
    y[0] = s.t_cabin;
    y[1] = s.t_battery;
    y[2] = s.t_dt;
    y[3..10].copy_from_slice(&s.coolant);
    y[IN] = s.energy_in;
    y[OUT] = s.energy_out;
    y
}

fn unpack(y: &[f64; N], s: &mut ThermalState) {
    s.t_cabin = y[0];
    s.t_battery = y[1];
    s.t_dt = y[2];
    s.coolant.copy_from_slice(&y[3..10]);
    s.energy_in = y[IN];
    s.energy_out = y[OUT];
}

fn ua(params: &PlantParams, c: ComponentId) -> f64 {
    match c {
        ComponentId::Chiller => params.ua_chiller,
        ComponentId::Lcc => params.ua_lcc,
        ComponentId::CabinHX => params.ua_cabin_hx,
        ComponentId::BatteryHX => params.ua_battery_hx,
        ComponentId::DriveTrain => params.ua_dt,
        ComponentId::Radiator1 => params.ua_radiator1,
        ComponentId::Radiator2 => params.ua_radiator2,
    }
}

fn derivative(y: &[f64; N], t: f64, w: &ModeWiring, params: &PlantParams, inp: &StepInputs) -> [f64; N] {
    let mut dy = [0.0; N];
    let mut heat_in = 0.0;
    let mut heat_out = 0.0;
    let book = |q: f64, heat_in: &mut f64, heat_out: &mut f64| {
        *heat_in += q.max(0.0);
        *heat_out += (-q).max(0.0);
    };
    let seg = |c: ComponentId| y[3 + c.index()];
    let loop_temp = |l: &LoopWiring| l.components.iter().map(|&c| seg(c)).sum::<f64>() / l.components.len() as f64;

    let (q_bat, q_dt) = (inp.loads)(t);
    let mut q_cabin = params.cabin_envelope_ua * (inp.ambient - y[0]);
    book(q_cabin, &mut heat_in, &mut heat_out);
    q_cabin += params.passenger_load;
    heat_in += params.passenger_load;
    let mut q_battery = q_bat;
    let mut q_drive = q_dt;
    heat_in += q_bat + q_dt;

    let (mut q_ch, mut q_lcc) = (0.0, 0.0);
    if let (Some(lc), Some(lh)) = (w.loop_of(ComponentId::Lcc), w.loop_of(ComponentId::Chiller)) {
        let g_lcc = params.conductance(params.ua_lcc, lc.flow_factor(params.junction_leak));
        let g_ch = params.conductance(params.ua_chiller, lh.flow_factor(params.junction_leak));
        (q_ch, q_lcc) = heat_pump(params, inp.p_compressor, loop_temp(lc), loop_temp(lh), g_lcc, g_ch);
        if q_lcc > 0.0 {
            heat_in += inp.p_compressor;
        }
    }

    for l in &w.loops {
        let t_loop = loop_temp(l);
        let f = l.flow_factor(params.junction_leak);
        let mut q_loop = 0.0;
        for &c in &l.components {
            let g = params.conductance(ua(params, c), f);
            match c {
                ComponentId::CabinHX => {
                    let q = g * (t_loop - y[0]);
                    q_loop -= q;
                    q_cabin += q;
                }
                ComponentId::BatteryHX => {
                    let q = g * (t_loop - y[1]);
                    q_loop -= q;
                    q_battery += q;
                }
                ComponentId::DriveTrain => {
                    let q = g * (t_loop - y[2]);
                    q_loop -= q;
                    q_drive += q;
                }
                ComponentId::Radiator1 | ComponentId::Radiator2 => {
                    let q = g * (inp.ambient - t_loop);
                    book(q, &mut heat_in, &mut heat_out);
                    q_loop += q;
                }
                ComponentId::Chiller => q_loop -= q_ch,
                ComponentId::Lcc => q_loop += q_lcc,
            }
        }
        let rate = q_loop / (params.c_coolant_segment * l.components.len() as f64);
        for &c in &l.components {
            dy[3 + c.index()] = rate;
        }
    }
    dy[0] = q_cabin / params.c_cabin;
    dy[1] = q_battery / params.c_battery;
    dy[2] = q_drive / params.c_dt;
    dy[IN] = heat_in;
    dy[OUT] = heat_out;
    dy
}

fn axpy(y: &[f64; N], k: &[f64; N], h: f64) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// One fourth-order Runge-Kutta step of length `dt`. Compressor power is
/// held over the step; heat loads are sampled at the stage times.
pub fn step(s: &ThermalState, dt: f64, w: &ModeWiring, params: &PlantParams, inp: &StepInputs) -> ThermalState {
    let y = pack(s);
    let t = s.time;
    let k1 = derivative(&y, t, w, params, inp);
    let k2 = derivative(&axpy(&y, &k1, dt / 2.0), t + dt / 2.0, w, params, inp);
    let k3 = derivative(&axpy(&y, &k2, dt / 2.0), t + dt / 2.0, w, params, inp);
    let k4 = derivative(&axpy(&y, &k3, dt), t + dt, w, params, inp);
    let y1: [f64; N] = std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    let mut out = s.clone();
    unpack(&y1, &mut out);
    out.time = t + dt;
    out
}

/// Evens out each loop's coolant, as happens when valves switch and the
/// pumps circulate a freshly joined loop.
pub fn mix_loops(s: &mut ThermalState, w: &ModeWiring) {
    for l in &w.loops {
        let mean = l.components.iter().map(|c| s.coolant[c.index()]).sum::<f64>() / l.components.len() as f64;
        for c in &l.components {
            s.coolant[c.index()] = mean;
        }
    }
}

/// Thermal energy held by the components and the coolant, J, against 0 K.
pub fn stored_energy(s: &ThermalState, params: &PlantParams) -> f64 {
    params.c_cabin * s.t_cabin
        + params.c_battery * s.t_battery
        + params.c_dt * s.t_dt
        + params.c_coolant_segment * s.coolant.iter().sum::<f64>()
}
