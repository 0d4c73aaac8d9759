use super::{PlantParams, ThermalState};
use crate::domain::{AmbientBand, Demand, ModeCatalog, OperatingMode, Season};

const KELVIN: f64 = 273.15;

/// Season implied by the ambient temperature, or charging.
pub fn season(ambient: f64, charging: bool) -> Season {
    if charging {
        Season::Charging
    } else if AmbientBand::of_celsius(ambient - KELVIN) == AmbientBand::Below20C {
        Season::Winter
    } else {
        Season::Summer
    }
}

fn band_distance(m: &OperatingMode, s: &ThermalState) -> f64 {
    m.thresholds.battery.distance(s.t_battery - KELVIN) + m.thresholds.dt.distance(s.t_dt - KELVIN)
}

fn within(m: &OperatingMode, s: &ThermalState, margin: f64) -> bool {
    m.thresholds.battery.widened(margin).contains(s.t_battery - KELVIN)
        && m.thresholds.dt.widened(margin).contains(s.t_dt - KELVIN)
}

/// Mode for the current state. The season picks the candidate modes and
/// the battery and drive-train bands pick among them. The active mode is
/// kept while the dwell time runs or while the state stays inside its bands
/// grown by the hysteresis; otherwise the closest mode wins, lowest id on
/// ties. Returns 0 when no mode belongs to the season.
pub fn select_mode(s: &ThermalState, ambient: f64, catalog: &ModeCatalog, params: &PlantParams, charging: bool) -> u8 {
    let season = season(ambient, charging);
    let candidates: Vec<&OperatingMode> = catalog.modes.iter().filter(|m| m.season == season).collect();
    if let Some(cur) = candidates.iter().find(|m| m.id == s.mode) {
        if s.time - s.mode_since < params.dwell_time || within(cur, s, params.hysteresis) {
            return cur.id;
        }
    }
    let mut best: Option<(f64, u8)> = None;
    for m in candidates {
        let d = band_distance(m, s);
        if best.is_none_or(|(bd, bid)| d < bd || (d == bd && m.id < bid)) {
            best = Some((d, m.id));
        }
    }
    best.map_or(0, |(_, id)| id)
}

/// Temperature error the compressor acts on: the largest error among the
/// actively conditioned components, positive when more duty is needed.
/// `None` when the mode conditions nothing actively.
pub fn control_error(m: &OperatingMode, s: &ThermalState, setpoint: f64, params: &PlantParams) -> Option<f64> {
    let mut errors = Vec::new();
    match m.cabin {
        Demand::HeatActive => errors.push(setpoint - s.t_cabin),
        Demand::CoolActive => errors.push(s.t_cabin - setpoint),
        _ => {}
    }
    match m.battery {
        Demand::HeatActive => errors.push(params.battery_heat_target - s.t_battery),
        Demand::CoolActive => errors.push(s.t_battery - params.battery_cool_target),
        _ => {}
    }
    errors.into_iter().reduce(f64::max)
}

/// PI law with conditional integration: the integrator only moves when the
/// output is unsaturated or the error pulls it back out of saturation.
/// Returns the clamped compressor power and the new integrator value.
pub fn pi_update(error: Option<f64>, integral: f64, dt: f64, params: &PlantParams) -> (f64, f64) {
    let Some(e) = error else {
        return (0.0, integral);
    };
    let u = params.kp * e + params.ki * integral;
    let p = u.clamp(0.0, params.p_max_compressor);
    let unwinds = (u > params.p_max_compressor && e < 0.0) || (u < 0.0 && e > 0.0);
    let integral = if u == p || unwinds { integral + e * dt } else { integral };
    (p, integral)
}
