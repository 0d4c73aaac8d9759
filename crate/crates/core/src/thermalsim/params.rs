use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Every plant, heat pump and controller constant of the simulator. None of
/// these are measured values; defaults are calibrated so the protocol-level
/// behaviour (mode order on a cold start, comfort within the run) holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    /// J/K
    pub c_cabin: f64,
    pub c_battery: f64,
    pub c_dt: f64,
    /// Coolant capacitance attached to each component passage, J/K.
    pub c_coolant_segment: f64,

    /// W/K at nominal flow
    pub ua_cabin_hx: f64,
    pub ua_battery_hx: f64,
    pub ua_dt: f64,
    pub ua_radiator1: f64,
    pub ua_radiator2: f64,
    pub ua_chiller: f64,
    pub ua_lcc: f64,

    pub p_max_compressor: f64,
    /// Cooling COP = intercept - slope * lift, lift in K between condensing
    /// and evaporating temperature, clamped to `[cop_min, cop_max]`.
    pub cop_intercept: f64,
    pub cop_slope: f64,
    pub cop_min: f64,
    pub cop_max: f64,

    /// kg/s per loop
    pub pump_flow: f64,
    /// J/(kg K)
    pub coolant_cp: f64,
    pub pump_power: f64,
    /// Share of flow lost at every junction branch left unused in a mode.
    pub junction_leak: f64,

    pub passenger_load: f64,
    /// Cabin envelope conductance to ambient, W/K.
    pub cabin_envelope_ua: f64,
    /// W per (m/s)^2
    pub battery_heat_coeff: f64,
    pub dt_heat_coeff: f64,
    pub charging_heat: f64,

    pub kp: f64,
    pub ki: f64,
    /// Battery temperature the heat pump heats towards, K.
    pub battery_heat_target: f64,
    /// Battery temperature the heat pump cools towards, K.
    pub battery_cool_target: f64,
    pub dwell_time: f64,
    pub hysteresis: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            c_cabin: 7.0e4,
            c_battery: 2.5e5,
            c_dt: 6.0e4,
            c_coolant_segment: 8.0e3,
            ua_cabin_hx: 400.0,
            ua_battery_hx: 300.0,
            ua_dt: 200.0,
            ua_radiator1: 800.0,
            ua_radiator2: 600.0,
            ua_chiller: 1500.0,
            ua_lcc: 1500.0,
            p_max_compressor: 6000.0,
            cop_intercept: 4.4,
            cop_slope: 0.06,
            cop_min: 0.5,
            cop_max: 5.0,
            pump_flow: 0.2,
            coolant_cp: 3600.0,
            pump_power: 40.0,
            junction_leak: 0.02,
            passenger_load: 200.0,
            cabin_envelope_ua: 120.0,
            battery_heat_coeff: 0.8,
            dt_heat_coeff: 6.0,
            charging_heat: 2000.0,
            kp: 600.0,
            ki: 4.0,
            battery_heat_target: 288.15,
            battery_cool_target: 308.15,
            dwell_time: 30.0,
            hysteresis: 1.0,
        }
    }
}

impl PlantParams {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_cabin", self.c_cabin),
            ("c_battery", self.c_battery),
            ("c_dt", self.c_dt),
            ("c_coolant_segment", self.c_coolant_segment),
            ("ua_cabin_hx", self.ua_cabin_hx),
            ("ua_battery_hx", self.ua_battery_hx),
            ("ua_dt", self.ua_dt),
            ("ua_radiator1", self.ua_radiator1),
            ("ua_radiator2", self.ua_radiator2),
            ("ua_chiller", self.ua_chiller),
            ("ua_lcc", self.ua_lcc),
            ("p_max_compressor", self.p_max_compressor),
            ("cop_min", self.cop_min),
            ("pump_flow", self.pump_flow),
            ("coolant_cp", self.coolant_cp),
            ("pump_power", self.pump_power),
            ("cabin_envelope_ua", self.cabin_envelope_ua),
            ("battery_heat_coeff", self.battery_heat_coeff),
            ("dt_heat_coeff", self.dt_heat_coeff),
            ("charging_heat", self.charging_heat),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("passenger_load", self.passenger_load),
            ("kp", self.kp),
            ("ki", self.ki),
            ("cop_slope", self.cop_slope),
            ("dwell_time", self.dwell_time),
            ("hysteresis", self.hysteresis),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(0.0..0.5).contains(&self.junction_leak) {
            return Err(Error::Invalid(format!("junction_leak must lie in [0, 0.5), got {}", self.junction_leak)));
        }
        if self.cop_max < self.cop_min {
            return Err(Error::Invalid("cop_max below cop_min".into()));
        }
        Ok(())
    }

    /// Heat exchanger conductance at `flow_factor` times nominal flow, from
    /// the effectiveness of a passage against a well-mixed coolant stream.
    pub fn conductance(&self, ua: f64, flow_factor: f64) -> f64 {
        let rate = self.pump_flow * self.coolant_cp * flow_factor;
        rate * (1.0 - (-ua / rate).exp())
    }

    /// Cooling COP for a given lift.
    pub fn cop(&self, lift: f64) -> f64 {
        (self.cop_intercept - self.cop_slope * lift).clamp(self.cop_min, self.cop_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_valid_and_round_trip() {
        let p = PlantParams::default();
        p.validate().unwrap();
        assert_eq!(PlantParams::from_json(&p.to_json().unwrap()).unwrap(), p);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let p = PlantParams::from_json(r#"{"junction_leak": 0.0}"#).unwrap();
        assert_eq!(p.junction_leak, 0.0);
        assert_eq!(p.c_cabin, PlantParams::default().c_cabin);
        assert!(PlantParams::from_json(r#"{"no_such_field": 1}"#).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        for text in [r#"{"junction_leak": 0.5}"#, r#"{"c_cabin": 0}"#, r#"{"kp": -1}"#] {
            assert!(PlantParams::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn conductance_grows_with_flow() {
        let p = PlantParams::default();
        let full = p.conductance(400.0, 1.0);
        assert!(full < 400.0);
        assert!(p.conductance(400.0, 0.9) < full);
        assert_eq!(p.conductance(400.0, 1.0), full);
    }
}
