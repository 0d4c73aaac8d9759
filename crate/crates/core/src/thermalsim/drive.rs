use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::PlantParams;
use crate::{Error, Result};

/// Bundled synthetic aggressive cycle: 600 s, peaks at 35 m/s.
const BUNDLED: &str = include_str!("../../data/aggressive_cycle.csv");

/// Speed trace sampled at increasing times from zero, played `repeats`
/// times back to back. Between samples speed is interpolated linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveCycle {
    pub t: Vec<f64>,
    pub speed: Vec<f64>,
    pub repeats: u32,
}

#[derive(Deserialize)]
struct Row {
    t_s: f64,
    speed_mps: f64,
}

impl DriveCycle {
    pub fn new(t: Vec<f64>, speed: Vec<f64>, repeats: u32) -> Result<Self> {
        if t.len() != speed.len() || t.len() < 2 {
            return Err(Error::Invalid("drive cycle needs at least two samples".into()));
        }
        if t[0] != 0.0 {
            return Err(Error::Invalid("drive cycle must start at t = 0".into()));
        }
        if t.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::Invalid("drive cycle times must increase strictly".into()));
        }
        if speed.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Invalid("drive cycle speeds must be non-negative".into()));
        }
        if repeats == 0 {
            return Err(Error::Invalid("drive cycle repeat count must be at least 1".into()));
        }
        Ok(Self { t, speed, repeats })
    }

    /// Reads a `t_s,speed_mps` CSV.
    pub fn from_reader(r: impl Read, repeats: u32) -> Result<Self> {
        let mut t = Vec::new();
        let mut speed = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize() {
            let row: Row = row?;
            t.push(row.t_s);
            speed.push(row.speed_mps);
        }
        Self::new(t, speed, repeats)
    }

    pub fn load(path: &Path, repeats: u32) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?, repeats)
    }

    pub fn bundled(repeats: u32) -> Self {
        Self::from_reader(BUNDLED.as_bytes(), repeats).expect("bundled cycle parses")
    }

    pub fn period(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        self.period() * f64::from(self.repeats)
    }

    pub fn with_repeats(mut self, repeats: u32) -> Self {
        self.repeats = repeats.max(1);
        self
    }

    /// Speed at `time`, wrapping once per period. Past the last repeat the
    /// final sample holds.
    pub fn speed_at(&self, time: f64) -> f64 {
        let period = self.period();
        if time >= self.duration() {
            return *self.speed.last().unwrap();
        }
        let local = if time <= 0.0 { 0.0 } else { time % period };
        let i = self.t.partition_point(|&x| x <= local);
        if i >= self.t.len() {
            return *self.speed.last().unwrap();
        }
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let (v0, v1) = (self.speed[i - 1], self.speed[i]);
        v0 + (v1 - v0) * (local - t0) / (t1 - t0)
    }
}

/// Battery and drive-train heat generation, W. While charging the battery
/// produces the constant charging heat and the drive train nothing.
pub fn heat_loads(cycle: &DriveCycle, t: f64, params: &PlantParams, charging: bool) -> (f64, f64) {
    if charging {
        return (params.charging_heat, 0.0);
    }
    let v = cycle.speed_at(t);
    (params.battery_heat_coeff * v * v, params.dt_heat_coeff * v * v)
}
