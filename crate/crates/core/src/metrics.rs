//! Run metrics, the complexity factor and the Pareto front.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::preprocess::{DirectedArch, NodeLabel};
use crate::thermalsim::SimOutput;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    #[serde(rename = "dT_cabin")]
    pub delta_t_cabin: f64,
    #[serde(rename = "dT_battery")]
    pub delta_t_battery: f64,
    #[serde(rename = "total_energy_J")]
    pub total_energy: f64,
    #[serde(rename = "heat_time_s")]
    pub heat_time: Option<f64>,
    #[serde(rename = "comfort_K")]
    pub comfort_temperature: f64,
}

impl RunMetrics {
    pub fn compute(out: &SimOutput, setpoint: f64) -> Result<Self> {
        let cabin0 = *out.t_cabin.first().ok_or_else(empty)?;
        let comfort = comfort_temperature(setpoint, cabin0);
        Ok(Self {
            delta_t_cabin: delta_t_cabin(out)?,
            delta_t_battery: delta_t_battery(out)?,
            total_energy: total_energy(out)?,
            heat_time: heat_time(out, comfort),
            comfort_temperature: comfort,
        })
    }
}

fn empty() -> Error {
    Error::Metric("empty series".into())
}

fn delta(series: &[f64]) -> Result<f64> {
    match (series.first(), series.last()) {
        (Some(a), Some(b)) => Ok(b - a),
        _ => Err(empty()),
    }
}

/// Final minus initial cabin temperature, K.
pub fn delta_t_cabin(out: &SimOutput) -> Result<f64> {
    delta(&out.t_cabin)
}

pub fn delta_t_battery(out: &SimOutput) -> Result<f64> {
    delta(&out.t_battery)
}

/// Trapezoidal integral of `values` over `time`.
pub fn trapezoid(time: &[f64], values: &[f64]) -> Result<f64> {
    if time.len() != values.len() {
        return Err(Error::Metric(format!(
            "series length {} does not match time grid length {}",
            values.len(),
            time.len()
        )));
    }
    Ok(time.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum())
}

fn check_uniform(time: &[f64]) -> Result<()> {
    let Some(h) = time.get(1).map(|t1| t1 - time[0]) else {
        return Ok(());
    };
    let tol = 1e-9 * h.abs().max(time.last().unwrap().abs());
    if h <= 0.0 || time.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > tol) {
        return Err(Error::Metric("power series are not on a uniform time grid".into()));
    }
    Ok(())
}

/// Energy drawn by the compressor and the four pumps, J.
pub fn total_energy(out: &SimOutput) -> Result<f64> {
    check_uniform(&out.time)?;
    let mut e = trapezoid(&out.time, &out.p_compressor)?;
    for p in &out.p_pump {
        e += trapezoid(&out.time, p)?;
    }
    Ok(e)
}

/// Cabin temperature at 90% of the way from the start to the setpoint.
pub fn comfort_temperature(setpoint: f64, initial: f64) -> f64 {
    0.9 * (setpoint - initial) + initial
}

/// First time the series rises above `threshold`, interpolated between
/// the bracketing samples.
pub fn first_crossing(time: &[f64], temp: &[f64], threshold: f64) -> Option<f64> {
    if *temp.first()? > threshold {
        return Some(time[0]);
    }
    let k = temp.iter().position(|&t| t > threshold)?;
    let (t0, t1) = (time[k - 1], time[k]);
    let (y0, y1) = (temp[k - 1], temp[k]);
    Some(t0 + (t1 - t0) * (threshold - y0) / (y1 - y0))
}

/// Time for the cabin to pass `comfort`, or `None` if it never does.
pub fn heat_time(out: &SimOutput, comfort: f64) -> Option<f64> {
    first_crossing(&out.time, &out.t_cabin, comfort)
}

/// Valves plus T- and cross-junctions.
pub fn complexity_factor(d: &DirectedArch) -> usize {
    d.count(|l| matches!(l, NodeLabel::Valve(_) | NodeLabel::TJunction | NodeLabel::CrossJunction))
}

/// Energy and heat time, each normalized by its maximum, summed.
pub fn performance_objective(points: &[(f64, Option<f64>)]) -> Result<Vec<f64>> {
    let missing: Vec<usize> = points.iter().enumerate().filter(|(_, (_, h))| h.is_none()).map(|(i, _)| i).collect();
    if !missing.is_empty() {
        return Err(Error::Metric(format!("no heat time for entries {missing:?}")));
    }
    let e_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let h_max = points.iter().map(|p| p.1.unwrap()).fold(f64::NEG_INFINITY, f64::max);
    if !(e_max > 0.0 && h_max > 0.0) {
        return Err(Error::Metric(format!("normalizers must be positive, got energy {e_max} and heat time {h_max}")));
    }
    Ok(points.iter().map(|&(e, h)| e / e_max + h.unwrap() / h_max).collect())
}

/// Non-dominated flags for minimization of both coordinates. Equal points
/// share membership.
pub fn pareto_front(points: &[(f64, f64)]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].partial_cmp(&points[b]).expect("finite coordinates"));
    let mut member = vec![false; points.len()];
    // Lowest y among points with strictly smaller x.
    let mut best = f64::INFINITY;
    let mut i = 0;
    while i < order.len() {
        let x = points[order[i]].0;
        let mut j = i;
        while j < order.len() && points[order[j]].0 == x {
            j += 1;
        }
        let group_min = points[order[i]].1;
        for &k in &order[i..j] {
            let y = points[k].1;
            member[k] = best > y && y <= group_min;
        }
        best = best.min(group_min);
        i = j;
    }
    member
}

fn dominates(q: (f64, f64), p: (f64, f64)) -> bool {
    q.0 <= p.0 && q.1 <= p.1 && (q.0 < p.0 || q.1 < p.1)
}

/// Members are mutually non-dominated and every other point is dominated
/// by a member.
pub fn check_front(points: &[(f64, f64)], member: &[bool]) -> Result<()> {
    let members: Vec<(f64, f64)> = points.iter().zip(member).filter(|(_, &m)| m).map(|(p, _)| *p).collect();
    for (i, (&p, &m)) in points.iter().zip(member).enumerate() {
        let covered = members.iter().any(|&q| dominates(q, p));
        if m == covered {
            return Err(Error::Metric(format!("front membership of point {i} is inconsistent")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreInput {
    pub id: String,
    pub complexity: usize,
    pub total_energy: f64,
    pub heat_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchScore {
    pub id: String,
    pub complexity: usize,
    /// Absent when the architecture never reached comfort.
    pub performance: Option<f64>,
    pub pareto_member: bool,
}

/// Scores architectures. Those without a heat time are kept, unscored and
/// off the front.
pub fn score(inputs: &[ScoreInput]) -> Result<Vec<ArchScore>> {
    let ranked: Vec<&ScoreInput> = inputs.iter().filter(|s| s.heat_time.is_some()).collect();
    let perf = if ranked.is_empty() {
        Vec::new()
    } else {
        performance_objective(&ranked.iter().map(|s| (s.total_energy, s.heat_time)).collect::<Vec<_>>())?
    };
    let points: Vec<(f64, f64)> = ranked.iter().zip(&perf).map(|(s, &p)| (s.complexity as f64, p)).collect();
    let front = pareto_front(&points);
    check_front(&points, &front)?;
    let by_id: BTreeMap<&str, (f64, bool)> =
        ranked.iter().zip(perf.iter().zip(&front)).map(|(s, (&p, &f))| (s.id.as_str(), (p, f))).collect();
    Ok(inputs
        .iter()
        .map(|s| {
            let hit = by_id.get(s.id.as_str());
            ArchScore {
                id: s.id.clone(),
                complexity: s.complexity,
                performance: hit.map(|h| h.0),
                pareto_member: hit.is_some_and(|h| h.1),
            }
        })
        .collect())
}

/// Per-architecture metrics file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchMetrics {
    pub id: String,
    /// Keyed by mode id.
    pub fixed: BTreeMap<String, RunMetrics>,
    pub dynamic: Option<RunMetrics>,
    pub complexity: usize,
    #[serde(default)]
    pub performance: Option<f64>,
    #[serde(default)]
    pub pareto: Option<bool>,
}
