//! Components, operating modes, constraint graphs and the architecture graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One of the seven main thermal components.
///
/// The declaration order doubles as the node id of the component in every
/// freshly initialised [`ArchGraph`] and as its color for isomorphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentId {
    Chiller,
    #[serde(rename = "LCC")]
    Lcc,
    CabinHX,
    BatteryHX,
    DriveTrain,
    Radiator1,
    Radiator2,
}

impl ComponentId {
    pub const ALL: [ComponentId; 7] = [
        ComponentId::Chiller,
        ComponentId::Lcc,
        ComponentId::CabinHX,
        ComponentId::BatteryHX,
        ComponentId::DriveTrain,
        ComponentId::Radiator1,
        ComponentId::Radiator2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentId::Chiller => "Chiller",
            ComponentId::Lcc => "LCC",
            ComponentId::CabinHX => "CabinHX",
            ComponentId::BatteryHX => "BatteryHX",
            ComponentId::DriveTrain => "DriveTrain",
            ComponentId::Radiator1 => "Radiator1",
            ComponentId::Radiator2 => "Radiator2",
        }
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A required heat transfer `from -> to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransferEdge {
    pub from: ComponentId,
    pub to: ComponentId,
}

impl TransferEdge {
    pub fn new(from: ComponentId, to: ComponentId) -> Self {
        debug_assert_ne!(from, to);
        Self { from, to }
    }

    pub fn touches(&self, c: ComponentId) -> bool {
        self.from == c || self.to == c
    }
}

impl fmt::Display for TransferEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Winter,
    Charging,
    Summer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbientBand {
    Below20C,
    Above20C,
}

impl AmbientBand {
    pub fn of_celsius(t: f64) -> Self {
        if t < 20.0 {
            AmbientBand::Below20C
        } else {
            AmbientBand::Above20C
        }
    }
}

/// Thermal demand placed on a component by a mode (active = heat pump,
/// passive = radiator or waste-heat recovery).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demand {
    HeatActive,
    HeatPassive,
    CoolActive,
    CoolPassive,
    Neutral,
    Off,
}

/// Half-open temperature band `[min_c, max_c)` in °C; a missing bound is
/// unbounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TempBand {
    pub min_c: Option<f64>,
    pub max_c: Option<f64>,
}

impl TempBand {
    pub const ANY: TempBand = TempBand { min_c: None, max_c: None };

    pub fn below(max_c: f64) -> Self {
        Self { min_c: None, max_c: Some(max_c) }
    }

    pub fn above(min_c: f64) -> Self {
        Self { min_c: Some(min_c), max_c: None }
    }

    pub fn between(min_c: f64, max_c: f64) -> Self {
        Self { min_c: Some(min_c), max_c: Some(max_c) }
    }

    pub fn contains(&self, t_c: f64) -> bool {
        self.min_c.is_none_or(|lo| t_c >= lo) && self.max_c.is_none_or(|hi| t_c < hi)
    }

    /// Band grown by `margin` on both finite sides.
    pub fn widened(&self, margin: f64) -> Self {
        Self { min_c: self.min_c.map(|lo| lo - margin), max_c: self.max_c.map(|hi| hi + margin) }
    }

    /// Distance from `t_c` to the band, zero inside.
    pub fn distance(&self, t_c: f64) -> f64 {
        if let Some(lo) = self.min_c {
            if t_c < lo {
                return lo - t_c;
            }
        }
        if let Some(hi) = self.max_c {
            if t_c >= hi {
                return t_c - hi;
            }
        }
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeThresholds {
    pub cabin: TempBand,
    pub battery: TempBand,
    /// Bound on the lumped drivetrain temperature.
    pub dt: TempBand,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingMode {
    pub id: u8,
    pub season: Season,
    pub ambient: AmbientBand,
    pub cabin: Demand,
    pub battery: Demand,
    pub dt: Demand,
    pub transfers: Vec<TransferEdge>,
    pub thresholds: ModeThresholds,
}

impl OperatingMode {
    pub fn validate(&self) -> Result<()> {
        if self.transfers.is_empty() {
            return Err(Error::Invalid(format!("mode {} has no transfers", self.id)));
        }
        let mut seen = BTreeSet::new();
        for t in &self.transfers {
            if t.from == t.to {
                return Err(Error::Invalid(format!("mode {}: self transfer {t}", self.id)));
            }
            if !seen.insert(*t) {
                return Err(Error::Invalid(format!("mode {}: duplicate transfer {t}", self.id)));
            }
        }
        let charging_or_off = self.season == Season::Charging || self.dt == Demand::Off;
        let charging_and_off = self.season == Season::Charging && self.dt == Demand::Off;
        if charging_or_off && !charging_and_off {
            return Err(Error::Invalid(format!("mode {}: charging season and drivetrain Off must coincide", self.id)));
        }
        Ok(())
    }

    pub fn components(&self) -> BTreeSet<ComponentId> {
        self.transfers.iter().flat_map(|t| [t.from, t.to]).collect()
    }
}

/// A validated, id-unique list of operating modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeCatalog {
    pub modes: Vec<OperatingMode>,
}

impl ModeCatalog {
    pub fn new(modes: Vec<OperatingMode>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for m in &modes {
            m.validate()?;
            if !ids.insert(m.id) {
                return Err(Error::Invalid(format!("duplicate mode id {}", m.id)));
            }
        }
        Ok(Self { modes })
    }

    pub fn standard() -> Self {
        Self { modes: standard_mode_catalog() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ModeCatalog = serde_json::from_str(text)?;
        Self::new(raw.modes)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, id: u8) -> Option<&OperatingMode> {
        self.modes.iter().find(|m| m.id == id)
    }

    pub fn mode(&self, id: u8) -> Result<&OperatingMode> {
        self.get(id).ok_or(Error::UnknownMode(id))
    }

    pub fn ids(&self) -> Vec<u8> {
        self.modes.iter().map(|m| m.id).collect()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

impl Default for ModeCatalog {
    fn default() -> Self {
        Self::standard()
    }
}

/// The thirteen standard operating modes with their transfer requirements
/// and temperature bands.
pub fn standard_mode_catalog() -> Vec<OperatingMode> {
    use ComponentId::*;
    use Demand::*;

    let t = TransferEdge::new;
    let winter = |id, battery, dt, bat_band, dt_band, transfers| OperatingMode {
        id,
        season: Season::Winter,
        ambient: AmbientBand::Below20C,
        cabin: HeatActive,
        battery,
        dt,
        transfers,
        thresholds: ModeThresholds { cabin: TempBand::below(20.0), battery: bat_band, dt: dt_band },
    };
    let summer = |id, cabin, battery, dt, bat_band, dt_band, transfers| OperatingMode {
        id,
        season: Season::Summer,
        ambient: AmbientBand::Above20C,
        cabin,
        battery,
        dt,
        transfers,
        thresholds: ModeThresholds { cabin: TempBand::above(20.0), battery: bat_band, dt: dt_band },
    };

    vec![
        winter(
            1,
            HeatActive,
            Neutral,
            TempBand::below(15.0),
            TempBand::below(25.0),
            vec![t(Lcc, CabinHX), t(Lcc, BatteryHX), t(Radiator1, Chiller)],
        ),
        winter(
            2,
            HeatPassive,
            CoolPassive,
            TempBand::below(15.0),
            TempBand::above(25.0),
            vec![t(Lcc, CabinHX), t(DriveTrain, BatteryHX), t(Radiator1, Chiller)],
        ),
        winter(
            3,
            CoolPassive,
            CoolPassive,
            TempBand::between(25.0, 40.0),
            TempBand::above(25.0),
            vec![t(Lcc, CabinHX), t(DriveTrain, Radiator2), t(BatteryHX, Radiator2), t(Radiator1, Chiller)],
        ),
        winter(
            4,
            CoolPassive,
            Neutral,
            TempBand::between(25.0, 40.0),
            TempBand::below(25.0),
            vec![t(Lcc, CabinHX), t(BatteryHX, Radiator2), t(Radiator1, Chiller)],
        ),
        winter(
            5,
            Neutral,
            Neutral,
            TempBand::between(15.0, 25.0),
            TempBand::below(25.0),
            vec![t(Lcc, CabinHX), t(Radiator1, Chiller)],
        ),
        winter(
            6,
            Neutral,
            CoolPassive,
            TempBand::between(15.0, 25.0),
            TempBand::above(25.0),
            vec![t(Lcc, CabinHX), t(DriveTrain, Chiller)],
        ),
        OperatingMode {
            id: 7,
            season: Season::Charging,
            ambient: AmbientBand::Below20C,
            cabin: Neutral,
            battery: HeatActive,
            dt: Off,
            transfers: vec![t(Lcc, BatteryHX), t(Radiator1, Chiller)],
            thresholds: ModeThresholds { cabin: TempBand::ANY, battery: TempBand::below(15.0), dt: TempBand::ANY },
        },
        summer(
            8,
            CoolActive,
            CoolPassive,
            CoolPassive,
            TempBand::between(25.0, 40.0),
            TempBand::above(35.0),
            vec![t(Lcc, Radiator1), t(CabinHX, Chiller), t(BatteryHX, Radiator2), t(DriveTrain, Radiator2)],
        ),
        summer(
            9,
            CoolActive,
            CoolActive,
            CoolPassive,
            TempBand::above(40.0),
            TempBand::above(35.0),
            vec![t(Lcc, Radiator1), t(CabinHX, Chiller), t(BatteryHX, Chiller), t(DriveTrain, Radiator2)],
        ),
        summer(
            10,
            CoolActive,
            CoolPassive,
            Neutral,
            TempBand::between(25.0, 40.0),
            TempBand::below(35.0),
            vec![t(Lcc, Radiator1), t(CabinHX, Chiller), t(BatteryHX, Radiator2)],
        ),
        summer(
            11,
            CoolActive,
            CoolActive,
            Neutral,
            TempBand::above(40.0),
            TempBand::below(35.0),
            vec![t(Lcc, Radiator1), t(CabinHX, Chiller), t(BatteryHX, Chiller)],
        ),
        summer(
            12,
            CoolActive,
            Neutral,
            Neutral,
            TempBand::below(25.0),
            TempBand::below(35.0),
            vec![t(Lcc, Radiator1), t(CabinHX, Chiller)],
        ),
        // The cabin rejects heat through the chiller, so it counts as
        // actively cooled.
        summer(
            13,
            CoolActive,
            Neutral,
            CoolPassive,
            TempBand::below(25.0),
            TempBand::above(35.0),
            vec![t(Lcc, Radiator1), t(CabinHX, Chiller), t(DriveTrain, Radiator2)],
        ),
    ]
}

/// Directed graph of one mode's required heat transfers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintGraph {
    pub mode_id: u8,
    pub vertices: BTreeSet<ComponentId>,
    pub edges: Vec<TransferEdge>,
}

impl ConstraintGraph {
    /// Components directly connected to `c` by some transfer.
    pub fn neighbors(&self, c: ComponentId) -> BTreeSet<ComponentId> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.from == c {
                    Some(e.to)
                } else if e.to == c {
                    Some(e.from)
                } else {
                    None
                }
            })
            .collect()
    }
}

pub fn constraint_graph(mode: &OperatingMode) -> ConstraintGraph {
    ConstraintGraph { mode_id: mode.id, vertices: mode.components(), edges: mode.transfers.clone() }
}

/// A weakly connected component of a constraint graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferGroup {
    pub index: usize,
    pub edges: Vec<TransferEdge>,
    pub components: BTreeSet<ComponentId>,
}

/// Partitions the transfers into weakly connected groups, ordered by the
/// first transfer of each group.
pub fn transfer_groups(cg: &ConstraintGraph) -> Vec<TransferGroup> {
    let mut parent: [usize; 7] = std::array::from_fn(|i| i);
    fn find(p: &mut [usize; 7], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in &cg.edges {
        let (a, b) = (find(&mut parent, e.from.index()), find(&mut parent, e.to.index()));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: Vec<TransferGroup> = Vec::new();
    let mut by_root: BTreeMap<usize, usize> = BTreeMap::new();
    for e in &cg.edges {
        let root = find(&mut parent, e.from.index());
        let slot = *by_root.entry(root).or_insert_with(|| {
            groups.push(TransferGroup { index: groups.len(), edges: Vec::new(), components: BTreeSet::new() });
            groups.len() - 1
        });
        groups[slot].edges.push(*e);
        groups[slot].components.extend([e.from, e.to]);
    }
    groups
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeKind {
    Component { label: ComponentId },
    Junction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchNode {
    pub id: usize,
    #[serde(flatten)]
    pub kind: NodeKind,
}

/// An undirected coolant line. `a`/`b` order carries no meaning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchEdge {
    pub id: usize,
    pub a: usize,
    pub b: usize,
    pub valve: bool,
}

impl ArchEdge {
    pub fn other(&self, n: usize) -> usize {
        if self.a == n {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub sequence: Vec<u8>,
}

/// Undirected multigraph of components, junctions and coolant lines.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchGraph {
    pub nodes: Vec<ArchNode>,
    pub edges: Vec<ArchEdge>,
    pub provenance: Provenance,
}

impl ArchGraph {
    /// The seven components, no lines.
    pub fn initial() -> Self {
        Self {
            nodes: ComponentId::ALL
                .iter()
                .map(|&c| ArchNode { id: c.index(), kind: NodeKind::Component { label: c } })
                .collect(),
            edges: Vec::new(),
            provenance: Provenance::default(),
        }
    }

    pub fn component_node(&self, c: ComponentId) -> Option<usize> {
        self.nodes.iter().find(|n| n.kind == NodeKind::Component { label: c }).map(|n| n.id)
    }

    pub fn node(&self, id: usize) -> Option<&ArchNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn component_of(&self, id: usize) -> Option<ComponentId> {
        match self.node(id)?.kind {
            NodeKind::Component { label } => Some(label),
            NodeKind::Junction => None,
        }
    }

    pub fn edge(&self, id: usize) -> Option<&ArchEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn next_node_id(&self) -> usize {
        self.nodes.iter().map(|n| n.id + 1).max().unwrap_or(0)
    }

    pub fn next_edge_id(&self) -> usize {
        self.edges.iter().map(|e| e.id + 1).max().unwrap_or(0)
    }

    pub fn add_junction(&mut self) -> usize {
        let id = self.next_node_id();
        self.nodes.push(ArchNode { id, kind: NodeKind::Junction });
        id
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> usize {
        let id = self.next_edge_id();
        self.edges.push(ArchEdge { id, a, b, valve: false });
        id
    }

    pub fn valve_edges(&self) -> BTreeSet<usize> {
        self.edges.iter().filter(|e| e.valve).map(|e| e.id).collect()
    }

    /// Incident `(edge id, neighbor)` pairs per node, sorted.
    pub fn incidence(&self) -> BTreeMap<usize, Vec<(usize, usize)>> {
        let mut inc: BTreeMap<usize, Vec<(usize, usize)>> = self.nodes.iter().map(|n| (n.id, Vec::new())).collect();
        for e in &self.edges {
            inc.entry(e.a).or_default().push((e.id, e.b));
            inc.entry(e.b).or_default().push((e.id, e.a));
        }
        for v in inc.values_mut() {
            v.sort_unstable();
        }
        inc
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        let mut comps = BTreeSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return Err(Error::Invalid(format!("duplicate node id {}", n.id)));
            }
            if let NodeKind::Component { label } = n.kind {
                if !comps.insert(label) {
                    return Err(Error::Invalid(format!("component {label} appears twice")));
                }
            }
        }
        if comps.len() != ComponentId::ALL.len() {
            return Err(Error::Invalid("architecture must contain all seven components".into()));
        }
        let mut eids = BTreeSet::new();
        for e in &self.edges {
            if !eids.insert(e.id) {
                return Err(Error::Invalid(format!("duplicate edge id {}", e.id)));
            }
            if e.a == e.b {
                return Err(Error::Invalid(format!("edge {} is a self-loop", e.id)));
            }
            if !ids.contains(&e.a) || !ids.contains(&e.b) {
                return Err(Error::Invalid(format!("edge {} references a missing node", e.id)));
            }
        }
        Ok(())
    }
}
