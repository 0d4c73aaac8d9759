//! Whole-pipeline batches. Work items are independent and run through an
//! [`Exec`]; results always come back in input order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assess::{assess_all, assess_undirected, AssessmentReport};
use crate::domain::{ArchGraph, ModeCatalog};
use crate::enumerate::{
    build_architecture, canonical_form, generate_sequences, CanonicalForm, LoopTrace, ModeSequence,
};
use crate::exec::Exec;
use crate::preprocess::{preprocess_pipeline, DirectedArch};
use crate::thermalsim::{simulate, DriveCycle, PlantParams, Scenario, SimOutput, Wiring, FIXED_TEST_MODES};
use crate::valveplan::{apply_plan, plan_valves, PlanOptions, ValvePlan};
use crate::{Error, Result};

/// One architecture with everything derived from it up to preprocessing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub id: String,
    /// Valve flags set.
    #[serde(flatten)]
    pub graph: ArchGraph,
    pub valve_plan: ValvePlan,
    pub traces: Vec<LoopTrace>,
    pub directed: DirectedArch,
    /// Hex of the canonical form.
    pub canonical: String,
    /// Sequences that produced this architecture, by index.
    pub sequences: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceFailure {
    pub index: usize,
    pub order: Vec<u8>,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub seed: u64,
    pub sequences: usize,
    pub architectures: Vec<Architecture>,
    pub failures: Vec<SequenceFailure>,
}

struct Built {
    graph: ArchGraph,
    plan: ValvePlan,
    traces: Vec<LoopTrace>,
    directed: DirectedArch,
    form: CanonicalForm,
}

fn build_one(seq: &ModeSequence, catalog: &ModeCatalog, opts: &PlanOptions) -> Result<Built> {
    let (raw, traces) = build_architecture(seq, catalog)?;
    let (plan, _) = plan_valves(&raw, &traces, catalog, opts).map_err(|e| e.at_stage("valveplan"))?;
    let graph = apply_plan(&raw, &plan)?;
    let directed = preprocess_pipeline(&graph, &plan, &traces)?;
    let form = canonical_form(&graph);
    Ok(Built { graph, plan, traces, directed, form })
}

/// Generates `count` sequences from `seed`, builds, valves and preprocesses
/// each, and keeps the first architecture of every canonical form. A
/// sequence that fails any stage is recorded and skipped.
pub fn enumerate_architectures(
    catalog: &ModeCatalog,
    seed: u64,
    count: usize,
    opts: &PlanOptions,
    exec: Exec,
) -> Result<Enumeration> {
    let seqs = generate_sequences(count, seed, &catalog.ids())?;
    let built = exec.map(&seqs, |s| build_one(s, catalog, opts));
    let mut architectures: Vec<Architecture> = Vec::new();
    let mut by_form: BTreeMap<CanonicalForm, usize> = BTreeMap::new();
    let mut failures = Vec::new();
    for (index, (seq, b)) in seqs.iter().zip(built).enumerate() {
        match b {
            Ok(b) => {
                if let Some(&k) = by_form.get(&b.form) {
                    architectures[k].sequences.push(index);
                    continue;
                }
                by_form.insert(b.form.clone(), architectures.len());
                architectures.push(Architecture {
                    id: format!("arch_{:03}", architectures.len() + 1),
                    graph: b.graph,
                    valve_plan: b.plan,
                    traces: b.traces,
                    directed: b.directed,
                    canonical: b.form.to_hex(),
                    sequences: vec![index],
                });
            }
            Err(e) => {
                log::warn!("sequence {index} {:?} failed: {e}", seq.order);
                failures.push(SequenceFailure { index, order: seq.order.clone(), error: e.to_string() });
            }
        }
    }
    Ok(Enumeration { seed, sequences: seqs.len(), architectures, failures })
}

/// Assessment of the directed graph, plus whether the undirected graph
/// passes the same modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchAssessment {
    pub directed: AssessmentReport,
    pub undirected_agrees: bool,
}

pub fn assess_architecture(a: &Architecture, catalog: &ModeCatalog) -> Result<ArchAssessment> {
    let mut directed = assess_all(&a.directed, catalog)?;
    directed.architecture = Some(a.id.clone());
    let undirected = assess_undirected(&a.graph, &a.valve_plan, catalog);
    Ok(ArchAssessment { undirected_agrees: undirected.pass_map() == directed.pass_map(), directed })
}

/// Which run of an architecture a result belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RunKey {
    Fixed(u8),
    Dynamic,
}

impl RunKey {
    /// The full protocol: every fixed test, then the drive.
    pub fn protocol() -> Vec<RunKey> {
        FIXED_TEST_MODES.iter().map(|&m| RunKey::Fixed(m)).chain([RunKey::Dynamic]).collect()
    }

    pub fn file_stem(self) -> String {
        match self {
            RunKey::Fixed(m) => format!("fixed_mode{m:02}"),
            RunKey::Dynamic => "dynamic".into(),
        }
    }
}

pub struct SimSettings<'a> {
    pub catalog: &'a ModeCatalog,
    pub params: &'a PlantParams,
    /// Single pass of the drive cycle; the drive repeats it `repeats` times.
    pub cycle: &'a DriveCycle,
    pub repeats: u32,
    pub dt: f64,
}

pub type RunResults = BTreeMap<RunKey, Result<SimOutput>>;

/// Runs `keys` on every architecture. Each (architecture, run) pair is an
/// independent job; the result for architecture `i` sits at index `i`.
pub fn simulate_batch(archs: &[&DirectedArch], keys: &[RunKey], s: &SimSettings, exec: Exec) -> Vec<RunResults> {
    let wirings: Vec<Result<Wiring>> = exec.map(archs, |d| {
        let report = assess_all(d, s.catalog)?;
        Ok(Wiring::from_directed(d, &report))
    });
    let jobs: Vec<(usize, RunKey)> = (0..archs.len()).flat_map(|i| keys.iter().map(move |&k| (i, k))).collect();
    let outs = exec.map(&jobs, |&(i, key)| {
        let wiring = wirings[i].as_ref().map_err(|e| Error::Invariant(e.to_string()))?;
        let scenario = match key {
            RunKey::Fixed(m) => Scenario::fixed(m, s.cycle.clone())?,
            RunKey::Dynamic => Scenario::dynamic(s.cycle.clone().with_repeats(s.repeats)),
        };
        simulate(wiring, s.catalog, s.params, &scenario.with_dt(s.dt))
    });
    let mut results: Vec<RunResults> = (0..archs.len()).map(|_| BTreeMap::new()).collect();
    for ((i, key), out) in jobs.into_iter().zip(outs) {
        results[i].insert(key, out);
    }
    results
}
