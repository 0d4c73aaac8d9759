use std::collections::{BTreeMap, BTreeSet};

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use tms_core::assess::prune_closed;
use tms_core::batch::{
    assess_architecture, enumerate_architectures, simulate_batch, Architecture, RunKey, SimSettings,
};
use tms_core::metrics::{complexity_factor, score, ArchMetrics, ArchScore, RunMetrics, ScoreInput};
use tms_core::thermalsim::{DriveCycle, Scenario, FIXED_TEST_MODES};
use tms_core::valveplan::PlanOptions;

use crate::config::PipelineConfig;
use crate::store::{read_json, write_atomic, write_json, Index, IndexEntry, Store};
use crate::svg::pareto_svg;

/// Per-architecture outcome of one stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: String,
    pub ok: Vec<String>,
    /// Architecture (or run) to reason.
    pub failed: BTreeMap<String, String>,
}

impl StageSummary {
    fn new(stage: &str) -> Self {
        StageSummary { stage: stage.into(), ..Default::default() }
    }

    pub fn success(&self) -> bool {
        self.failed.is_empty()
    }

    fn save(&self, store: &Store) -> Result<()> {
        write_json(&store.status(&self.stage), self)
    }
}

fn load_arch(store: &Store, id: &str) -> Result<Architecture> {
    let a: Architecture = read_json(&store.architecture(id))?;
    if a.id != id {
        bail!("file {id}.json holds architecture {}", a.id);
    }
    Ok(a)
}

/// Builds the architecture store. Failed sequences are listed in the index
/// and the summary; the rest of the batch carries on.
pub fn cmd_enumerate(cfg: &PipelineConfig) -> Result<StageSummary> {
    cfg.validate()?;
    let catalog = cfg.catalog()?;
    let store = Store::new(&cfg.out);
    let e =
        cfg.run(|| enumerate_architectures(&catalog, cfg.seed, cfg.count, &PlanOptions::default(), cfg.exec()))??;
    let mut summary = StageSummary::new("enumerate");
    let mut entries = Vec::new();
    for a in &e.architectures {
        write_json(&store.architecture(&a.id), a)?;
        entries.push(IndexEntry {
            id: a.id.clone(),
            file: format!("architectures/{}.json", a.id),
            canonical: a.canonical.clone(),
            sequences: a.sequences.clone(),
            valves: a.valve_plan.valve_edges.len(),
            complexity: complexity_factor(&a.directed),
        });
        summary.ok.push(a.id.clone());
    }
    for f in &e.failures {
        summary.failed.insert(format!("sequence_{:03}", f.index), f.error.clone());
    }
    write_json(
        &store.index(),
        &Index { seed: e.seed, sequences: e.sequences, architectures: entries, failures: e.failures.clone() },
    )?;
    log::info!("{} unique architectures from {} sequences", e.architectures.len(), e.sequences);
    summary.save(&store)?;
    Ok(summary)
}

/// Assesses every stored architecture in every mode. An unreadable or
/// failing file is flagged without touching the others.
pub fn cmd_assess(cfg: &PipelineConfig, dump_pruned: bool) -> Result<StageSummary> {
    let catalog = cfg.catalog()?;
    let store = Store::new(&cfg.out);
    let ids = store.architecture_ids()?;
    let results = cfg.run(|| {
        cfg.exec().map(&ids, |id| -> Result<_> {
            let a = load_arch(&store, id)?;
            Ok((assess_architecture(&a, &catalog)?, a))
        })
    })?;
    let mut summary = StageSummary::new("assess");
    for (id, r) in ids.iter().zip(results) {
        let (report, a) = match r {
            Ok(x) => x,
            Err(e) => {
                log::warn!("{id}: {e:#}");
                summary.failed.insert(id.clone(), format!("{e:#}"));
                continue;
            }
        };
        write_json(&store.report(id), &report)?;
        if dump_pruned {
            for m in catalog.ids() {
                write_json(&store.pruned(id, m), &prune_closed(&a.directed, m)?)?;
            }
        }
        if !report.directed.all_pass() {
            let failing: Vec<u8> = report.directed.modes.iter().filter(|m| !m.pass).map(|m| m.id).collect();
            summary.failed.insert(id.clone(), format!("fails modes {failing:?}"));
        } else if !report.undirected_agrees {
            summary.failed.insert(id.clone(), "directed and undirected verdicts differ".into());
        } else {
            summary.ok.push(id.clone());
        }
    }
    summary.save(&store)?;
    Ok(summary)
}

fn run_keys(cfg: &PipelineConfig) -> Vec<RunKey> {
    let mut keys = Vec::new();
    if cfg.fixed {
        keys.extend(FIXED_TEST_MODES.iter().map(|&m| RunKey::Fixed(m)));
    }
    if cfg.dynamic {
        keys.push(RunKey::Dynamic);
    }
    keys
}

fn setpoint(key: RunKey, cycle: &DriveCycle) -> tms_core::Result<f64> {
    Ok(match key {
        RunKey::Fixed(m) => Scenario::fixed(m, cycle.clone())?.setpoint,
        RunKey::Dynamic => Scenario::dynamic(cycle.clone()).setpoint,
    })
}

/// Runs the test protocol on every stored architecture that passes
/// assessment; writes one CSV per run and a metrics file per architecture.
pub fn cmd_simulate(cfg: &PipelineConfig) -> Result<StageSummary> {
    cfg.validate()?;
    let catalog = cfg.catalog()?;
    let params = cfg.params()?;
    let cycle = cfg.cycle()?;
    let store = Store::new(&cfg.out);
    let mut summary = StageSummary::new("simulate");
    let mut archs = Vec::new();
    for id in store.architecture_ids()? {
        match load_arch(&store, &id).and_then(|a| Ok((assess_architecture(&a, &catalog)?.directed.all_pass(), a))) {
            Ok((true, a)) => archs.push(a),
            Ok((false, _)) => {
                summary.failed.insert(id, "fails assessment".into());
            }
            Err(e) => {
                summary.failed.insert(id, format!("{e:#}"));
            }
        }
    }
    let keys = run_keys(cfg);
    let settings = SimSettings { catalog: &catalog, params: &params, cycle: &cycle, repeats: cfg.repeats, dt: cfg.dt };
    let directed: Vec<_> = archs.iter().map(|a| &a.directed).collect();
    let results = cfg.run(|| simulate_batch(&directed, &keys, &settings, cfg.exec()))?;
    for (a, runs) in archs.iter().zip(results) {
        let mut m = ArchMetrics {
            id: a.id.clone(),
            fixed: BTreeMap::new(),
            dynamic: None,
            complexity: complexity_factor(&a.directed),
            performance: None,
            pareto: None,
        };
        let mut faults = Vec::new();
        for (key, out) in runs {
            let computed = out.and_then(|out| {
                let mut csv = Vec::new();
                out.write_csv(&mut csv)?;
                Ok((csv, RunMetrics::compute(&out, setpoint(key, &cycle)?)?))
            });
            let (csv, rm) = match computed {
                Ok(x) => x,
                Err(e) => {
                    log::warn!("{} {}: {e}", a.id, key.file_stem());
                    faults.push(format!("{}: {e}", key.file_stem()));
                    continue;
                }
            };
            write_atomic(&store.run(&a.id, &key.file_stem()), &csv)?;
            match key {
                RunKey::Fixed(mode) => {
                    m.fixed.insert(mode.to_string(), rm);
                }
                RunKey::Dynamic => m.dynamic = Some(rm),
            }
        }
        write_json(&store.metrics(&a.id), &m)?;
        if faults.is_empty() {
            summary.ok.push(a.id.clone());
        } else {
            summary.failed.insert(a.id.clone(), faults.join("; "));
        }
    }
    summary.save(&store)?;
    Ok(summary)
}

/// Scores every architecture with dynamic metrics and draws the front.
/// Stored architectures without them block the stage unless
/// `skip_missing` is set, in which case they are left out and reported.
pub fn cmd_pareto(cfg: &PipelineConfig, skip_missing: bool) -> Result<(StageSummary, Vec<ArchScore>)> {
    let store = Store::new(&cfg.out);
    let mut summary = StageSummary::new("pareto");
    let mut metrics = BTreeMap::new();
    let mut blockers = BTreeMap::new();
    let known: BTreeSet<String> = store.architecture_ids()?.into_iter().chain(store.metrics_ids()?).collect();
    for id in known {
        let path = store.metrics(&id);
        if !path.exists() {
            blockers.insert(id, "no metrics".to_string());
            continue;
        }
        match read_json::<ArchMetrics>(&path) {
            Ok(m) if m.dynamic.is_some() => {
                metrics.insert(id, m);
            }
            Ok(_) => {
                blockers.insert(id, "no dynamic run".to_string());
            }
            Err(e) => {
                blockers.insert(id, format!("{e:#}"));
            }
        }
    }
    if !blockers.is_empty() {
        if !skip_missing {
            let list: Vec<String> = blockers.iter().map(|(k, v)| format!("{k} ({v})")).collect();
            bail!("cannot score, missing metrics for: {}", list.join(", "));
        }
        summary.failed = blockers;
    }
    let inputs: Vec<ScoreInput> = metrics
        .values()
        .map(|m| {
            let d = m.dynamic.as_ref().unwrap();
            ScoreInput {
                id: m.id.clone(),
                complexity: m.complexity,
                total_energy: d.total_energy,
                heat_time: d.heat_time,
            }
        })
        .collect();
    let scores = score(&inputs)?;
    for s in &scores {
        let m = metrics.get_mut(&s.id).unwrap();
        m.performance = s.performance;
        m.pareto = Some(s.pareto_member);
        write_json(&store.metrics(&s.id), m)?;
        summary.ok.push(s.id.clone());
        if s.performance.is_none() {
            log::info!("{} never reached comfort and is left off the front", s.id);
        }
    }
    write_json(&store.scores(), &scores)?;
    write_atomic(&store.svg(), pareto_svg(&scores).as_bytes())?;
    summary.save(&store)?;
    Ok((summary, scores))
}

/// The whole pipeline. Later stages run even when earlier ones flag some
/// architectures; scoring then skips what could not be simulated.
pub fn report(cfg: &PipelineConfig, dump_pruned: bool) -> Result<Vec<StageSummary>> {
    let mut out = vec![cmd_enumerate(cfg)?, cmd_assess(cfg, dump_pruned)?, cmd_simulate(cfg)?];
    if cfg.dynamic {
        out.push(cmd_pareto(cfg, true)?.0);
    }
    Ok(out)
}
