//! On-disk layout of a pipeline run.
//!
//! ```text
//! out/index.json
//! out/architectures/arch_001.json
//! out/reports/arch_001.json          (+ arch_001/mode_01.json pruned dumps)
//! out/runs/arch_001/fixed_mode01.csv, ..., dynamic.csv
//! out/metrics/arch_001.json
//! out/status/<stage>.json
//! out/scores.json, out/pareto.svg
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tms_core::batch::SequenceFailure;

/// Writes through a temp file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub file: String,
    pub canonical: String,
    /// Indices of the sequences that produced this architecture.
    pub sequences: Vec<usize>,
    pub valves: usize,
    pub complexity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Index {
    pub seed: u64,
    pub sequences: usize,
    pub architectures: Vec<IndexEntry>,
    pub failures: Vec<SequenceFailure>,
}

pub struct Store {
    pub root: PathBuf,
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    pub fn index(&self) -> PathBuf {
        self.root.join("index.json")
    }

    pub fn architecture(&self, id: &str) -> PathBuf {
        self.root.join("architectures").join(format!("{id}.json"))
    }

    pub fn report(&self, id: &str) -> PathBuf {
        self.root.join("reports").join(format!("{id}.json"))
    }

    pub fn pruned(&self, id: &str, mode: u8) -> PathBuf {
        self.root.join("reports").join(id).join(format!("mode_{mode:02}.json"))
    }

    pub fn run(&self, id: &str, stem: &str) -> PathBuf {
        self.root.join("runs").join(id).join(format!("{stem}.csv"))
    }

    pub fn metrics(&self, id: &str) -> PathBuf {
        self.root.join("metrics").join(format!("{id}.json"))
    }

    pub fn status(&self, stage: &str) -> PathBuf {
        self.root.join("status").join(format!("{stage}.json"))
    }

    pub fn scores(&self) -> PathBuf {
        self.root.join("scores.json")
    }

    pub fn svg(&self) -> PathBuf {
        self.root.join("pareto.svg")
    }

    /// Ids of the architecture files present, sorted. A missing directory
    /// is an empty store.
    pub fn architecture_ids(&self) -> Result<Vec<String>> {
        json_stems(&self.root.join("architectures"))
    }

    pub fn metrics_ids(&self) -> Result<Vec<String>> {
        json_stems(&self.root.join("metrics"))
    }
}

fn json_stems(dir: &Path) -> Result<Vec<String>> {
    let rd = match fs::read_dir(dir) {
        Ok(rd) => rd,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e).with_context(|| format!("listing {}", dir.display())),
    };
    let mut ids = Vec::new();
    for entry in rd {
        let p = entry?.path();
        if p.extension().is_some_and(|e| e == "json") {
            if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                if !stem.starts_with('.') {
                    ids.push(stem.to_string());
                }
            }
        }
    }
    ids.sort();
    Ok(ids)
}
