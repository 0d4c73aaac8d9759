use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tms_core::domain::ModeCatalog;
use tms_core::exec::Exec;
use tms_core::thermalsim::{DriveCycle, PlantParams};

/// Everything a pipeline run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub count: usize,
    pub catalog: Option<PathBuf>,
    pub params: Option<PathBuf>,
    /// One pass of the drive cycle, CSV with `t_s,speed_mps`.
    pub cycle: Option<PathBuf>,
    pub out: PathBuf,
    pub fixed: bool,
    pub dynamic: bool,
    /// Passes of the cycle in the dynamic test.
    pub repeats: u32,
    pub dt: f64,
    /// Worker threads; `Some(1)` runs everything sequentially.
    pub jobs: Option<usize>,
    /// Overrides the plant's junction leak fraction.
    pub lambda: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            count: 150,
            catalog: None,
            params: None,
            cycle: None,
            out: PathBuf::from("out"),
            fixed: true,
            dynamic: true,
            repeats: 3,
            dt: 0.1,
            jobs: None,
            lambda: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            bail!("sequence count must be at least 1");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            bail!("dt must be positive, got {}", self.dt);
        }
        if self.repeats == 0 {
            bail!("the drive cycle must repeat at least once");
        }
        if self.jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        Ok(())
    }

    pub fn catalog(&self) -> Result<ModeCatalog> {
        match &self.catalog {
            Some(p) => ModeCatalog::load(p).with_context(|| format!("loading catalog {}", p.display())),
            None => Ok(ModeCatalog::standard()),
        }
    }

    pub fn params(&self) -> Result<PlantParams> {
        let mut p = match &self.params {
            Some(path) => PlantParams::load(path).with_context(|| format!("loading parameters {}", path.display()))?,
            None => PlantParams::default(),
        };
        if let Some(l) = self.lambda {
            p.junction_leak = l;
            p.validate()?;
        }
        Ok(p)
    }

    pub fn cycle(&self) -> Result<DriveCycle> {
        match &self.cycle {
            Some(p) => DriveCycle::load(p, 1).with_context(|| format!("loading drive cycle {}", p.display())),
            None => Ok(DriveCycle::bundled(1)),
        }
    }

    pub fn exec(&self) -> Exec {
        if self.jobs == Some(1) {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    /// Runs `f` on a pool of `jobs` workers, or the global pool if unset.
    pub fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> Result<R> {
        #[cfg(feature = "parallel")]
        if let Some(n) = self.jobs.filter(|&n| n > 1) {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            return Ok(pool.install(f));
        }
        #[cfg(not(feature = "parallel"))]
        if self.jobs.is_some_and(|n| n > 1) {
            log::warn!("built without the parallel feature; --jobs ignored");
        }
        Ok(f())
    }
}
