//! Pipeline orchestration behind the `tmsarch` binary: enumerate, assess,
//! simulate and score architectures into an output directory.

mod commands;
mod config;
pub mod store;
pub mod svg;

pub use commands::{cmd_assess, cmd_enumerate, cmd_pareto, cmd_simulate, report, StageSummary};
pub use config::PipelineConfig;
