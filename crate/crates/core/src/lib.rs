//! Automated enumeration and evaluation of reconfigurable coolant networks
//! for battery-electric-vehicle thermal management.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! 1. [`domain`]: the seven main components, the operating-mode catalog and
//!    the graph types shared by every other stage.
//! 2. [`enumerate`]: layered construction of architecture graphs from mode
//!    sequences and colored-isomorphism deduplication.
//! 3. [`valveplan`]: per-mode cut sets and the smallest valve set.
//! 4. [`preprocess`]: conversion into a simulation-ready directed graph.
//! 5. [`assess`]: per-mode verification of cycle, isolation and restriction
//!    constraints.
//! 6. [`thermalsim`]: lumped-parameter transient simulation.
//! 7. [`metrics`]: run metrics, complexity factor and the Pareto front.
//!
//! [`batch`] strings the stages together over many sequences or
//! architectures, in parallel when the `parallel` feature is enabled.

pub mod assess;
pub mod batch;
pub mod cycles;
pub mod domain;
pub mod enumerate;
mod error;
pub mod exec;
pub mod metrics;
pub mod preprocess;
pub mod thermalsim;
pub mod valveplan;

pub use error::{Error, Result};
