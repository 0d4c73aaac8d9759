use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sequence space exhausted: {requested} distinct sequences requested, only {available} exist")]
    SequenceSpaceExhausted { requested: usize, available: u128 },

    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("mode {mode} inseparable: {reason}")]
    ModeInseparable { mode: u8, reason: String },

    #[error("valve search exceeded its node budget of {0}")]
    ValveSearchBudget(usize),

    #[error("unknown edge id {0}")]
    UnknownEdge(usize),

    #[error("no consistent orientation: modes {first} and {second} require opposite directions on edge {edge}")]
    NoConsistentOrientation { first: u8, second: u8, edge: usize },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("missing state for valve {valve} in mode {mode}")]
    MissingValveState { valve: usize, mode: u8 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("mode {0} has no fixed-mode test; mode 7 conditions a charging vehicle and is not simulated")]
    UnsupportedFixedMode(u8),

    #[error("unknown mode {0}")]
    UnknownMode(u8),

    #[error("simulation fault at t = {time:.1} s: {detail}")]
    SimulationFault { time: f64, detail: String },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}
