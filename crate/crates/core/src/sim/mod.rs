//! Simulation harness: scenario files, seeded and interactive runs,
//! exhaustive exploration, traces.

mod explore;
mod run;
mod scenario;
mod trace;

use thiserror::Error;

use crate::calculus::CalcError;
use crate::grid::GridError;

pub use explore::{explore, replay, ExplorationReport, ExploreOptions, Finding, Livelock, Witness};
pub use run::{digest, run, run_interactive, RunReport, StopReason, TraceEvent, VALUE_WIDTH};
pub use scenario::{
    admit, load_scenario, parse_scenario, read_scenario, save_scenario, save_scenario_to, RunOptions, Scenario,
    SchedulerKind,
};
pub use trace::{emit_trace, read_trace, verify, Trace, TraceHeader, VerificationReport, TRACE_SCHEMA};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error("trace schema mismatch: expected {expected}, found `{found}`")]
    SchemaMismatch { expected: String, found: String },
    #[error("trace line {line}: {msg}")]
    TraceFormat { line: usize, msg: String },
    #[error("witness replay failed: {0}")]
    Replay(String),
}
