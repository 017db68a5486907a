//! Grid model: static configuration and invariants, the process encoding,
//! and snapshot extraction.

mod config;
mod encode;
mod invariants;
mod snapshot;
mod task;

use thiserror::Error;

pub use config::{GridConfig, Id};
pub use encode::{encode_grid, encode_task, AdEntry, Encoding, EncodingParams, NodeEntry, UserEntry, PROTOCOL_CONSTANTS};
pub use invariants::{check_invariants, InvariantId, InvariantReport, Violation};
pub use snapshot::{classify_phase, extract_snapshot, Phase, ResourceView, Snapshot, TaskView};
pub use task::{parse_task, required_descriptors, task_step, Basic, Step, TaskDef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("task syntax error at offset {pos}: {msg}")]
    TaskSyntax { pos: usize, msg: String },
    #[error("unknown descriptor `{kind}` at offset {pos}")]
    UnknownDescriptor { kind: String, pos: usize },
    #[error("malformed configuration: {0}")]
    Malformed(String),
    #[error("configuration violates {}", .0.ids().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", "))]
    InvariantViolation(InvariantReport),
    #[error("term not produced by this encoding: {0}")]
    UnrecognizedShape(String),
}
