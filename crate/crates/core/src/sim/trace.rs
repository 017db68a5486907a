//! JSONL traces and their verification.
//!
//! The first line is a header carrying the schema tag, the seed, the
//! scenario text and the initial snapshot; each further line is one
//! [`TraceEvent`].

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::grid::Snapshot;

use super::run::{RunReport, TraceEvent};
use super::{parse_scenario, save_scenario, Scenario, SimError};

pub const TRACE_SCHEMA: &str = "gridpi-trace/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema: String,
    pub seed: u64,
    pub scenario: String,
    pub initial: Snapshot,
    pub digest: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn from_run(s: &Scenario, r: &RunReport) -> Self {
        Trace {
            header: TraceHeader {
                schema: TRACE_SCHEMA.into(),
                seed: s.options.seed,
                scenario: save_scenario(s),
                initial: r.initial.clone(),
                digest: r.initial_digest.clone(),
            },
            events: r.events.clone(),
        }
    }

    pub fn snapshots(&self) -> impl Iterator<Item = &Snapshot> {
        std::iter::once(&self.header.initial).chain(self.events.iter().map(|e| &e.snapshot))
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serialises");
        out.push('\n');
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serialises"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(r: impl BufRead) -> Result<Self, SimError> {
        let mut lines = r.lines().enumerate();
        let bad = |line: usize, msg: String| SimError::TraceFormat { line, msg };
        let io = |e: std::io::Error| SimError::Io {
            path: "<trace>".into(),
            source: e,
        };
        let (_, first) = lines.next().ok_or_else(|| bad(1, "empty trace".into()))?;
        let first = first.map_err(io)?;
        let probe: serde_json::Value = serde_json::from_str(&first).map_err(|e| bad(1, e.to_string()))?;
        let schema = probe.get("schema").and_then(|s| s.as_str()).unwrap_or("");
        if schema != TRACE_SCHEMA {
            return Err(SimError::SchemaMismatch {
                expected: TRACE_SCHEMA.into(),
                found: schema.into(),
            });
        }
        let header: TraceHeader = serde_json::from_value(probe).map_err(|e| bad(1, e.to_string()))?;
        let mut events = Vec::new();
        for (i, l) in lines {
            let l = l.map_err(io)?;
            if l.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&l).map_err(|e| bad(i + 1, e.to_string()))?);
        }
        Ok(Trace { header, events })
    }
}

pub fn emit_trace(t: &Trace, path: &Path) -> Result<(), SimError> {
    let io = |e: std::io::Error| SimError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(t.to_jsonl().as_bytes()).map_err(io)
}

pub fn read_trace(path: &Path) -> Result<Trace, SimError> {
    let f = std::fs::File::open(path).map_err(|e| SimError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Trace::from_jsonl(BufReader::new(f))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub snapshots: usize,
    pub monotonicity: Vec<String>,
    pub exclusivity: Vec<String>,
    pub invariants: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.monotonicity.is_empty() && self.exclusivity.is_empty() && self.invariants.is_empty()
    }
}

/// Re-checks phase monotonicity, resource exclusivity and the snapshot
/// laws over every snapshot of `t`.
pub fn verify(t: &Trace) -> Result<VerificationReport, SimError> {
    let cfg = parse_scenario(&t.header.scenario)?.config;
    let mut rep = VerificationReport::default();
    let mut prev: Option<&Snapshot> = None;
    for (i, s) in t.snapshots().enumerate() {
        rep.snapshots += 1;
        for v in s.exclusivity() {
            rep.exclusivity.push(format!("snapshot {i}: {v}"));
        }
        for v in s.law_violations(&cfg) {
            rep.invariants.push(format!("snapshot {i}: {v}"));
        }
        if let Some(p) = prev {
            for (u, now) in &s.tasks {
                let Some(before) = p.tasks.get(u) else { continue };
                if now.phase < before.phase || (before.delivered && !now.delivered) {
                    rep.monotonicity.push(format!(
                        "snapshot {i}: {u} went from {}{} to {}",
                        before.phase,
                        if before.delivered { " (delivered)" } else { "" },
                        now.phase
                    ));
                }
            }
        }
        prev = Some(s);
    }
    Ok(rep)
}

