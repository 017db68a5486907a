//! Single runs under a random or interactive scheduler.

use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{canonical_key, digest_key, Engine, Process, Redex};
use crate::grid::{encode_grid, extract_snapshot, Encoding, Snapshot};
use crate::syntax::pretty_value;

use super::{Scenario, SimError};

/// Longest rendering kept per communicated value.
pub const VALUE_WIDTH: usize = 80;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub step: usize,
    /// `comm`, `unfold` or `cond`.
    pub kind: String,
    pub channel: String,
    pub values: Vec<String>,
    /// Digest of the normal form after the step.
    pub digest: String,
    pub snapshot: Snapshot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AllDelivered,
    Quiescent,
    MaxStepsExceeded,
    /// Interactive input ended.
    Aborted,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub initial: Snapshot,
    pub initial_digest: String,
    pub events: Vec<TraceEvent>,
    pub stop: StopReason,
    pub final_term: Process,
}

impl RunReport {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.events.last().map_or(&self.initial, |e| &e.snapshot)
    }

    /// The initial snapshot followed by one per step.
    pub fn snapshots(&self) -> Vec<Snapshot> {
        std::iter::once(self.initial.clone())
            .chain(self.events.iter().map(|e| e.snapshot.clone()))
            .collect()
    }
}

pub fn digest(p: &Process) -> String {
    digest_key(&canonical_key(p))
}

fn clip(mut s: String) -> String {
    if s.chars().count() > VALUE_WIDTH {
        s = s.chars().take(VALUE_WIDTH - 3).collect();
        s.push_str("...");
    }
    s
}

/// An engine over a fresh encoding of the scenario, and the settled
/// initial term.
pub(crate) fn start(s: &Scenario) -> Result<(Encoding, Engine, Process), SimError> {
    let enc = encode_grid(&s.config)?;
    let mut eng = Engine::new(Arc::new(enc.env.clone()), enc.supply.clone());
    let init = eng.settle(&enc.main)?;
    Ok((enc, eng, init))
}

struct Driver {
    enc: Encoding,
    eng: Engine,
    term: Process,
    report: RunReport,
}

impl Driver {
    fn new(s: &Scenario) -> Result<Self, SimError> {
        let (enc, eng, term) = start(s)?;
        let initial = extract_snapshot(&term, &enc.params)?;
        let report = RunReport {
            initial,
            initial_digest: digest(&term),
            events: Vec::new(),
            stop: StopReason::Quiescent,
            final_term: term.clone(),
        };
        Ok(Self { enc, eng, term, report })
    }

    fn fire(&mut self, r: &Redex) -> Result<(), SimError> {
        let values = self.eng.payload(&self.term, r)?;
        self.term = self.eng.advance(&self.term, r)?;
        let snapshot = extract_snapshot(&self.term, &self.enc.params)?;
        self.report.events.push(TraceEvent {
            step: self.report.events.len() + 1,
            kind: r.kind().to_string(),
            channel: r.channel().map(|c| c.label().to_string()).unwrap_or_default(),
            values: values.iter().map(|v| clip(pretty_value(v))).collect(),
            digest: digest(&self.term),
            snapshot,
        });
        Ok(())
    }

    fn finish(mut self, stop: StopReason) -> RunReport {
        self.report.stop = stop;
        self.report.final_term = self.term;
        self.report
    }
}

/// Runs with moves drawn uniformly by a generator seeded from the options.
/// Stops once every task is delivered, at quiescence, or after `max_steps`.
pub fn run(s: &Scenario) -> Result<RunReport, SimError> {
    let mut d = Driver::new(s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.options.seed);
    loop {
        if d.report.final_snapshot().all_delivered() {
            return Ok(d.finish(StopReason::AllDelivered));
        }
        if d.report.events.len() >= s.options.max_steps {
            return Ok(d.finish(StopReason::MaxStepsExceeded));
        }
        let moves = d.eng.moves(&d.term)?;
        if moves.is_empty() {
            return Ok(d.finish(StopReason::Quiescent));
        }
        let r = &moves[rng.gen_range(0..moves.len())];
        d.fire(r)?;
    }
}

/// Lists the moves on `output` and applies the one chosen on `input`
/// (1-based); `q` or end of input stops the run.
pub fn run_interactive(s: &Scenario, input: &mut dyn BufRead, output: &mut dyn Write) -> Result<RunReport, SimError> {
    let io = |e: std::io::Error| SimError::Io {
        path: "<terminal>".into(),
        source: e,
    };
    let mut d = Driver::new(s)?;
    loop {
        let snap = d.report.final_snapshot();
        if snap.all_delivered() {
            writeln!(output, "all tasks delivered").map_err(io)?;
            return Ok(d.finish(StopReason::AllDelivered));
        }
        if d.report.events.len() >= s.options.max_steps {
            return Ok(d.finish(StopReason::MaxStepsExceeded));
        }
        let moves = d.eng.moves(&d.term)?;
        if moves.is_empty() {
            writeln!(output, "no moves left").map_err(io)?;
            return Ok(d.finish(StopReason::Quiescent));
        }
        let phases: Vec<String> = snap.tasks.iter().map(|(u, t)| format!("{u}:{}", t.phase)).collect();
        writeln!(output, "step {} [{}]", d.report.events.len(), phases.join(" ")).map_err(io)?;
        for (i, r) in moves.iter().enumerate() {
            let vals: Vec<String> = d.eng.payload(&d.term, r)?.iter().map(|v| clip(pretty_value(v))).collect();
            let chan = r.channel().map(|c| c.label().to_string()).unwrap_or_default();
            writeln!(output, "  {:>3}  {chan}<{}>", i + 1, vals.join(", ")).map_err(io)?;
        }
        let choice = loop {
            write!(output, "> ").map_err(io)?;
            output.flush().map_err(io)?;
            let mut line = String::new();
            if input.read_line(&mut line).map_err(io)? == 0 {
                return Ok(d.finish(StopReason::Aborted));
            }
            let line = line.trim();
            if line == "q" {
                return Ok(d.finish(StopReason::Aborted));
            }
            match line.parse::<usize>() {
                Ok(k) if (1..=moves.len()).contains(&k) => break k - 1,
                _ => writeln!(output, "enter 1..{} or q", moves.len()).map_err(io)?,
            }
        };
        d.fire(&moves[choice])?;
    }
}
