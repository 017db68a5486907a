//! Bounded breadth-first exploration of the reachable normal forms.
//!
//! States are identified by the digest of their canonical key. Each BFS
//! level is expanded in parallel and merged in frontier order, so the report
//! does not depend on the number of workers.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use crate::calculus::{Engine, Process};
use crate::grid::{extract_snapshot, EncodingParams, GridConfig};

use super::run::{digest, start};
use super::{Scenario, SimError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExploreOptions {
    /// Levels expanded; states at this depth are recorded but not expanded.
    pub depth: usize,
    pub workers: usize,
    /// Cap on distinct states.
    pub max_states: usize,
}

impl ExploreOptions {
    pub fn new(depth: usize) -> Self {
        Self {
            depth,
            workers: 1,
            max_states: 1_000_000,
        }
    }
}

/// A state with a replayable path of move indices from the initial state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub state: usize,
    pub digest: String,
    pub path: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub witness: Witness,
    pub messages: Vec<String>,
}

/// A closed cycle of states without delivery of every task.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Livelock {
    pub states: usize,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExplorationReport {
    pub states: usize,
    pub transitions: usize,
    pub depth_reached: usize,
    /// Some state at the depth bound still had moves.
    pub depth_exhausted: bool,
    /// The state cap was hit.
    pub truncated: bool,
    /// Quiescent states with undelivered tasks.
    pub deadlocks: Vec<Witness>,
    pub livelocks: Vec<Livelock>,
    /// First state (in BFS order) where every task is delivered.
    pub delivered_all: Option<Witness>,
    pub invariant_failures: Vec<Finding>,
    pub exclusivity_failures: Vec<Finding>,
}

impl ExplorationReport {
    /// Every reachable state was expanded.
    pub fn complete(&self) -> bool {
        !self.depth_exhausted && !self.truncated
    }

    pub fn violations(&self) -> usize {
        self.invariant_failures.len() + self.exclusivity_failures.len()
    }
}

struct Node {
    digest: String,
    parent: Option<(usize, usize)>,
    succ: Vec<usize>,
    expanded: bool,
    delivered_all: bool,
}

struct Analysis {
    has_moves: bool,
    delivered_all: bool,
    laws: Vec<String>,
    exclusivity: Vec<String>,
    succs: Option<Vec<(String, Process)>>,
}

fn analyze(
    eng: &mut Engine,
    p: &Process,
    params: &EncodingParams,
    cfg: &GridConfig,
    expand: bool,
) -> Result<Analysis, SimError> {
    let snap = extract_snapshot(p, params)?;
    let moves = eng.moves(p)?;
    let succs = if expand {
        let mut out = Vec::with_capacity(moves.len());
        for r in &moves {
            let q = eng.advance(p, r)?;
            out.push((digest(&q), q));
        }
        Some(out)
    } else {
        None
    };
    Ok(Analysis {
        has_moves: !moves.is_empty(),
        delivered_all: snap.all_delivered(),
        laws: snap.law_violations(cfg),
        exclusivity: snap.exclusivity(),
        succs,
    })
}

fn analyze_all(
    eng: &Engine,
    terms: &[&Process],
    params: &EncodingParams,
    cfg: &GridConfig,
    expand: bool,
    workers: usize,
) -> Result<Vec<Analysis>, SimError> {
    let workers = workers.max(1).min(terms.len().max(1));
    if workers == 1 {
        let mut e = eng.clone();
        return terms.iter().map(|p| analyze(&mut e, p, params, cfg, expand)).collect();
    }
    let chunk = terms.len().div_ceil(workers);
    let parts: Vec<Result<Vec<Analysis>, SimError>> = std::thread::scope(|sc| {
        let handles: Vec<_> = terms
            .chunks(chunk)
            .map(|ts| {
                let mut e = eng.clone();
                sc.spawn(move || ts.iter().map(|p| analyze(&mut e, p, params, cfg, expand)).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("explorer worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(terms.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn witness(nodes: &[Node], id: usize) -> Witness {
    let mut path = Vec::new();
    let mut at = id;
    while let Some((parent, k)) = nodes[at].parent {
        path.push(k);
        at = parent;
    }
    path.reverse();
    Witness {
        state: id,
        digest: nodes[id].digest.clone(),
        path,
    }
}

/// Explores the scenario's state space breadth-first up to `opts.depth`.
pub fn explore(s: &Scenario, opts: &ExploreOptions) -> Result<(ExplorationReport, Duration), SimError> {
    let t0 = Instant::now();
    let (enc, eng, init) = start(s)?;
    let cfg = &s.config;
    let mut nodes = vec![Node {
        digest: digest(&init),
        parent: None,
        succ: Vec::new(),
        expanded: false,
        delivered_all: false,
    }];
    let mut index: HashMap<String, usize> = HashMap::new();
    index.insert(nodes[0].digest.clone(), 0);
    let mut rep = ExplorationReport {
        states: 0,
        transitions: 0,
        depth_reached: 0,
        depth_exhausted: false,
        truncated: false,
        deadlocks: Vec::new(),
        livelocks: Vec::new(),
        delivered_all: None,
        invariant_failures: Vec::new(),
        exclusivity_failures: Vec::new(),
    };
    let mut frontier: Vec<(usize, Process)> = vec![(0, init)];
    let mut level = 0;
    while !frontier.is_empty() {
        rep.depth_reached = level;
        let expand = level < opts.depth;
        let terms: Vec<&Process> = frontier.iter().map(|(_, p)| p).collect();
        let results = analyze_all(&eng, &terms, &enc.params, cfg, expand, opts.workers)?;
        let mut next = Vec::new();
        for ((id, _), a) in frontier.iter().zip(results) {
            let id = *id;
            nodes[id].delivered_all = a.delivered_all;
            if a.delivered_all && rep.delivered_all.is_none() {
                rep.delivered_all = Some(witness(&nodes, id));
            }
            if !a.laws.is_empty() {
                rep.invariant_failures.push(Finding {
                    witness: witness(&nodes, id),
                    messages: a.laws,
                });
            }
            if !a.exclusivity.is_empty() {
                rep.exclusivity_failures.push(Finding {
                    witness: witness(&nodes, id),
                    messages: a.exclusivity,
                });
            }
            if !a.has_moves && !a.delivered_all {
                rep.deadlocks.push(witness(&nodes, id));
            }
            let Some(succs) = a.succs else {
                rep.depth_exhausted |= a.has_moves;
                continue;
            };
            nodes[id].expanded = true;
            for (k, (dg, q)) in succs.into_iter().enumerate() {
                rep.transitions += 1;
                let target = match index.get(&dg) {
                    Some(&t) => t,
                    None if nodes.len() >= opts.max_states => {
                        rep.truncated = true;
                        nodes[id].expanded = false;
                        continue;
                    }
                    None => {
                        let t = nodes.len();
                        index.insert(dg.clone(), t);
                        nodes.push(Node {
                            digest: dg,
                            parent: Some((id, k)),
                            succ: Vec::new(),
                            expanded: false,
                            delivered_all: false,
                        });
                        next.push((t, q));
                        t
                    }
                };
                nodes[id].succ.push(target);
            }
        }
        frontier = next;
        level += 1;
    }
    rep.states = nodes.len();
    rep.livelocks = livelocks(&nodes);
    Ok((rep, t0.elapsed()))
}

/// Bottom strongly connected components with a cycle and no state where
/// every task is delivered. Components touching unexpanded states are
/// skipped: their exits are unknown.
fn livelocks(nodes: &[Node]) -> Vec<Livelock> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(nodes.len(), 0);
    let ix: Vec<NodeIndex> = (0..nodes.len()).map(|_| g.add_node(())).collect();
    for (i, n) in nodes.iter().enumerate() {
        for &j in &n.succ {
            g.add_edge(ix[i], ix[j], ());
        }
    }
    let mut out = Vec::new();
    for scc in tarjan_scc(&g) {
        let members: Vec<usize> = scc.iter().map(|n| n.index()).collect();
        let inside = |j: &usize| members.contains(j);
        let cyclic = members.len() > 1 || nodes[members[0]].succ.contains(&members[0]);
        let closed = members
            .iter()
            .all(|&m| nodes[m].expanded && nodes[m].succ.iter().all(inside));
        let delivered = members.iter().any(|&m| nodes[m].delivered_all);
        if cyclic && closed && !delivered {
            let first = *members.iter().min().expect("non-empty component");
            out.push(Livelock {
                states: members.len(),
                witness: witness(nodes, first),
            });
        }
    }
    out.sort_by_key(|l| l.witness.state);
    out
}

/// Re-runs a witness path and returns the state it reaches.
pub fn replay(s: &Scenario, path: &[usize]) -> Result<Process, SimError> {
    let (_, mut eng, mut p) = start(s)?;
    for &k in path {
        let moves = eng.moves(&p)?;
        let r = moves.get(k).ok_or_else(|| SimError::Replay(format!("move {k} of {} missing", moves.len())))?;
        p = eng.advance(&p, r)?;
    }
    Ok(p)
}
