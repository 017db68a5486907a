//! Grid-level state read back out of an encoded term.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::calculus::{Name, Prefix, Process, Value};

use super::config::{GridConfig, Id};
use super::encode::EncodingParams;
use super::invariants::check_invariants;
use super::GridError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Initial,
    Authenticated,
    Submitted,
    Queued,
    Running,
    Finished,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Initial => "initial",
            Phase::Authenticated => "authenticated",
            Phase::Submitted => "submitted",
            Phase::Queued => "queued",
            Phase::Running => "running",
            Phase::Finished => "finished",
        }
    }

    fn from_log(state: &str) -> Option<Phase> {
        Some(match state {
            "submitted" => Phase::Submitted,
            "queued" => Phase::Queued,
            "running" => Phase::Running,
            "finished" => Phase::Finished,
            _ => return None,
        })
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskView {
    /// User task instance.
    pub task: Id,
    pub phase: Phase,
    pub result: Option<Vec<Id>>,
    /// The post-completion process has run.
    pub delivered: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceView {
    /// Domain whose allocator holds the resource's proxy channel.
    pub ad: Option<Id>,
    /// Marked busy by the allocator.
    pub reserved: bool,
    /// Tasks whose jobs the resource's proxy is serving; empty when free.
    pub assigned: Vec<Id>,
    /// Proxy processes found for the resource.
    pub proxies: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    /// By user.
    pub tasks: BTreeMap<Id, TaskView>,
    pub resources: BTreeMap<Id, ResourceView>,
    /// Pending requests per AD.
    pub queues: BTreeMap<Id, usize>,
}

impl Snapshot {
    pub fn all_delivered(&self) -> bool {
        self.tasks.values().all(|t| t.delivered)
    }

    /// Resources held by more than one proxy or task.
    pub fn exclusivity(&self) -> Vec<String> {
        self.resources
            .iter()
            .filter(|(_, v)| v.proxies != 1 || v.assigned.len() > 1)
            .map(|(r, v)| format!("{r}: held by {} proxies for tasks {:?}", v.proxies, v.assigned))
            .collect()
    }

    /// Finished tasks carry a result, assigned resources serve running
    /// tasks, and the ownership relations observed in the term satisfy the
    /// static invariants.
    pub fn law_violations(&self, cfg: &GridConfig) -> Vec<String> {
        let mut out = Vec::new();
        for (u, t) in &self.tasks {
            if t.phase == Phase::Finished && t.result.is_none() {
                out.push(format!("{u}: finished without a result"));
            }
        }
        let running: BTreeSet<&Id> = self
            .tasks
            .values()
            .filter(|t| t.phase == Phase::Running)
            .map(|t| &t.task)
            .collect();
        for (r, v) in &self.resources {
            for t in &v.assigned {
                if !running.contains(t) {
                    out.push(format!("{r}: assigned to {t}, which is not running"));
                }
            }
        }
        let mut projected = cfg.clone();
        projected.task_of = self.tasks.iter().map(|(u, t)| (u.clone(), t.task.clone())).collect();
        projected.belongs_to = self
            .resources
            .iter()
            .filter_map(|(r, v)| v.ad.clone().map(|d| (r.clone(), d)))
            .collect();
        // Findings already present statically (an I7 warning) are not
        // attributed to the state.
        let baseline = check_invariants(cfg).violations;
        for v in check_invariants(&projected).violations {
            if baseline.iter().any(|b| b.invariant == v.invariant && b.tuples == v.tuples) {
                continue;
            }
            out.push(format!("{}: {}", v.invariant, v.message));
        }
        out
    }

    pub fn violations(&self, cfg: &GridConfig) -> Vec<String> {
        let mut v = self.exclusivity();
        v.extend(self.law_violations(cfg));
        v
    }
}

#[derive(Clone, Debug)]
enum Arg {
    Free(Name),
    Bound,
    Proc,
}

impl Arg {
    fn name(&self) -> Option<&Name> {
        match self {
            Arg::Free(n) => Some(n),
            _ => None,
        }
    }

    fn label(&self) -> Option<&str> {
        self.name().map(|n| n.label())
    }
}

struct Call {
    def: String,
    args: Vec<Arg>,
    under_cond: bool,
}

fn args_of(vs: &[Value], bound: &[u64]) -> Vec<Arg> {
    vs.iter()
        .map(|v| match v {
            Value::Name(n) if bound.contains(&n.id()) => Arg::Bound,
            Value::Name(n) => Arg::Free(n.clone()),
            Value::Proc(_) => Arg::Proc,
        })
        .collect()
}

/// Every call in `p`, including guarded ones and those inside abstractions.
fn calls(p: &Process, bound: &mut Vec<u64>, under_cond: bool, out: &mut Vec<Call>) {
    let values = |vs: &[Value], bound: &mut Vec<u64>, out: &mut Vec<Call>| {
        for v in vs {
            if let Value::Proc(a) = v {
                let m = bound.len();
                bound.extend(a.params.iter().map(|f| f.id()));
                calls(&a.body, bound, under_cond, out);
                bound.truncate(m);
            }
        }
    };
    match p {
        Process::Sum(bs) => {
            for b in bs {
                let m = bound.len();
                match &b.prefix {
                    Prefix::Input { formals, .. } => bound.extend(formals.iter().map(|f| f.id())),
                    Prefix::Output { args, .. } => values(args, bound, out),
                }
                calls(&b.cont, bound, under_cond, out);
                bound.truncate(m);
            }
        }
        Process::Par(a, b) => {
            calls(a, bound, under_cond, out);
            calls(b, bound, under_cond, out);
        }
        Process::Restrict(_, q) => calls(q, bound, under_cond, out),
        Process::Cond {
            then_branch,
            else_branch,
            ..
        } => {
            calls(then_branch, bound, true, out);
            calls(else_branch, bound, true, out);
        }
        Process::Call(d, vs) => {
            out.push(Call {
                def: d.to_string(),
                args: args_of(vs, bound),
                under_cond,
            });
            values(vs, bound, out);
        }
        Process::VarApp(_, vs) => values(vs, bound, out),
    }
}

/// Top-level outputs `delivered<u, res...>`.
fn delivered(p: &Process, out: &mut BTreeMap<String, Vec<Id>>) {
    match p {
        Process::Restrict(_, q) => delivered(q, out),
        Process::Par(a, b) => {
            delivered(a, out);
            delivered(b, out);
        }
        Process::Sum(bs) => {
            for b in bs {
                if let Prefix::Output { chan, args } = &b.prefix {
                    if chan.label() != "delivered" {
                        continue;
                    }
                    let labels: Vec<Id> = args
                        .iter()
                        .filter_map(|v| match v {
                            Value::Name(n) => Some(n.label().to_string()),
                            Value::Proc(_) => None,
                        })
                        .collect();
                    if let Some((u, res)) = labels.split_first() {
                        out.insert(u.clone(), res.to_vec());
                    }
                }
            }
        }
        _ => {}
    }
}

fn family<'a>(def: &'a str, base: &str) -> Option<&'a str> {
    def.strip_prefix(base)
}

/// Reads task phases, resource assignments and queue lengths from `p`.
pub fn extract_snapshot(p: &Process, params: &EncodingParams) -> Result<Snapshot, GridError> {
    let mut cs = Vec::new();
    calls(p, &mut Vec::new(), false, &mut cs);
    let mut marks = BTreeMap::new();
    delivered(p, &mut marks);

    // Log by read channel: (state, result).
    let mut logs: BTreeMap<u64, (String, String)> = BTreeMap::new();
    for c in cs.iter().filter(|c| c.def == "Log") {
        if let [Arg::Free(_), Arg::Free(gr), Arg::Free(st), Arg::Free(z)] = &c.args[..] {
            logs.insert(gr.id(), (st.label().to_string(), z.label().to_string()));
        }
    }

    let mut snap = Snapshot::default();
    // User proxy channel -> task instance.
    let mut proxy_owner: BTreeMap<u64, Id> = BTreeMap::new();
    for u in &params.users {
        let n = u.creds.len();
        let mut phase = Phase::Initial;
        let mut result = None;
        let monitors = cs.iter().filter(|c| {
            family(&c.def, "Monitor_c") == Some(&n.to_string())
                && c.args.len() == n + 4
                && c.args[..n].iter().zip(&u.creds).all(|(a, cr)| a.label() == Some(cr.as_str()))
        });
        for m in monitors {
            if let Some(a) = m.args[n + 1].name() {
                proxy_owner.insert(a.id(), u.task.clone());
            }
            let log = m.args[n].name().and_then(|g| logs.get(&g.id()));
            let seen = match log {
                Some((st, z)) => {
                    let ph = Phase::from_log(st).ok_or_else(|| {
                        GridError::UnrecognizedShape(format!("log of {} in state {st}", u.id))
                    })?;
                    if ph == Phase::Finished && z == "null" {
                        // The result write is still in flight.
                        Phase::Running
                    } else {
                        if ph == Phase::Finished {
                            result = Some(vec![z.clone()]);
                        }
                        ph
                    }
                }
                None if m.under_cond => Phase::Initial,
                None => Phase::Authenticated,
            };
            phase = phase.max(seen);
        }
        let is_delivered = marks.contains_key(&u.id);
        if let Some(res) = marks.get(&u.id) {
            phase = Phase::Finished;
            result = Some(res.clone());
        }
        snap.tasks.insert(
            u.id.clone(),
            TaskView {
                task: u.task.clone(),
                phase,
                result,
                delivered: is_delivered,
            },
        );
    }

    // Proxy channel x -> (ad, reserved).
    let mut lrm_slot: BTreeMap<u64, (Id, bool)> = BTreeMap::new();
    let mut seen_ads = BTreeSet::new();
    for ad in &params.ads {
        let k = ad.resources.len();
        let lrm = format!("LRM_{}", ad.id);
        let unexpanded = format!("AD_{}", ad.id);
        for c in &cs {
            if c.def == unexpanded {
                seen_ads.insert(ad.id.clone());
                for (r, _) in &ad.resources {
                    snap.resources.insert(
                        r.clone(),
                        ResourceView {
                            ad: Some(ad.id.clone()),
                            proxies: 1,
                            ..Default::default()
                        },
                    );
                }
                snap.queues.insert(ad.id.clone(), 0);
            } else if c.def == lrm && c.args.len() == 3 * k + 2 {
                seen_ads.insert(ad.id.clone());
                for j in 0..k {
                    if let Some(x) = c.args[k + j].name() {
                        let busy = c.args[j].label() == Some("busy");
                        lrm_slot.insert(x.id(), (ad.id.clone(), busy));
                    }
                }
            }
        }
    }
    for c in &cs {
        let busy = match c.def.as_str() {
            "RPrx" if c.args.len() == 5 => false,
            "RPrxBusy" if c.args.len() == 7 => true,
            _ => continue,
        };
        let (Some(rid), Some(x)) = (c.args[0].label(), c.args[1].name()) else {
            continue;
        };
        let view = snap.resources.entry(rid.to_string()).or_default();
        view.proxies += 1;
        if let Some((ad, reserved)) = lrm_slot.get(&x.id()) {
            view.ad = Some(ad.clone());
            view.reserved = *reserved;
        }
        if busy {
            let owner = c.args[5]
                .name()
                .and_then(|a| proxy_owner.get(&a.id()))
                .cloned()
                .unwrap_or_else(|| "?".into());
            view.assigned.push(owner);
        }
    }

    // Queue cells chain from the head (Assign side) to Nil.
    let mut cells: BTreeMap<u64, u64> = BTreeMap::new();
    for c in cs.iter().filter(|c| c.def.starts_with("Cell_z")) {
        if let (Some(Arg::Free(b)), Some(Arg::Free(b2))) = (c.args.first(), c.args.last()) {
            cells.insert(b2.id(), b.id());
        }
    }
    for c in cs.iter().filter(|c| c.def == "Nil") {
        if let [Arg::Free(ad), Arg::Free(b), Arg::Free(_)] = &c.args[..] {
            let mut len = 0;
            let mut at = b.id();
            while let Some(prev) = cells.get(&at) {
                len += 1;
                at = *prev;
                if len > cells.len() {
                    return Err(GridError::UnrecognizedShape("cyclic queue".into()));
                }
            }
            snap.queues.insert(ad.label().to_string(), len);
        }
    }

    for ad in &params.ads {
        if !seen_ads.contains(&ad.id) {
            return Err(GridError::UnrecognizedShape(format!("no allocator for AD {}", ad.id)));
        }
        for (r, _) in &ad.resources {
            if !snap.resources.contains_key(r) {
                return Err(GridError::UnrecognizedShape(format!("no proxy for resource {r}")));
            }
        }
    }
    Ok(snap)
}

/// Per user, the consecutive-deduplicated milestones of a run: the Log
/// phases from `submitted` on, then `delivered` once the post-completion
/// process has run.
pub fn classify_phase(trace: &[Snapshot]) -> BTreeMap<Id, Vec<String>> {
    let mut out: BTreeMap<Id, Vec<String>> = BTreeMap::new();
    for s in trace {
        for (u, t) in &s.tasks {
            let labels = out.entry(u.clone()).or_default();
            let l = if t.delivered {
                "delivered"
            } else if t.phase >= Phase::Submitted {
                t.phase.as_str()
            } else {
                continue;
            };
            if labels.last().map(String::as_str) != Some(l) {
                labels.push(l.to_string());
            }
        }
    }
    out
}
