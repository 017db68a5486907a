//! Static invariants of a configuration.
//!
//! I1..I4 are the membership, task, ownership and participation laws. I5..I8
//! cover the relations the process encoding also relies on: node placement,
//! node availability, task satisfiability and non-empty VOs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::{GridConfig, Id};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InvariantId {
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
    I7,
    I8,
}

impl fmt::Display for InvariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: InvariantId,
    /// Offending tuples, e.g. `[["u1","v1"],["u1","v2"]]` or `[["u1"]]`.
    pub tuples: Vec<Vec<Id>>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub violations: Vec<Violation>,
}

impl InvariantReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn ids(&self) -> Vec<InvariantId> {
        self.violations.iter().map(|v| v.invariant).collect()
    }

    pub fn has(&self, id: InvariantId) -> bool {
        self.violations.iter().any(|v| v.invariant == id)
    }
}

fn image<'a>(rel: &'a std::collections::BTreeSet<(Id, Id)>, x: &str) -> Vec<&'a Id> {
    rel.iter().filter(|(a, _)| a == x).map(|(_, b)| b).collect()
}

fn preimage<'a>(rel: &'a std::collections::BTreeSet<(Id, Id)>, y: &str) -> Vec<&'a Id> {
    rel.iter().filter(|(_, b)| b == y).map(|(a, _)| a).collect()
}

/// "exactly one" check of `rel` on every element of `dom`.
fn exactly_one(
    out: &mut Vec<Violation>,
    id: InvariantId,
    dom: &std::collections::BTreeSet<Id>,
    rel: &std::collections::BTreeSet<(Id, Id)>,
    what: &str,
) {
    for x in dom {
        let img = image(rel, x);
        match img.len() {
            1 => {}
            0 => out.push(Violation {
                invariant: id,
                tuples: vec![vec![x.clone()]],
                message: format!("{x} has no {what}"),
            }),
            n => out.push(Violation {
                invariant: id,
                tuples: img.iter().map(|y| vec![x.clone(), (*y).clone()]).collect(),
                message: format!("{x} has {n} values for {what}, expected exactly one"),
            }),
        }
    }
}

fn kind_counts<'a>(kinds: impl IntoIterator<Item = &'a Id>) -> BTreeMap<&'a Id, usize> {
    let mut m = BTreeMap::new();
    for k in kinds {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

pub fn check_invariants(cfg: &GridConfig) -> InvariantReport {
    let mut v = Vec::new();
    exactly_one(&mut v, InvariantId::I1, &cfg.users, &cfg.member, "VO membership");
    exactly_one(&mut v, InvariantId::I2, &cfg.users, &cfg.task_of, "task");
    let s: std::collections::BTreeSet<Id> = cfg.user_tasks.keys().cloned().collect();
    for t in &s {
        let owners = preimage(&cfg.task_of, t);
        if owners.len() > 1 {
            v.push(Violation {
                invariant: InvariantId::I2,
                tuples: owners.iter().map(|u| vec![(*u).clone(), t.clone()]).collect(),
                message: format!("task {t} is owned by {} users", owners.len()),
            });
        }
    }
    exactly_one(&mut v, InvariantId::I3, &cfg.resources, &cfg.belongs_to, "owning AD");
    for d in &cfg.ads {
        if image(&cfg.participate, d).is_empty() {
            v.push(Violation {
                invariant: InvariantId::I4,
                tuples: vec![vec![d.clone()]],
                message: format!("AD {d} participates in no VO"),
            });
        }
    }
    exactly_one(&mut v, InvariantId::I5, &cfg.nodes, &cfg.node_vo, "VO");
    for (u, vo) in &cfg.member {
        if preimage(&cfg.node_vo, vo).is_empty() {
            v.push(Violation {
                invariant: InvariantId::I6,
                tuples: vec![vec![u.clone(), vo.clone()]],
                message: format!("VO {vo} of user {u} has no access node"),
            });
        }
    }
    for (u, sid) in &cfg.task_of {
        let Some(t) = cfg.user_tasks.get(sid).and_then(|tid| cfg.task_defs.get(tid)) else {
            continue;
        };
        for b in t.basics() {
            let need = kind_counts(&b.kinds);
            let ok = image(&cfg.member, u).iter().any(|vo| {
                preimage(&cfg.participate, vo).iter().any(|d| {
                    let offered = kind_counts(
                        preimage(&cfg.belongs_to, d)
                            .into_iter()
                            .flat_map(|r| image(&cfg.resource_kind, r)),
                    );
                    need.iter().all(|(k, n)| offered.get(k).copied().unwrap_or(0) >= *n)
                })
            });
            if !ok {
                v.push(Violation {
                    invariant: InvariantId::I7,
                    tuples: vec![vec![u.clone(), sid.clone(), b.job.clone()]],
                    message: format!(
                        "no single AD in the VO of {u} offers <{}> for job {}",
                        b.kinds.join(","),
                        b.job
                    ),
                });
            }
        }
    }
    for vo in &cfg.vos {
        if preimage(&cfg.participate, vo).is_empty() {
            v.push(Violation {
                invariant: InvariantId::I8,
                tuples: vec![vec![vo.clone()]],
                message: format!("VO {vo} has no participating AD"),
            });
        }
    }
    v.sort_by(|a, b| a.invariant.cmp(&b.invariant).then_with(|| a.tuples.cmp(&b.tuples)));
    InvariantReport { violations: v }
}
