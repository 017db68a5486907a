//! Base sets and relations of a grid configuration.

use std::collections::{BTreeMap, BTreeSet};

use super::task::TaskDef;
use super::GridError;

pub type Id = String;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GridConfig {
    pub users: BTreeSet<Id>,
    pub vos: BTreeSet<Id>,
    pub ads: BTreeSet<Id>,
    pub resources: BTreeSet<Id>,
    pub nodes: BTreeSet<Id>,
    pub descriptors: BTreeSet<Id>,
    /// T: task definitions by id.
    pub task_defs: BTreeMap<Id, TaskDef>,
    /// S: user task instance id to task definition id.
    pub user_tasks: BTreeMap<Id, Id>,
    pub member: BTreeSet<(Id, Id)>,
    pub task_of: BTreeSet<(Id, Id)>,
    pub belongs_to: BTreeSet<(Id, Id)>,
    pub participate: BTreeSet<(Id, Id)>,
    pub node_vo: BTreeSet<(Id, Id)>,
    pub resource_kind: BTreeSet<(Id, Id)>,
    pub credentials: BTreeMap<Id, Vec<Id>>,
    /// Access node a user connects through; when absent, the first node of
    /// the user's VO.
    pub user_node: BTreeMap<Id, Id>,
}

fn set<'a>(xs: impl IntoIterator<Item = &'a str>) -> BTreeSet<Id> {
    xs.into_iter().map(str::to_string).collect()
}

impl GridConfig {
    /// Relation endpoints exist and every resource has exactly one kind.
    pub fn validate(&self) -> Result<(), GridError> {
        let check = |rel: &str, pairs: &BTreeSet<(Id, Id)>, l: &BTreeSet<Id>, r: &BTreeSet<Id>| {
            for (a, b) in pairs {
                if !l.contains(a) || !r.contains(b) {
                    return Err(GridError::Malformed(format!("{rel}({a}, {b}) mentions an unknown element")));
                }
            }
            Ok(())
        };
        let s: BTreeSet<Id> = self.user_tasks.keys().cloned().collect();
        check("member", &self.member, &self.users, &self.vos)?;
        check("taskOf", &self.task_of, &self.users, &s)?;
        check("belongsTo", &self.belongs_to, &self.resources, &self.ads)?;
        check("participate", &self.participate, &self.ads, &self.vos)?;
        check("nodeVo", &self.node_vo, &self.nodes, &self.vos)?;
        check("resourceKind", &self.resource_kind, &self.resources, &self.descriptors)?;
        for r in &self.resources {
            let n = self.resource_kind.iter().filter(|(x, _)| x == r).count();
            if n != 1 {
                return Err(GridError::Malformed(format!("resource {r} has {n} kinds, expected 1")));
            }
        }
        for (sid, tid) in &self.user_tasks {
            if !self.task_defs.contains_key(tid) {
                return Err(GridError::Malformed(format!("user task {sid} refers to unknown task {tid}")));
            }
        }
        for (tid, t) in &self.task_defs {
            for b in t.basics() {
                if b.kinds.is_empty() {
                    return Err(GridError::Malformed(format!("task {tid}: job {} has no kinds", b.job)));
                }
                if let Some(k) = b.kinds.iter().find(|k| !self.descriptors.contains(*k)) {
                    return Err(GridError::Malformed(format!("task {tid}: unknown descriptor {k}")));
                }
            }
        }
        for (u, n) in &self.user_node {
            if !self.users.contains(u) || !self.nodes.contains(n) {
                return Err(GridError::Malformed(format!("node assignment {u} -> {n} mentions an unknown element")));
            }
        }
        for u in self.credentials.keys() {
            if !self.users.contains(u) {
                return Err(GridError::Malformed(format!("credentials for unknown user {u}")));
            }
        }
        Ok(())
    }

    pub fn vos_of(&self, user: &str) -> Vec<&Id> {
        self.member.iter().filter(|(u, _)| u == user).map(|(_, v)| v).collect()
    }

    pub fn vo_of(&self, user: &str) -> Option<&Id> {
        self.vos_of(user).into_iter().next()
    }

    pub fn ads_of_vo(&self, vo: &str) -> Vec<&Id> {
        self.participate.iter().filter(|(_, v)| v == vo).map(|(d, _)| d).collect()
    }

    pub fn nodes_of_vo(&self, vo: &str) -> Vec<&Id> {
        self.node_vo.iter().filter(|(_, v)| v == vo).map(|(n, _)| n).collect()
    }

    pub fn vo_of_node(&self, node: &str) -> Option<&Id> {
        self.node_vo.iter().find(|(n, _)| n == node).map(|(_, v)| v)
    }

    /// Resources of an AD with their kinds, in resource-id order.
    pub fn resources_of(&self, ad: &str) -> Vec<(&Id, &Id)> {
        self.belongs_to
            .iter()
            .filter(|(_, d)| d == ad)
            .filter_map(|(r, _)| self.kind_of(r).map(|k| (r, k)))
            .collect()
    }

    pub fn kind_of(&self, resource: &str) -> Option<&Id> {
        self.resource_kind.iter().find(|(r, _)| r == resource).map(|(_, k)| k)
    }

    pub fn ad_of(&self, resource: &str) -> Option<&Id> {
        self.belongs_to.iter().find(|(r, _)| r == resource).map(|(_, d)| d)
    }

    pub fn task_instance_of(&self, user: &str) -> Option<&Id> {
        self.task_of.iter().find(|(u, _)| u == user).map(|(_, s)| s)
    }

    pub fn task_def_of(&self, user: &str) -> Option<&TaskDef> {
        let s = self.task_instance_of(user)?;
        self.task_defs.get(self.user_tasks.get(s)?)
    }

    /// The access node of a user.
    pub fn node_of(&self, user: &str) -> Option<&Id> {
        if let Some(n) = self.user_node.get(user) {
            return Some(n);
        }
        self.nodes_of_vo(self.vo_of(user)?).into_iter().next()
    }

    /// The worked two-VO scenario: users u1 (v1) and u2 (v2), ADs d1 (both
    /// VOs), d2 (v1) and d3 (v2), eight resources over k1..k3.
    pub fn scenario5() -> Self {
        let mut c = GridConfig {
            users: set(["u1", "u2"]),
            vos: set(["v1", "v2"]),
            ads: set(["d1", "d2", "d3"]),
            resources: set(["r1", "r2", "r3", "r4", "r5", "r6", "r7", "r8"]),
            nodes: set(["n1", "n2"]),
            descriptors: set(["k1", "k2", "k3"]),
            ..Default::default()
        };
        let kinds = c.descriptors.clone();
        let t1 = super::task::parse_task("J1<k1,k2>.end", &kinds).expect("fixture task");
        let t2 = super::task::parse_task("J2<k1,k2,k3>.end", &kinds).expect("fixture task");
        c.task_defs.insert("Task1".into(), t1);
        c.task_defs.insert("Task2".into(), t2);
        c.user_tasks.insert("S1".into(), "Task1".into());
        c.user_tasks.insert("S2".into(), "Task2".into());
        let pairs = |xs: &[(&str, &str)]| -> BTreeSet<(Id, Id)> {
            xs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
        };
        c.member = pairs(&[("u1", "v1"), ("u2", "v2")]);
        c.task_of = pairs(&[("u1", "S1"), ("u2", "S2")]);
        c.belongs_to = pairs(&[
            ("r1", "d1"),
            ("r2", "d1"),
            ("r3", "d1"),
            ("r4", "d2"),
            ("r5", "d2"),
            ("r6", "d3"),
            ("r7", "d3"),
            ("r8", "d3"),
        ]);
        c.participate = pairs(&[("d1", "v1"), ("d1", "v2"), ("d2", "v1"), ("d3", "v2")]);
        c.node_vo = pairs(&[("n1", "v1"), ("n2", "v2")]);
        c.resource_kind = pairs(&[
            ("r1", "k1"),
            ("r2", "k1"),
            ("r3", "k2"),
            ("r4", "k1"),
            ("r5", "k2"),
            ("r6", "k1"),
            ("r7", "k2"),
            ("r8", "k3"),
        ]);
        c.credentials.insert("u1".into(), vec!["c1a".into(), "c1b".into()]);
        c.credentials.insert("u2".into(), vec!["c2a".into(), "c2b".into()]);
        c
    }
}
