//! Channel names, process variables and the supply that mints fresh ones.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

/// A channel name. Identity is the numeric id; the label is only for display.
#[derive(Clone)]
pub struct Name {
    id: u64,
    label: Arc<str>,
}

impl Name {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl PartialEq for Name {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Name {}

impl Hash for Name {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl PartialOrd for Name {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Name {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id.cmp(&other.id)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.label, self.id)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// A process variable, bound by higher-order input formals and abstraction
/// parameters.
#[derive(Clone)]
pub struct ProcVar {
    id: u64,
    label: Arc<str>,
}

impl ProcVar {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl PartialEq for ProcVar {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for ProcVar {}

impl Hash for ProcVar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl PartialOrd for ProcVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ProcVar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id.cmp(&other.id)
    }
}

impl fmt::Debug for ProcVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}#{}", self.label, self.id)
    }
}

impl fmt::Display for ProcVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Mints names and process variables from one monotone counter.
///
/// Both identifier spaces draw from the same counter, so a `Name` and a
/// `ProcVar` never share an id. Clones share the counter, which keeps ids
/// unique across explorer workers. Global constants (`ok`, `finished`, ...)
/// are interned by label so every parse and encoding agrees on them.
#[derive(Clone, Debug)]
pub struct NameSupply {
    next: Arc<AtomicU64>,
    constants: BTreeMap<String, Name>,
}

impl Default for NameSupply {
    fn default() -> Self {
        Self::new()
    }
}

impl NameSupply {
    pub fn new() -> Self {
        NameSupply {
            next: Arc::new(AtomicU64::new(1)),
            constants: BTreeMap::new(),
        }
    }

    fn bump(&self) -> u64 {
        self.next.fetch_add(1, AtomicOrdering::Relaxed)
    }

    pub fn name(&mut self, label: &str) -> Name {
        Name {
            id: self.bump(),
            label: Arc::from(label),
        }
    }

    pub fn var(&mut self, label: &str) -> ProcVar {
        ProcVar {
            id: self.bump(),
            label: Arc::from(label),
        }
    }

    /// A fresh name derived from `old`: same base label with one more prime.
    pub fn freshen(&mut self, old: &Name) -> Name {
        let label = format!("{}'", old.label);
        Name {
            id: self.bump(),
            label: Arc::from(label.as_str()),
        }
    }

    pub fn freshen_var(&mut self, old: &ProcVar) -> ProcVar {
        let label = format!("{}'", old.label);
        ProcVar {
            id: self.bump(),
            label: Arc::from(label.as_str()),
        }
    }

    /// The interned global constant with this label.
    pub fn constant(&mut self, label: &str) -> Name {
        if let Some(n) = self.constants.get(label) {
            return n.clone();
        }
        let n = self.name(label);
        self.constants.insert(label.to_string(), n.clone());
        n
    }

    pub fn lookup_constant(&self, label: &str) -> Option<&Name> {
        self.constants.get(label)
    }

    pub fn constants(&self) -> impl Iterator<Item = &Name> {
        self.constants.values()
    }
}
