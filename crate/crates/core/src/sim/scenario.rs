//! Scenario files: a sectioned key-value description of a configuration
//! plus run options.
//!
//! ```text
//! [options]
//! scheduler = random
//! seed = 7
//! max_steps = 20000
//! depth = 60
//!
//! [vos]
//! v1
//!
//! [descriptors]
//! k1
//!
//! [users]
//! u1 vo=v1 task="J1<k1>.end" creds=c1a,c1b
//!
//! [ads]
//! d1 vos=v1 resources=r1:k1
//!
//! [nodes]
//! n1 vo=v1
//! ```
//!
//! User lines may add `node=`, and `instance=`/`def=` to name the task
//! instance and definition (default `S<k>` and `Task<k>` for the k-th user).
//! Blank lines and `#` comments are ignored. [`save_scenario`] writes this
//! canonical form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::grid::{check_invariants, parse_task, GridConfig, GridError, Id, InvariantId, InvariantReport, Violation};

use super::SimError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchedulerKind {
    Random,
    Exhaustive,
    Interactive,
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchedulerKind::Random => "random",
            SchedulerKind::Exhaustive => "exhaustive",
            SchedulerKind::Interactive => "interactive",
        })
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(SchedulerKind::Random),
            "exhaustive" => Ok(SchedulerKind::Exhaustive),
            "interactive" => Ok(SchedulerKind::Interactive),
            _ => Err(format!("unknown scheduler `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub scheduler: SchedulerKind,
    pub seed: u64,
    pub max_steps: usize,
    pub depth: usize,
    pub trace: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            scheduler: SchedulerKind::Random,
            seed: 1,
            max_steps: 10_000,
            depth: 60,
            trace: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub config: GridConfig,
    pub options: RunOptions,
}

fn err(line: usize, msg: impl Into<String>) -> SimError {
    SimError::Format { line, msg: msg.into() }
}

/// Splits on whitespace, keeping double-quoted stretches together.
fn fields(line: &str, n: usize) -> Result<Vec<String>, SimError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                cur.push(c);
            }
            c if c.is_whitespace() && !quoted => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if quoted {
        return Err(err(n, "unterminated quote"));
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

fn list(v: &str) -> Vec<String> {
    v.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect()
}

struct Entry {
    line: usize,
    id: String,
    attrs: BTreeMap<String, String>,
}

fn entry(line: &str, n: usize, allowed: &[&str]) -> Result<Entry, SimError> {
    let fs = fields(line, n)?;
    let (id, rest) = fs.split_first().ok_or_else(|| err(n, "empty entry"))?;
    if id.contains('=') {
        return Err(err(n, format!("expected an identifier, found `{id}`")));
    }
    let mut attrs = BTreeMap::new();
    for f in rest {
        let (k, v) = f.split_once('=').ok_or_else(|| err(n, format!("expected key=value, found `{f}`")))?;
        if !allowed.contains(&k) {
            return Err(err(n, format!("unknown key `{k}`")));
        }
        let v = match v.strip_prefix('"') {
            Some(inner) => inner
                .strip_suffix('"')
                .ok_or_else(|| err(n, format!("bad quoting in `{f}`")))?
                .to_string(),
            None => v.to_string(),
        };
        if attrs.insert(k.to_string(), v).is_some() {
            return Err(err(n, format!("duplicate key `{k}`")));
        }
    }
    Ok(Entry {
        line: n,
        id: id.clone(),
        attrs,
    })
}

fn insert_unique(set: &mut BTreeSet<Id>, id: &str, what: &str, n: usize) -> Result<(), SimError> {
    if !set.insert(id.to_string()) {
        return Err(err(n, format!("duplicate {what} `{id}`")));
    }
    Ok(())
}

pub fn parse_scenario(text: &str) -> Result<Scenario, SimError> {
    const SECTIONS: &[&str] = &["options", "vos", "descriptors", "users", "ads", "nodes"];
    let mut sections: BTreeMap<&str, Vec<(usize, &str)>> = BTreeMap::new();
    let mut current: Option<&str> = None;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = SECTIONS
                .iter()
                .find(|s| **s == name)
                .ok_or_else(|| err(n, format!("unknown section [{name}]")))?;
            if sections.contains_key(name) {
                return Err(err(n, format!("section [{name}] repeated")));
            }
            sections.insert(name, Vec::new());
            current = Some(name);
            continue;
        }
        let sec = current.ok_or_else(|| err(n, "entry before the first section"))?;
        sections.get_mut(sec).expect("section opened").push((n, line));
    }
    let lines = |s: &str| sections.get(s).cloned().unwrap_or_default();

    let mut options = RunOptions::default();
    let mut seen_opts = BTreeSet::new();
    for (n, l) in lines("options") {
        let (k, v) = l.split_once('=').ok_or_else(|| err(n, "expected key = value"))?;
        let (k, v) = (k.trim(), v.trim());
        if !seen_opts.insert(k.to_string()) {
            return Err(err(n, format!("duplicate option `{k}`")));
        }
        let num = |v: &str| v.parse::<u64>().map_err(|_| err(n, format!("`{k}` expects a non-negative integer")));
        match k {
            "scheduler" => options.scheduler = v.parse().map_err(|e: String| err(n, e))?,
            "seed" => options.seed = num(v)?,
            "max_steps" => options.max_steps = num(v)? as usize,
            "depth" => options.depth = num(v)? as usize,
            "trace" => options.trace = Some(PathBuf::from(v)),
            _ => return Err(err(n, format!("unknown option `{k}`"))),
        }
    }

    let mut cfg = GridConfig::default();
    for (n, l) in lines("vos") {
        insert_unique(&mut cfg.vos, l, "VO", n)?;
    }
    for (n, l) in lines("descriptors") {
        insert_unique(&mut cfg.descriptors, l, "descriptor", n)?;
    }
    for (n, l) in lines("nodes") {
        let e = entry(l, n, &["vo"])?;
        insert_unique(&mut cfg.nodes, &e.id, "node", n)?;
        for v in list(e.attrs.get("vo").map_or("", String::as_str)) {
            cfg.node_vo.insert((e.id.clone(), v));
        }
    }
    let mut ads = Vec::new();
    for (n, l) in lines("ads") {
        let e = entry(l, n, &["vos", "resources"])?;
        insert_unique(&mut cfg.ads, &e.id, "AD", n)?;
        ads.push(e);
    }
    for e in &ads {
        for v in list(e.attrs.get("vos").map_or("", String::as_str)) {
            cfg.participate.insert((e.id.clone(), v));
        }
        for r in list(e.attrs.get("resources").map_or("", String::as_str)) {
            let (r, k) = r
                .split_once(':')
                .ok_or_else(|| err(e.line, format!("resource `{r}` lacks a kind (id:kind)")))?;
            insert_unique(&mut cfg.resources, r, "resource", e.line)?;
            cfg.belongs_to.insert((r.to_string(), e.id.clone()));
            cfg.resource_kind.insert((r.to_string(), k.to_string()));
        }
    }
    for (k, (n, l)) in lines("users").into_iter().enumerate() {
        let e = entry(l, n, &["vo", "task", "creds", "node", "instance", "def"])?;
        insert_unique(&mut cfg.users, &e.id, "user", n)?;
        for v in list(e.attrs.get("vo").map_or("", String::as_str)) {
            cfg.member.insert((e.id.clone(), v));
        }
        if let Some(c) = e.attrs.get("creds") {
            cfg.credentials.insert(e.id.clone(), list(c));
        }
        if let Some(node) = e.attrs.get("node") {
            cfg.user_node.insert(e.id.clone(), node.clone());
        }
        if let Some(text) = e.attrs.get("task") {
            let t = parse_task(text, &cfg.descriptors).map_err(|g| err(n, g.to_string()))?;
            let inst = e.attrs.get("instance").cloned().unwrap_or_else(|| format!("S{}", k + 1));
            let def = e.attrs.get("def").cloned().unwrap_or_else(|| format!("Task{}", k + 1));
            if let Some(prev) = cfg.task_defs.get(&def) {
                if *prev != t {
                    return Err(err(n, format!("task definition {def} given twice with different bodies")));
                }
            }
            cfg.task_defs.insert(def.clone(), t);
            if let Some(prev) = cfg.user_tasks.get(&inst) {
                if *prev != def {
                    return Err(err(n, format!("task instance {inst} bound to two definitions")));
                }
            }
            cfg.user_tasks.insert(inst.clone(), def);
            cfg.task_of.insert((e.id.clone(), inst));
        }
    }
    cfg.validate().map_err(SimError::Grid)?;
    Ok(Scenario { config: cfg, options })
}

/// The canonical text of a scenario.
pub fn save_scenario(s: &Scenario) -> String {
    let c = &s.config;
    let o = &s.options;
    let mut out = String::from("[options]\n");
    out.push_str(&format!("scheduler = {}\n", o.scheduler));
    out.push_str(&format!("seed = {}\n", o.seed));
    out.push_str(&format!("max_steps = {}\n", o.max_steps));
    out.push_str(&format!("depth = {}\n", o.depth));
    if let Some(t) = &o.trace {
        out.push_str(&format!("trace = {}\n", t.display()));
    }
    let block = |out: &mut String, name: &str, ids: &BTreeSet<Id>| {
        out.push_str(&format!("\n[{name}]\n"));
        for i in ids {
            out.push_str(i);
            out.push('\n');
        }
    };
    block(&mut out, "vos", &c.vos);
    block(&mut out, "descriptors", &c.descriptors);
    out.push_str("\n[users]\n");
    for (k, u) in c.users.iter().enumerate() {
        let mut line = u.clone();
        let vos: Vec<&str> = c.vos_of(u).into_iter().map(String::as_str).collect();
        line.push_str(&format!(" vo={}", vos.join(",")));
        if let Some(inst) = c.task_instance_of(u) {
            if let Some(def) = c.user_tasks.get(inst) {
                if let Some(t) = c.task_defs.get(def) {
                    line.push_str(&format!(" task=\"{t}\""));
                }
                if *inst != format!("S{}", k + 1) {
                    line.push_str(&format!(" instance={inst}"));
                }
                if *def != format!("Task{}", k + 1) {
                    line.push_str(&format!(" def={def}"));
                }
            }
        }
        if let Some(cr) = c.credentials.get(u) {
            line.push_str(&format!(" creds={}", cr.join(",")));
        }
        if let Some(n) = c.user_node.get(u) {
            line.push_str(&format!(" node={n}"));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("\n[ads]\n");
    for d in &c.ads {
        let vos: Vec<&str> = c
            .participate
            .iter()
            .filter(|(x, _)| x == d)
            .map(|(_, v)| v.as_str())
            .collect();
        let res: Vec<String> = c.resources_of(d).into_iter().map(|(r, k)| format!("{r}:{k}")).collect();
        out.push_str(&format!("{d} vos={} resources={}\n", vos.join(","), res.join(",")));
    }
    out.push_str("\n[nodes]\n");
    for n in &c.nodes {
        let vos: Vec<&str> = c
            .node_vo
            .iter()
            .filter(|(x, _)| x == n)
            .map(|(_, v)| v.as_str())
            .collect();
        out.push_str(&format!("{n} vo={}\n", vos.join(",")));
    }
    out
}

fn read(path: &Path) -> Result<String, SimError> {
    std::fs::read_to_string(path).map_err(|e| SimError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Reads and parses a scenario without judging its invariants.
pub fn read_scenario(path: &Path) -> Result<Scenario, SimError> {
    parse_scenario(&read(path)?)
}

/// Reads a scenario and refuses it when the configuration breaks an
/// invariant the encoding depends on. Unsatisfiable jobs (I7) are returned
/// as warnings.
pub fn load_scenario(path: &Path) -> Result<(Scenario, Vec<Violation>), SimError> {
    let s = read_scenario(path)?;
    let warnings = admit(&s.config)?;
    Ok((s, warnings))
}

/// Splits the static findings of `cfg` into warnings (I7) and a refusal.
pub fn admit(cfg: &GridConfig) -> Result<Vec<Violation>, SimError> {
    let (warn, fatal): (Vec<_>, Vec<_>) = check_invariants(cfg)
        .violations
        .into_iter()
        .partition(|v| v.invariant == InvariantId::I7);
    if fatal.is_empty() {
        Ok(warn)
    } else {
        Err(SimError::Grid(GridError::InvariantViolation(InvariantReport { violations: fatal })))
    }
}

pub fn save_scenario_to(s: &Scenario, path: &Path) -> Result<(), SimError> {
    std::fs::write(path, save_scenario(s)).map_err(|e| SimError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
