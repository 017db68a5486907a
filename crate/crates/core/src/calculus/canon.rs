//! Canonical keys: a string rendering of a term that is invariant under
//! alpha-renaming, reordering of parallel components, permutation of sum
//! branches and permutation of adjacent restrictions.
//!
//! Free names render by id, bound names by binding position. Parallel
//! components under a restriction block are ordered by a structural key in
//! which the block's names are anonymous; the anonymous names are refined
//! once by the shape of their occurrences, and remaining ties are resolved
//! by trying every ordering of the tied group (up to [`MAX_CANDIDATES`]) and
//! keeping the least rendering. Beyond that cap the order is kept stable,
//! which can only make two congruent terms look different, never the
//! reverse.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use super::name::{Name, ProcVar};
use super::term::{Abstraction, Branch, Formal, Prefix, Process, Value};

const MAX_CANDIDATES: usize = 120;

/// Result of canonicalising one restriction block.
pub(crate) struct CanonLevel {
    /// Component indices in canonical order.
    pub order: Vec<usize>,
    /// Restricted names in canonical numbering order.
    pub names: Vec<Name>,
    pub key: String,
}

#[derive(Default)]
pub(crate) struct Keyer {
    names: Vec<(u64, String)>,
    vars: Vec<(u64, String)>,
    depth: usize,
}

impl Keyer {
    pub fn new() -> Self {
        Self::default()
    }

    fn name_tok(&self, n: &Name) -> String {
        self.names
            .iter()
            .rev()
            .find(|(id, _)| *id == n.id())
            .map(|(_, t)| t.clone())
            .unwrap_or_else(|| format!("n{}", n.id()))
    }

    fn var_tok(&self, v: &ProcVar) -> String {
        self.vars
            .iter()
            .rev()
            .find(|(id, _)| *id == v.id())
            .map(|(_, t)| t.clone())
            .unwrap_or_else(|| format!("V{}", v.id()))
    }

    pub fn mark(&self) -> (usize, usize, usize) {
        (self.names.len(), self.vars.len(), self.depth)
    }

    pub fn reset(&mut self, m: (usize, usize, usize)) {
        self.names.truncate(m.0);
        self.vars.truncate(m.1);
        self.depth = m.2;
    }

    pub fn push_name(&mut self, n: &Name, tok: String) {
        self.names.push((n.id(), tok));
    }

    /// Binds a formal tuple one level deeper; returns the rendering of the
    /// binder group.
    pub fn bind_formals(&mut self, formals: &[Formal]) -> String {
        let d = self.depth;
        self.depth += 1;
        let mut out = String::new();
        for (i, f) in formals.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            match f {
                Formal::Name(n) => {
                    let t = format!("b{d}.{i}");
                    out.push_str(&t);
                    self.names.push((n.id(), t));
                }
                Formal::Var(v) => {
                    let t = format!("w{d}.{i}");
                    out.push('@');
                    out.push_str(&t);
                    self.vars.push((v.id(), t));
                }
            }
        }
        out
    }

    /// Key of an arbitrary term in the current context.
    pub fn level(&mut self, p: &Process) -> String {
        let (names, comps) = collect_level(p);
        if comps.is_empty() {
            return "0".to_string();
        }
        if names.is_empty() {
            let mut keys: Vec<String> = comps.iter().map(|c| self.comp(c)).collect();
            keys.sort();
            return keys.join("|");
        }
        self.canon_level(&names, &comps).key
    }

    pub fn comp(&mut self, p: &Process) -> String {
        match p {
            Process::Sum(bs) if bs.is_empty() => "0".to_string(),
            Process::Sum(bs) => {
                let mut keys: Vec<String> = bs.iter().map(|b| self.branch(b)).collect();
                keys.sort();
                format!("S[{}]", keys.join("+"))
            }
            Process::Par(..) | Process::Restrict(..) => format!("({})", self.level(p)),
            Process::Cond {
                lhs,
                rhs,
                then_branch,
                else_branch,
            } => {
                let l = self.name_tok(lhs);
                let r = self.name_tok(rhs);
                let t = self.level(then_branch);
                let e = self.level(else_branch);
                format!("if({l}={r}){{{t}}}{{{e}}}")
            }
            Process::Call(d, args) => format!("D{d}<{}>", self.values(args)),
            Process::VarApp(x, args) => format!("X{}<{}>", self.var_tok(x), self.values(args)),
        }
    }

    pub fn branch(&mut self, b: &Branch) -> String {
        match &b.prefix {
            Prefix::Input { chan, formals } => {
                let c = self.name_tok(chan);
                let m = self.mark();
                let f = self.bind_formals(formals);
                let k = self.level(&b.cont);
                self.reset(m);
                format!("i{c}({f}).{k}")
            }
            Prefix::Output { chan, args } => {
                let c = self.name_tok(chan);
                let a = self.values(args);
                let k = self.level(&b.cont);
                format!("o{c}<{a}>.{k}")
            }
        }
    }

    fn values(&mut self, vs: &[Value]) -> String {
        let parts: Vec<String> = vs.iter().map(|v| self.value(v)).collect();
        parts.join(",")
    }

    fn value(&mut self, v: &Value) -> String {
        match v {
            Value::Name(n) => self.name_tok(n),
            Value::Proc(a) => self.abstraction(a),
        }
    }

    fn abstraction(&mut self, a: &Abstraction) -> String {
        let m = self.mark();
        let f = self.bind_formals(&a.params);
        let k = self.level(&a.body);
        self.reset(m);
        format!("{{({f}){k}}}")
    }

    /// Canonical ordering of the components of one restriction block.
    pub fn canon_level(&mut self, names: &[Name], comps: &[&Process]) -> CanonLevel {
        let m = self.mark();
        let d = self.depth;
        self.depth += 1;
        let inner = self.mark();
        let n = comps.len();

        let present: Vec<Vec<usize>> = comps
            .iter()
            .map(|c| {
                names
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| super::free::occurs_free(x, c))
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();

        let anon: Vec<String> = vec!["?".to_string(); names.len()];
        let k0 = self.keys_with(names, &anon, comps);
        let mut colors = anon;
        let mut sort_key = k0.clone();
        if has_relevant_ties(&k0, &present) {
            let mut refined = Vec::with_capacity(names.len());
            for j in 0..names.len() {
                let mut marks = Vec::new();
                for (i, c) in comps.iter().enumerate() {
                    if present[i].contains(&j) {
                        for (jj, x) in names.iter().enumerate() {
                            self.push_name(x, if jj == j { "!".into() } else { "?".into() });
                        }
                        marks.push(self.comp(c));
                        self.reset(inner);
                    }
                }
                marks.sort();
                refined.push(format!("?{:x}", stable_hash(&marks)));
            }
            colors = refined;
            sort_key = self.keys_with(names, &colors, comps);
        }

        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|a, b| sort_key[*a].cmp(&sort_key[*b]));

        let groups = tie_groups(&idx, &sort_key, &present);
        let candidates = candidate_orders(&idx, &groups);

        let mut best: Option<CanonLevel> = None;
        for cand in candidates {
            for (j, x) in names.iter().enumerate() {
                self.push_name(x, colors[j].clone());
            }
            let mut seen = Vec::new();
            for &i in &cand {
                self.occurrences(comps[i], names, &mut seen);
            }
            self.reset(inner);
            let ordered: Vec<Name> = seen.iter().map(|&j| names[j].clone()).collect();
            for (k, x) in ordered.iter().enumerate() {
                self.push_name(x, format!("r{d}.{k}"));
            }
            let parts: Vec<String> = cand.iter().map(|&i| self.comp(comps[i])).collect();
            self.reset(inner);
            let key = format!("v{}({})", ordered.len(), parts.join("|"));
            if best.as_ref().is_none_or(|b| key < b.key) {
                best = Some(CanonLevel {
                    order: cand,
                    names: ordered,
                    key,
                });
            }
        }
        self.reset(m);
        best.expect("at least one candidate ordering")
    }

    fn keys_with(&mut self, names: &[Name], toks: &[String], comps: &[&Process]) -> Vec<String> {
        let m = self.mark();
        for (x, t) in names.iter().zip(toks) {
            self.push_name(x, t.clone());
        }
        let ks = comps.iter().map(|c| self.comp(c)).collect();
        self.reset(m);
        ks
    }

    /// Appends indices of `names` in first-occurrence order, visiting sum
    /// branches in key order so the traversal is itself canonical.
    fn occurrences(&mut self, p: &Process, names: &[Name], seen: &mut Vec<usize>) {
        let note = |n: &Name, this: &Self, seen: &mut Vec<usize>| {
            if let Some(j) = names.iter().position(|x| x == n) {
                // shadowed occurrences carry a bound token
                let shadowed = this
                    .names
                    .iter()
                    .rev()
                    .find(|(id, _)| *id == n.id())
                    .is_some_and(|(_, t)| !t.starts_with('?'));
                if !shadowed && !seen.contains(&j) {
                    seen.push(j);
                }
            }
        };
        match p {
            Process::Sum(bs) => {
                let mut keyed: Vec<(String, &Branch)> = bs.iter().map(|b| (self.branch(b), b)).collect();
                keyed.sort_by(|a, b| a.0.cmp(&b.0));
                for (_, b) in keyed {
                    note(b.prefix.chan(), self, seen);
                    match &b.prefix {
                        Prefix::Input { formals, .. } => {
                            let m = self.mark();
                            self.bind_formals(formals);
                            self.occurrences(&b.cont, names, seen);
                            self.reset(m);
                        }
                        Prefix::Output { args, .. } => {
                            self.value_occurrences(args, names, seen);
                            self.occurrences(&b.cont, names, seen);
                        }
                    }
                }
            }
            Process::Par(l, r) => {
                self.occurrences(l, names, seen);
                self.occurrences(r, names, seen);
            }
            Process::Restrict(x, body) => {
                let m = self.mark();
                self.push_name(x, "#".into());
                self.occurrences(body, names, seen);
                self.reset(m);
            }
            Process::Cond {
                lhs,
                rhs,
                then_branch,
                else_branch,
            } => {
                note(lhs, self, seen);
                note(rhs, self, seen);
                self.occurrences(then_branch, names, seen);
                self.occurrences(else_branch, names, seen);
            }
            Process::Call(_, args) | Process::VarApp(_, args) => {
                self.value_occurrences(args, names, seen);
            }
        }
    }

    fn value_occurrences(&mut self, vs: &[Value], names: &[Name], seen: &mut Vec<usize>) {
        for v in vs {
            match v {
                Value::Name(n) => {
                    if let Some(j) = names.iter().position(|x| x == n) {
                        let shadowed = self
                            .names
                            .iter()
                            .rev()
                            .find(|(id, _)| *id == n.id())
                            .is_some_and(|(_, t)| !t.starts_with('?'));
                        if !shadowed && !seen.contains(&j) {
                            seen.push(j);
                        }
                    }
                }
                Value::Proc(a) => {
                    let m = self.mark();
                    self.bind_formals(&a.params);
                    self.occurrences(&a.body, names, seen);
                    self.reset(m);
                }
            }
        }
    }
}

/// Splits a term into the names restricted at its top and its parallel
/// components, dropping `0`s. No renaming: callers pass terms whose
/// restricted names are already distinct.
pub(crate) fn collect_level(p: &Process) -> (Vec<Name>, Vec<&Process>) {
    fn go<'a>(p: &'a Process, names: &mut Vec<Name>, comps: &mut Vec<&'a Process>) {
        match p {
            Process::Par(l, r) => {
                go(l, names, comps);
                go(r, names, comps);
            }
            Process::Restrict(x, body) => {
                names.push(x.clone());
                go(body, names, comps);
            }
            Process::Sum(bs) if bs.is_empty() => {}
            other => comps.push(other),
        }
    }
    let mut names = Vec::new();
    let mut comps = Vec::new();
    go(p, &mut names, &mut comps);
    (names, comps)
}

fn stable_hash<T: Hash>(t: &T) -> u64 {
    let mut h = DefaultHasher::new();
    t.hash(&mut h);
    h.finish()
}

fn has_relevant_ties(keys: &[String], present: &[Vec<usize>]) -> bool {
    for i in 0..keys.len() {
        if present[i].is_empty() {
            continue;
        }
        for j in (i + 1)..keys.len() {
            if keys[i] == keys[j] {
                return true;
            }
        }
    }
    // a single component mentioning several anonymous names can also be
    // numbered ambiguously, but its traversal order settles that
    false
}

/// Runs of equal keys (in sorted order) whose members mention restricted
/// names; only those need permuting.
fn tie_groups(idx: &[usize], keys: &[String], present: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && keys[idx[end]] == keys[idx[start]] {
            end += 1;
        }
        if end - start > 1 && !present[idx[start]].is_empty() {
            groups.push((start, end));
        }
        start = end;
    }
    groups
}

fn factorial(n: usize) -> usize {
    (1..=n).fold(1usize, |a, b| a.saturating_mul(b))
}

fn candidate_orders(idx: &[usize], groups: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let total = groups
        .iter()
        .fold(1usize, |acc, (s, e)| acc.saturating_mul(factorial(e - s)));
    if groups.is_empty() || total > MAX_CANDIDATES {
        return vec![idx.to_vec()];
    }
    let mut out = vec![idx.to_vec()];
    for &(s, e) in groups {
        let mut next = Vec::new();
        for base in &out {
            for perm in permutations(&base[s..e]) {
                let mut c = base.clone();
                c[s..e].copy_from_slice(&perm);
                next.push(c);
            }
        }
        out = next;
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Canonical key of a whole term (no enclosing binders).
pub fn canonical_key(p: &Process) -> String {
    Keyer::new().level(p)
}
