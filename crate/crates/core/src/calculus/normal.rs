//! Standard form `(new x~)(C1 | ... | Cn)`.
//!
//! Restrictions are lifted out of parallel compositions (renaming on clash),
//! restrictions of unused names are dropped, `0` components vanish, `Par` is
//! flattened, and components and sum branches are put in canonical order.
//! `if x=x` is resolved everywhere; `if x=y` with distinct names only when
//! it stands unguarded, since inside a prefix a later substitution may still
//! identify the two names. Calls are never unfolded here.

use sha2::{Digest, Sha256};

use super::canon::{canonical_key, collect_level, Keyer};
use super::free::{free_names, occurs_free};
use super::name::{Name, NameSupply};
use super::subst::substitute;
use super::term::{Abstraction, Branch, Formal, Prefix, Process, Value};

/// Normal form of `p`. Idempotent.
pub fn normalize(p: &Process, supply: &mut NameSupply) -> Process {
    let mut n = Normalizer {
        supply,
        keyer: Keyer::new(),
    };
    n.level(p, true)
}

/// Whether the normal forms of `p` and `q` are alpha-equivalent.
pub fn congruent(p: &Process, q: &Process, supply: &mut NameSupply) -> bool {
    canonical_key(&normalize(p, supply)) == canonical_key(&normalize(q, supply))
}

/// Short stable fingerprint of a canonical key.
pub fn digest_key(key: &str) -> String {
    let h = Sha256::digest(key.as_bytes());
    h.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Drops top-level components that can never interact again: every branch
/// of a sum listens or speaks on a restricted name that no other component
/// mentions. Repeats until stable, then drops unused restrictions.
pub fn collect_garbage(p: &Process) -> Process {
    let (names, comps) = collect_level(p);
    let mut comps: Vec<Process> = comps.into_iter().cloned().collect();
    loop {
        let dead = (0..comps.len()).find(|&i| {
            let Process::Sum(bs) = &comps[i] else { return false };
            !bs.is_empty()
                && bs.iter().all(|b| {
                    let c = b.prefix.chan();
                    names.contains(c)
                        && comps
                            .iter()
                            .enumerate()
                            .all(|(j, other)| j == i || !occurs_free(c, other))
                })
        });
        match dead {
            Some(i) => {
                comps.remove(i);
            }
            None => break,
        }
    }
    let live: Vec<Name> = names
        .into_iter()
        .filter(|x| comps.iter().any(|c| occurs_free(x, c)))
        .collect();
    Process::restrict_all(live, Process::par_all(comps))
}

struct Normalizer<'a> {
    supply: &'a mut NameSupply,
    keyer: Keyer,
}

impl Normalizer<'_> {
    /// Normalises one restriction block.
    fn level(&mut self, p: &Process, top: bool) -> Process {
        let (names, raw) = self.flatten(p, top);
        let m = self.keyer.mark();
        for x in &names {
            self.keyer.push_name(x, "?".into());
        }
        let comps: Vec<Process> = raw.iter().map(|c| self.component(c)).collect();
        self.keyer.reset(m);
        let comps: Vec<Process> = comps.into_iter().filter(|c| !c.is_nil()).collect();
        let names: Vec<Name> = names
            .into_iter()
            .filter(|x| comps.iter().any(|c| occurs_free(x, c)))
            .collect();
        if comps.is_empty() {
            return Process::nil();
        }
        if names.is_empty() {
            let mut keyed: Vec<(String, Process)> =
                comps.into_iter().map(|c| (self.keyer.comp(&c), c)).collect();
            keyed.sort_by(|a, b| a.0.cmp(&b.0));
            return Process::par_all(keyed.into_iter().map(|(_, c)| c));
        }
        let refs: Vec<&Process> = comps.iter().collect();
        let canon = self.keyer.canon_level(&names, &refs);
        let ordered = canon.order.iter().map(|&i| comps[i].clone());
        Process::restrict_all(canon.names, Process::par_all(ordered))
    }

    /// Restricted names and raw components of `p`, with clashing binders
    /// renamed apart and unguarded conditionals resolved.
    fn flatten(&mut self, p: &Process, top: bool) -> (Vec<Name>, Vec<Process>) {
        match p {
            Process::Sum(bs) if bs.is_empty() => (vec![], vec![]),
            Process::Par(l, r) => {
                let a = self.flatten(l, top);
                let b = self.flatten(r, top);
                self.merge(a, b)
            }
            Process::Restrict(x, body) => {
                let (mut names, comps) = self.flatten(body, top);
                if !names.contains(x) {
                    names.push(x.clone());
                }
                (names, comps)
            }
            Process::Cond {
                lhs,
                rhs,
                then_branch,
                else_branch,
            } => {
                if lhs == rhs {
                    self.flatten(then_branch, top)
                } else if top {
                    self.flatten(else_branch, top)
                } else {
                    (vec![], vec![p.clone()])
                }
            }
            other => (vec![], vec![other.clone()]),
        }
    }

    fn merge(
        &mut self,
        (mut n1, mut c1): (Vec<Name>, Vec<Process>),
        (mut n2, mut c2): (Vec<Name>, Vec<Process>),
    ) -> (Vec<Name>, Vec<Process>) {
        let fn2: Vec<Name> = c2.iter().flat_map(free_names).collect();
        for x in n1.iter_mut() {
            if n2.contains(x) || fn2.contains(x) {
                let fresh = self.supply.freshen(x);
                rename(&mut c1, x, &fresh, self.supply);
                *x = fresh;
            }
        }
        let fn1: Vec<Name> = c1.iter().flat_map(free_names).collect();
        for y in n2.iter_mut() {
            if fn1.contains(y) {
                let fresh = self.supply.freshen(y);
                rename(&mut c2, y, &fresh, self.supply);
                *y = fresh;
            }
        }
        n1.append(&mut n2);
        c1.append(&mut c2);
        (n1, c1)
    }

    fn component(&mut self, p: &Process) -> Process {
        match p {
            Process::Sum(bs) => {
                let branches: Vec<Branch> = bs.iter().map(|b| self.branch(b)).collect();
                let mut keyed: Vec<(String, Branch)> = branches
                    .into_iter()
                    .map(|b| (self.keyer.branch(&b), b))
                    .collect();
                keyed.sort_by(|a, b| a.0.cmp(&b.0));
                Process::Sum(keyed.into_iter().map(|(_, b)| b).collect())
            }
            Process::Cond {
                lhs,
                rhs,
                then_branch,
                else_branch,
            } => Process::cond(
                lhs.clone(),
                rhs.clone(),
                self.level(then_branch, false),
                self.level(else_branch, false),
            ),
            Process::Call(d, args) => Process::Call(d.clone(), self.values(args)),
            Process::VarApp(x, args) => Process::VarApp(x.clone(), self.values(args)),
            Process::Par(..) | Process::Restrict(..) => self.level(p, false),
        }
    }

    fn branch(&mut self, b: &Branch) -> Branch {
        match &b.prefix {
            Prefix::Input { formals, .. } => {
                let m = self.keyer.mark();
                self.keyer.bind_formals(formals);
                let cont = self.level(&b.cont, false);
                self.keyer.reset(m);
                Branch {
                    prefix: b.prefix.clone(),
                    cont,
                }
            }
            Prefix::Output { chan, args } => Branch {
                prefix: Prefix::Output {
                    chan: chan.clone(),
                    args: self.values(args),
                },
                cont: self.level(&b.cont, false),
            },
        }
    }

    fn values(&mut self, vs: &[Value]) -> Vec<Value> {
        vs.iter()
            .map(|v| match v {
                Value::Name(n) => Value::Name(n.clone()),
                Value::Proc(a) => {
                    let m = self.keyer.mark();
                    self.keyer.bind_formals(&a.params);
                    let body = self.level(&a.body, false);
                    self.keyer.reset(m);
                    Value::Proc(Abstraction::new(a.params.clone(), body))
                }
            })
            .collect()
    }
}

fn rename(comps: &mut [Process], from: &Name, to: &Name, supply: &mut NameSupply) {
    let formals = [Formal::Name(from.clone())];
    let args = [Value::Name(to.clone())];
    for c in comps.iter_mut() {
        if occurs_free(from, c) {
            *c = substitute(c, &formals, &args, supply).expect("name-for-name substitution");
        }
    }
}
