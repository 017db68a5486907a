//! Free names and free process variables.

use std::collections::BTreeSet;

use super::name::{Name, ProcVar};
use super::term::{Abstraction, Formal, Prefix, Process, Value};

/// Names occurring outside the scope of every input formal and restriction.
pub fn free_names(p: &Process) -> BTreeSet<Name> {
    let mut acc = FreeAcc::default();
    acc.process(p);
    acc.names
}

/// Process variables occurring outside the scope of every binder.
pub fn free_vars(p: &Process) -> BTreeSet<ProcVar> {
    let mut acc = FreeAcc::default();
    acc.process(p);
    acc.vars
}

pub fn free_names_of_values(vs: &[Value]) -> BTreeSet<Name> {
    let mut acc = FreeAcc::default();
    for v in vs {
        acc.value(v);
    }
    acc.names
}

pub fn free_vars_of_values(vs: &[Value]) -> BTreeSet<ProcVar> {
    let mut acc = FreeAcc::default();
    for v in vs {
        acc.value(v);
    }
    acc.vars
}

/// Whether `name` occurs free in `p`, without building the whole set.
pub fn occurs_free(name: &Name, p: &Process) -> bool {
    fn values(name: &Name, vs: &[Value]) -> bool {
        vs.iter().any(|v| match v {
            Value::Name(n) => n == name,
            Value::Proc(a) => !binds(name, &a.params) && go(name, &a.body),
        })
    }
    fn binds(name: &Name, fs: &[Formal]) -> bool {
        fs.iter().any(|f| matches!(f, Formal::Name(n) if n == name))
    }
    fn go(name: &Name, p: &Process) -> bool {
        match p {
            Process::Sum(bs) => bs.iter().any(|b| match &b.prefix {
                Prefix::Input { chan, formals } => {
                    chan == name || (!binds(name, formals) && go(name, &b.cont))
                }
                Prefix::Output { chan, args } => {
                    chan == name || values(name, args) || go(name, &b.cont)
                }
            }),
            Process::Par(l, r) => go(name, l) || go(name, r),
            Process::Restrict(n, body) => n != name && go(name, body),
            Process::Cond {
                lhs,
                rhs,
                then_branch,
                else_branch,
            } => lhs == name || rhs == name || go(name, then_branch) || go(name, else_branch),
            Process::Call(_, args) | Process::VarApp(_, args) => values(name, args),
        }
    }
    go(name, p)
}

#[derive(Default)]
struct FreeAcc {
    names: BTreeSet<Name>,
    vars: BTreeSet<ProcVar>,
    bound_names: Vec<Name>,
    bound_vars: Vec<ProcVar>,
}

impl FreeAcc {
    fn name(&mut self, n: &Name) {
        if !self.bound_names.contains(n) {
            self.names.insert(n.clone());
        }
    }

    fn var(&mut self, v: &ProcVar) {
        if !self.bound_vars.contains(v) {
            self.vars.insert(v.clone());
        }
    }

    fn with_formals(&mut self, formals: &[Formal], f: impl FnOnce(&mut Self)) {
        let (nl, vl) = (self.bound_names.len(), self.bound_vars.len());
        for fm in formals {
            match fm {
                Formal::Name(n) => self.bound_names.push(n.clone()),
                Formal::Var(v) => self.bound_vars.push(v.clone()),
            }
        }
        f(self);
        self.bound_names.truncate(nl);
        self.bound_vars.truncate(vl);
    }

    fn value(&mut self, v: &Value) {
        match v {
            Value::Name(n) => self.name(n),
            Value::Proc(a) => self.abstraction(a),
        }
    }

    fn abstraction(&mut self, a: &Abstraction) {
        self.with_formals(&a.params, |s| s.process(&a.body));
    }

    fn process(&mut self, p: &Process) {
        match p {
            Process::Sum(bs) => {
                for b in bs {
                    match &b.prefix {
                        Prefix::Input { chan, formals } => {
                            self.name(chan);
                            self.with_formals(formals, |s| s.process(&b.cont));
                        }
                        Prefix::Output { chan, args } => {
                            self.name(chan);
                            for a in args {
                                self.value(a);
                            }
                            self.process(&b.cont);
                        }
                    }
                }
            }
            Process::Par(l, r) => {
                self.process(l);
                self.process(r);
            }
            Process::Restrict(n, body) => {
                self.bound_names.push(n.clone());
                self.process(body);
                self.bound_names.pop();
            }
            Process::Cond {
                lhs,
                rhs,
                then_branch,
                else_branch,
            } => {
                self.name(lhs);
                self.name(rhs);
                self.process(then_branch);
                self.process(else_branch);
            }
            Process::Call(_, args) => {
                for a in args {
                    self.value(a);
                }
            }
            Process::VarApp(x, args) => {
                self.var(x);
                for a in args {
                    self.value(a);
                }
            }
        }
    }
}
