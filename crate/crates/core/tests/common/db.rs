//! Nameless terms: every bound name or variable is the index of its binder
//! counted outward, free ones keep their identity. Alpha-equivalent terms
//! have equal representations, and substitution of closed values needs no
//! renaming at all.

use std::collections::HashMap;

use gridpi_core::calculus::{Abstraction, Branch, Formal, Prefix};
use gridpi_core::{Name, NameSupply, ProcVar, Process, Value};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ref {
    Free(u64),
    Bound(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DVal {
    Name(Ref),
    /// Parameter kinds (`true` for a process variable) and body.
    Abs(Vec<bool>, Box<Db>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DPre {
    In(Ref, Vec<bool>),
    Out(Ref, Vec<DVal>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Db {
    Sum(Vec<(DPre, Db)>),
    Par(Box<Db>, Box<Db>),
    Nu(Box<Db>),
    Cond(Ref, Ref, Box<Db>, Box<Db>),
    Call(String, Vec<DVal>),
    App(Ref, Vec<DVal>),
}

fn lookup(stack: &[u64], id: u64) -> Ref {
    match stack.iter().rev().position(|&b| b == id) {
        Some(i) => Ref::Bound(i),
        None => Ref::Free(id),
    }
}

fn kinds(fs: &[Formal]) -> Vec<bool> {
    fs.iter().map(Formal::is_var).collect()
}

pub fn to_db(p: &Process) -> Db {
    term(p, &mut Vec::new())
}

pub fn value_to_db(v: &Value) -> DVal {
    value(v, &mut Vec::new())
}

fn value(v: &Value, st: &mut Vec<u64>) -> DVal {
    match v {
        Value::Name(n) => DVal::Name(lookup(st, n.id())),
        Value::Proc(a) => {
            let m = st.len();
            st.extend(a.params.iter().map(Formal::id));
            let body = term(&a.body, st);
            st.truncate(m);
            DVal::Abs(kinds(&a.params), Box::new(body))
        }
    }
}

fn term(p: &Process, st: &mut Vec<u64>) -> Db {
    match p {
        Process::Sum(bs) => Db::Sum(
            bs.iter()
                .map(|b| match &b.prefix {
                    Prefix::Input { chan, formals } => {
                        let c = lookup(st, chan.id());
                        let m = st.len();
                        st.extend(formals.iter().map(Formal::id));
                        let k = term(&b.cont, st);
                        st.truncate(m);
                        (DPre::In(c, kinds(formals)), k)
                    }
                    Prefix::Output { chan, args } => (
                        DPre::Out(lookup(st, chan.id()), args.iter().map(|a| value(a, st)).collect()),
                        term(&b.cont, st),
                    ),
                })
                .collect(),
        ),
        Process::Par(a, b) => Db::Par(Box::new(term(a, st)), Box::new(term(b, st))),
        Process::Restrict(n, q) => {
            st.push(n.id());
            let body = term(q, st);
            st.pop();
            Db::Nu(Box::new(body))
        }
        Process::Cond {
            lhs,
            rhs,
            then_branch,
            else_branch,
        } => Db::Cond(
            lookup(st, lhs.id()),
            lookup(st, rhs.id()),
            Box::new(term(then_branch, st)),
            Box::new(term(else_branch, st)),
        ),
        Process::Call(d, vs) => Db::Call(d.to_string(), vs.iter().map(|v| value(v, st)).collect()),
        Process::VarApp(x, vs) => Db::App(lookup(st, x.id()), vs.iter().map(|v| value(v, st)).collect()),
    }
}

fn shift_ref(r: &Ref, by: usize, cut: usize) -> Ref {
    match r {
        Ref::Bound(i) if *i >= cut => Ref::Bound(i + by),
        r => r.clone(),
    }
}

fn shift_val(v: &DVal, by: usize, cut: usize) -> DVal {
    match v {
        DVal::Name(r) => DVal::Name(shift_ref(r, by, cut)),
        DVal::Abs(k, b) => DVal::Abs(k.clone(), Box::new(shift(b, by, cut + k.len()))),
    }
}

/// Adds `by` to every index that escapes `cut` binders.
pub fn shift(p: &Db, by: usize, cut: usize) -> Db {
    if by == 0 {
        return p.clone();
    }
    match p {
        Db::Sum(bs) => Db::Sum(
            bs.iter()
                .map(|(pre, k)| match pre {
                    DPre::In(c, ks) => (DPre::In(shift_ref(c, by, cut), ks.clone()), shift(k, by, cut + ks.len())),
                    DPre::Out(c, vs) => (
                        DPre::Out(shift_ref(c, by, cut), vs.iter().map(|v| shift_val(v, by, cut)).collect()),
                        shift(k, by, cut),
                    ),
                })
                .collect(),
        ),
        Db::Par(a, b) => Db::Par(Box::new(shift(a, by, cut)), Box::new(shift(b, by, cut))),
        Db::Nu(q) => Db::Nu(Box::new(shift(q, by, cut + 1))),
        Db::Cond(x, y, t, e) => Db::Cond(
            shift_ref(x, by, cut),
            shift_ref(y, by, cut),
            Box::new(shift(t, by, cut)),
            Box::new(shift(e, by, cut)),
        ),
        Db::Call(d, vs) => Db::Call(d.clone(), vs.iter().map(|v| shift_val(v, by, cut)).collect()),
        Db::App(x, vs) => Db::App(shift_ref(x, by, cut), vs.iter().map(|v| shift_val(v, by, cut)).collect()),
    }
}

/// What a reference resolves to while substituting.
enum Hit {
    Keep(Ref),
    Val(DVal),
}

/// A substitution: free identifiers mapped to closed values, plus (while
/// opening an abstraction body) its parameters mapped to values valid
/// outside the body.
struct Sub<'a> {
    free: &'a HashMap<u64, DVal>,
    params: Vec<DVal>,
}

impl Sub<'_> {
    fn resolve(&self, r: &Ref, depth: usize) -> Hit {
        match r {
            Ref::Free(x) => match self.free.get(x) {
                Some(v) => Hit::Val(shift_val(v, depth, 0)),
                None => Hit::Keep(r.clone()),
            },
            Ref::Bound(i) if *i < depth => Hit::Keep(r.clone()),
            Ref::Bound(i) => {
                let j = i - depth;
                let n = self.params.len();
                if j < n {
                    Hit::Val(shift_val(&self.params[n - 1 - j], depth, 0))
                } else {
                    Hit::Keep(Ref::Bound(j - n + depth))
                }
            }
        }
    }

    fn name(&self, r: &Ref, depth: usize) -> Ref {
        match self.resolve(r, depth) {
            Hit::Keep(r) => r,
            Hit::Val(DVal::Name(r)) => r,
            Hit::Val(DVal::Abs(..)) => panic!("process value in name position"),
        }
    }

    fn val(&self, v: &DVal, depth: usize) -> DVal {
        match v {
            DVal::Name(r) => match self.resolve(r, depth) {
                Hit::Keep(r) => DVal::Name(r),
                Hit::Val(v) => v,
            },
            DVal::Abs(k, b) => DVal::Abs(k.clone(), Box::new(self.term(b, depth + k.len()))),
        }
    }

    fn term(&self, p: &Db, depth: usize) -> Db {
        match p {
            Db::Sum(bs) => Db::Sum(
                bs.iter()
                    .map(|(pre, k)| match pre {
                        DPre::In(c, ks) => (DPre::In(self.name(c, depth), ks.clone()), self.term(k, depth + ks.len())),
                        DPre::Out(c, vs) => (
                            DPre::Out(self.name(c, depth), vs.iter().map(|v| self.val(v, depth)).collect()),
                            self.term(k, depth),
                        ),
                    })
                    .collect(),
            ),
            Db::Par(a, b) => Db::Par(Box::new(self.term(a, depth)), Box::new(self.term(b, depth))),
            Db::Nu(q) => Db::Nu(Box::new(self.term(q, depth + 1))),
            Db::Cond(x, y, t, e) => Db::Cond(
                self.name(x, depth),
                self.name(y, depth),
                Box::new(self.term(t, depth)),
                Box::new(self.term(e, depth)),
            ),
            Db::Call(d, vs) => Db::Call(d.clone(), vs.iter().map(|v| self.val(v, depth)).collect()),
            Db::App(x, vs) => {
                let args: Vec<DVal> = vs.iter().map(|v| self.val(v, depth)).collect();
                match self.resolve(x, depth) {
                    Hit::Keep(r) => Db::App(r, args),
                    Hit::Val(DVal::Abs(k, body)) => open(&body, k.len(), args),
                    Hit::Val(DVal::Name(_)) => panic!("name in variable position"),
                }
            }
        }
    }
}

/// Instantiates an abstraction body with `n` parameters; body and `args`
/// are both valid at the application site.
fn open(body: &Db, n: usize, args: Vec<DVal>) -> Db {
    assert_eq!(n, args.len(), "arity");
    let none = HashMap::new();
    Sub {
        free: &none,
        params: args,
    }
    .term(body, 0)
}

/// `p{vals/ids}` on nameless terms; applications of substituted process
/// variables are instantiated immediately.
pub fn subst(p: &Db, map: &HashMap<u64, DVal>) -> Db {
    Sub {
        free: map,
        params: Vec::new(),
    }
    .term(p, 0)
}

/// Free identifiers in order of first occurrence.
pub fn free_ids(p: &Db) -> Vec<u64> {
    fn r(x: &Ref, out: &mut Vec<u64>) {
        if let Ref::Free(i) = x {
            if !out.contains(i) {
                out.push(*i);
            }
        }
    }
    fn v(x: &DVal, out: &mut Vec<u64>) {
        match x {
            DVal::Name(x) => r(x, out),
            DVal::Abs(_, b) => go(b, out),
        }
    }
    fn go(p: &Db, out: &mut Vec<u64>) {
        match p {
            Db::Sum(bs) => {
                for (pre, k) in bs {
                    match pre {
                        DPre::In(c, _) => r(c, out),
                        DPre::Out(c, vs) => {
                            r(c, out);
                            vs.iter().for_each(|x| v(x, out));
                        }
                    }
                    go(k, out);
                }
            }
            Db::Par(a, b) => {
                go(a, out);
                go(b, out);
            }
            Db::Nu(q) => go(q, out),
            Db::Cond(x, y, t, e) => {
                r(x, out);
                r(y, out);
                go(t, out);
                go(e, out);
            }
            Db::Call(_, vs) => vs.iter().for_each(|x| v(x, out)),
            Db::App(x, vs) => {
                r(x, out);
                vs.iter().for_each(|x| v(x, out));
            }
        }
    }
    let mut out = Vec::new();
    go(p, &mut out);
    out
}

/// Free names and variables of the original terms, to rebuild processes.
#[derive(Default)]
pub struct Registry {
    names: HashMap<u64, Name>,
    vars: HashMap<u64, ProcVar>,
}

impl Registry {
    pub fn add_name(&mut self, n: &Name) {
        self.names.insert(n.id(), n.clone());
    }

    pub fn add_var(&mut self, x: &ProcVar) {
        self.vars.insert(x.id(), x.clone());
    }

    /// A process with fresh binders.
    pub fn build(&self, p: &Db, supply: &mut NameSupply) -> Process {
        self.proc(p, &mut Vec::new(), supply)
    }

    fn name(&self, r: &Ref, st: &[Formal]) -> Name {
        match r {
            Ref::Free(i) => self.names[i].clone(),
            Ref::Bound(i) => match &st[st.len() - 1 - i] {
                Formal::Name(n) => n.clone(),
                Formal::Var(_) => panic!("variable used as name"),
            },
        }
    }

    fn var(&self, r: &Ref, st: &[Formal]) -> ProcVar {
        match r {
            Ref::Free(i) => self.vars[i].clone(),
            Ref::Bound(i) => match &st[st.len() - 1 - i] {
                Formal::Var(x) => x.clone(),
                Formal::Name(_) => panic!("name used as variable"),
            },
        }
    }

    fn formals(ks: &[bool], supply: &mut NameSupply) -> Vec<Formal> {
        ks.iter()
            .map(|&v| if v { Formal::Var(supply.var("Y")) } else { Formal::Name(supply.name("x")) })
            .collect()
    }

    fn value(&self, v: &DVal, st: &mut Vec<Formal>, supply: &mut NameSupply) -> Value {
        match v {
            DVal::Name(r) => Value::Name(self.name(r, st)),
            DVal::Abs(ks, b) => {
                let fs = Self::formals(ks, supply);
                let m = st.len();
                st.extend(fs.iter().cloned());
                let body = self.proc(b, st, supply);
                st.truncate(m);
                Value::Proc(Abstraction::new(fs, body))
            }
        }
    }

    fn proc(&self, p: &Db, st: &mut Vec<Formal>, supply: &mut NameSupply) -> Process {
        match p {
            Db::Sum(bs) => Process::Sum(
                bs.iter()
                    .map(|(pre, k)| match pre {
                        DPre::In(c, ks) => {
                            let chan = self.name(c, st);
                            let fs = Self::formals(ks, supply);
                            let m = st.len();
                            st.extend(fs.iter().cloned());
                            let cont = self.proc(k, st, supply);
                            st.truncate(m);
                            Branch {
                                prefix: Prefix::Input { chan, formals: fs },
                                cont,
                            }
                        }
                        DPre::Out(c, vs) => Branch {
                            prefix: Prefix::Output {
                                chan: self.name(c, st),
                                args: vs.iter().map(|v| self.value(v, st, supply)).collect(),
                            },
                            cont: self.proc(k, st, supply),
                        },
                    })
                    .collect(),
            ),
            Db::Par(a, b) => Process::par(self.proc(a, st, supply), self.proc(b, st, supply)),
            Db::Nu(q) => {
                let n = supply.name("n");
                st.push(Formal::Name(n.clone()));
                let body = self.proc(q, st, supply);
                st.pop();
                Process::Restrict(n, Box::new(body))
            }
            Db::Cond(x, y, t, e) => Process::cond(
                self.name(x, st),
                self.name(y, st),
                self.proc(t, st, supply),
                self.proc(e, st, supply),
            ),
            Db::Call(d, vs) => Process::call(d, vs.iter().map(|v| self.value(v, st, supply)).collect()),
            Db::App(x, vs) => Process::VarApp(self.var(x, st), vs.iter().map(|v| self.value(v, st, supply)).collect()),
        }
    }
}

/// The body of an input continuation or abstraction with its `args.len()`
/// innermost binders replaced by closed `args`.
pub fn instantiate(body: &Db, args: Vec<DVal>) -> Db {
    open(body, args.len(), args)
}
