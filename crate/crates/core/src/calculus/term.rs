//! Abstract syntax of higher-order pi-calculus processes.

use std::sync::Arc;

use super::name::{Name, ProcVar};

/// Identifier of a parametric definition `D(U) = P`.
pub type DefId = Arc<str>;

/// An input formal: binds either a name or a process variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formal {
    Name(Name),
    Var(ProcVar),
}

impl Formal {
    pub fn is_var(&self) -> bool {
        matches!(self, Formal::Var(_))
    }

    pub fn id(&self) -> u64 {
        match self {
            Formal::Name(n) => n.id(),
            Formal::Var(v) => v.id(),
        }
    }
}

/// A process value: a (possibly parameterised) process. A plain process is
/// an abstraction with no parameters. Applying `X<K>` to an abstraction
/// `(U)P` yields `P{K/U}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Abstraction {
    pub params: Vec<Formal>,
    pub body: Box<Process>,
}

impl Abstraction {
    pub fn new(params: Vec<Formal>, body: Process) -> Self {
        Abstraction {
            params,
            body: Box::new(body),
        }
    }

    pub fn plain(body: Process) -> Self {
        Abstraction::new(Vec::new(), body)
    }
}

/// A communicated value: a name or a process.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Name(Name),
    Proc(Abstraction),
}

impl Value {
    pub fn is_proc(&self) -> bool {
        matches!(self, Value::Proc(_))
    }

    pub fn as_name(&self) -> Option<&Name> {
        match self {
            Value::Name(n) => Some(n),
            Value::Proc(_) => None,
        }
    }
}

impl From<Name> for Value {
    fn from(n: Name) -> Self {
        Value::Name(n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Prefix {
    Input { chan: Name, formals: Vec<Formal> },
    Output { chan: Name, args: Vec<Value> },
}

impl Prefix {
    pub fn chan(&self) -> &Name {
        match self {
            Prefix::Input { chan, .. } | Prefix::Output { chan, .. } => chan,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Prefix::Input { formals, .. } => formals.len(),
            Prefix::Output { args, .. } => args.len(),
        }
    }

    pub fn is_input(&self) -> bool {
        matches!(self, Prefix::Input { .. })
    }
}

/// One summand `alpha.P` of a guarded choice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub prefix: Prefix,
    pub cont: Process,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Process {
    /// Guarded choice; no branches is the inert process.
    Sum(Vec<Branch>),
    Par(Box<Process>, Box<Process>),
    Restrict(Name, Box<Process>),
    Cond {
        lhs: Name,
        rhs: Name,
        then_branch: Box<Process>,
        else_branch: Box<Process>,
    },
    Call(DefId, Vec<Value>),
    VarApp(ProcVar, Vec<Value>),
}

impl Process {
    pub fn nil() -> Self {
        Process::Sum(Vec::new())
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Process::Sum(b) if b.is_empty())
    }

    pub fn input(chan: Name, formals: Vec<Formal>, cont: Process) -> Self {
        Process::Sum(vec![Branch {
            prefix: Prefix::Input { chan, formals },
            cont,
        }])
    }

    pub fn output(chan: Name, args: Vec<Value>, cont: Process) -> Self {
        Process::Sum(vec![Branch {
            prefix: Prefix::Output { chan, args },
            cont,
        }])
    }

    pub fn par(left: Process, right: Process) -> Self {
        Process::Par(Box::new(left), Box::new(right))
    }

    /// Right-nested parallel composition; the empty product is `0`.
    pub fn par_all<I: IntoIterator<Item = Process>>(items: I) -> Self {
        let mut items: Vec<Process> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Process::nil();
        };
        while let Some(p) = items.pop() {
            acc = Process::par(p, acc);
        }
        acc
    }

    pub fn restrict(name: Name, body: Process) -> Self {
        Process::Restrict(name, Box::new(body))
    }

    pub fn restrict_all<I>(names: I, body: Process) -> Self
    where
        I: IntoIterator<Item = Name>,
        I::IntoIter: DoubleEndedIterator,
    {
        names
            .into_iter()
            .rev()
            .fold(body, |acc, n| Process::restrict(n, acc))
    }

    pub fn cond(lhs: Name, rhs: Name, then_branch: Process, else_branch: Process) -> Self {
        Process::Cond {
            lhs,
            rhs,
            then_branch: Box::new(then_branch),
            else_branch: Box::new(else_branch),
        }
    }

    pub fn call(def: &str, args: Vec<Value>) -> Self {
        Process::Call(Arc::from(def), args)
    }

    /// Flattened parallel components (no `0` filtering).
    pub fn components(&self) -> Vec<&Process> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Process, out: &mut Vec<&'a Process>) {
            match p {
                Process::Par(l, r) => {
                    go(l, out);
                    go(r, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Splits a term into its leading restrictions and the body under them.
    pub fn strip_restrictions(&self) -> (Vec<&Name>, &Process) {
        let mut names = Vec::new();
        let mut cur = self;
        while let Process::Restrict(n, body) = cur {
            names.push(n);
            cur = body;
        }
        (names, cur)
    }

    /// Number of syntax nodes, used to bound generators and benches.
    pub fn size(&self) -> usize {
        match self {
            Process::Sum(bs) => {
                1 + bs
                    .iter()
                    .map(|b| 1 + prefix_size(&b.prefix) + b.cont.size())
                    .sum::<usize>()
            }
            Process::Par(l, r) => 1 + l.size() + r.size(),
            Process::Restrict(_, b) => 1 + b.size(),
            Process::Cond {
                then_branch,
                else_branch,
                ..
            } => 1 + then_branch.size() + else_branch.size(),
            Process::Call(_, args) | Process::VarApp(_, args) => 1 + values_size(args),
        }
    }
}

fn prefix_size(p: &Prefix) -> usize {
    match p {
        Prefix::Input { formals, .. } => formals.len(),
        Prefix::Output { args, .. } => values_size(args),
    }
}

fn values_size(vs: &[Value]) -> usize {
    vs.iter()
        .map(|v| match v {
            Value::Name(_) => 1,
            Value::Proc(a) => 1 + a.body.size(),
        })
        .sum()
}
