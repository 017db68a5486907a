//! Capture-avoiding substitution `P{K/U}`.
//!
//! Name formals map to names, process-variable formals map to abstractions.
//! Applying a substituted variable `X<K>` beta-reduces on the spot, so the
//! result never contains an application of a known abstraction.

use std::collections::{HashMap, HashSet};

use super::error::CalcError;
use super::free::{free_names_of_values, free_vars_of_values};
use super::name::{Name, NameSupply, ProcVar};
use super::term::{Abstraction, Branch, Formal, Prefix, Process, Value};

/// `body{args/formals}`. Checks arity and kinds positionally.
pub fn substitute(
    body: &Process,
    formals: &[Formal],
    args: &[Value],
    supply: &mut NameSupply,
) -> Result<Process, CalcError> {
    let map = SubstMap::bind(formals, args)?;
    map.apply(body, supply)
}

/// Applies an abstraction to arguments.
pub fn apply_abstraction(
    abs: &Abstraction,
    args: &[Value],
    supply: &mut NameSupply,
) -> Result<Process, CalcError> {
    substitute(&abs.body, &abs.params, args, supply)
}

#[derive(Clone)]
enum VarTarget {
    Rename(ProcVar),
    Abs(Abstraction),
}

/// A simultaneous substitution plus the set of identifiers its range
/// mentions freely (the capture-avoidance set).
#[derive(Clone, Default)]
struct SubstMap {
    names: HashMap<u64, Name>,
    vars: HashMap<u64, VarTarget>,
    avoid: HashSet<u64>,
}

impl SubstMap {
    fn bind(formals: &[Formal], args: &[Value]) -> Result<Self, CalcError> {
        if formals.len() != args.len() {
            return Err(CalcError::ArityMismatch {
                expected: formals.len(),
                found: args.len(),
            });
        }
        let mut map = SubstMap::default();
        for (i, (f, a)) in formals.iter().zip(args).enumerate() {
            match (f, a) {
                (Formal::Name(n), Value::Name(m)) => {
                    map.names.insert(n.id(), m.clone());
                }
                (Formal::Var(x), Value::Proc(abs)) => {
                    map.vars.insert(x.id(), VarTarget::Abs(abs.clone()));
                }
                _ => return Err(CalcError::KindMismatch { position: i }),
            }
        }
        map.avoid.extend(free_names_of_values(args).iter().map(Name::id));
        map.avoid.extend(free_vars_of_values(args).iter().map(ProcVar::id));
        Ok(map)
    }

    fn is_empty(&self) -> bool {
        self.names.is_empty() && self.vars.is_empty()
    }

    fn name(&self, n: &Name) -> Name {
        self.names.get(&n.id()).cloned().unwrap_or_else(|| n.clone())
    }

    /// Enters the scope of `formals`: shadowed keys are dropped and binders
    /// that would capture a name from the range are renamed apart.
    fn under_binders(&self, formals: &[Formal], supply: &mut NameSupply) -> (SubstMap, Vec<Formal>) {
        let mut inner = self.clone();
        let mut renamed = Vec::with_capacity(formals.len());
        for f in formals {
            match f {
                Formal::Name(n) => {
                    inner.names.remove(&n.id());
                    if inner.avoid.contains(&n.id()) {
                        let fresh = supply.freshen(n);
                        inner.names.insert(n.id(), fresh.clone());
                        inner.avoid.insert(fresh.id());
                        renamed.push(Formal::Name(fresh));
                    } else {
                        renamed.push(f.clone());
                    }
                }
                Formal::Var(x) => {
                    inner.vars.remove(&x.id());
                    if inner.avoid.contains(&x.id()) {
                        let fresh = supply.freshen_var(x);
                        inner.vars.insert(x.id(), VarTarget::Rename(fresh.clone()));
                        inner.avoid.insert(fresh.id());
                        renamed.push(Formal::Var(fresh));
                    } else {
                        renamed.push(f.clone());
                    }
                }
            }
        }
        (inner, renamed)
    }

    fn values(&self, vs: &[Value], supply: &mut NameSupply) -> Result<Vec<Value>, CalcError> {
        vs.iter().map(|v| self.value(v, supply)).collect()
    }

    fn value(&self, v: &Value, supply: &mut NameSupply) -> Result<Value, CalcError> {
        Ok(match v {
            Value::Name(n) => Value::Name(self.name(n)),
            Value::Proc(a) => {
                let (inner, params) = self.under_binders(&a.params, supply);
                Value::Proc(Abstraction::new(params, inner.apply(&a.body, supply)?))
            }
        })
    }

    fn apply(&self, p: &Process, supply: &mut NameSupply) -> Result<Process, CalcError> {
        if self.is_empty() {
            return Ok(p.clone());
        }
        Ok(match p {
            Process::Sum(bs) => {
                let mut out = Vec::with_capacity(bs.len());
                for b in bs {
                    out.push(match &b.prefix {
                        Prefix::Input { chan, formals } => {
                            let (inner, formals) = self.under_binders(formals, supply);
                            Branch {
                                prefix: Prefix::Input {
                                    chan: self.name(chan),
                                    formals,
                                },
                                cont: inner.apply(&b.cont, supply)?,
                            }
                        }
                        Prefix::Output { chan, args } => Branch {
                            prefix: Prefix::Output {
                                chan: self.name(chan),
                                args: self.values(args, supply)?,
                            },
                            cont: self.apply(&b.cont, supply)?,
                        },
                    });
                }
                Process::Sum(out)
            }
            Process::Par(l, r) => Process::par(self.apply(l, supply)?, self.apply(r, supply)?),
            Process::Restrict(n, body) => {
                let (inner, mut bound) = self.under_binders(&[Formal::Name(n.clone())], supply);
                let Some(Formal::Name(n2)) = bound.pop() else {
                    unreachable!("a name binder stays a name binder")
                };
                Process::restrict(n2, inner.apply(body, supply)?)
            }
            Process::Cond {
                lhs,
                rhs,
                then_branch,
                else_branch,
            } => Process::cond(
                self.name(lhs),
                self.name(rhs),
                self.apply(then_branch, supply)?,
                self.apply(else_branch, supply)?,
            ),
            Process::Call(d, args) => Process::Call(d.clone(), self.values(args, supply)?),
            Process::VarApp(x, args) => {
                let args = self.values(args, supply)?;
                match self.vars.get(&x.id()) {
                    None => Process::VarApp(x.clone(), args),
                    Some(VarTarget::Rename(y)) => Process::VarApp(y.clone(), args),
                    Some(VarTarget::Abs(abs)) => apply_abstraction(abs, &args, supply)?,
                }
            }
        })
    }
}
