//! Redex enumeration and single-step reduction on normal forms.
//!
//! Redexes are addressed by the index of a top-level parallel component of
//! the normal form. A component that is a call to a definition whose body is
//! a single guarded choice is looked through: its branches take part in
//! communication directly, so protocol states stay folded as calls.

use std::sync::Arc;

use super::canon::collect_level;
use super::env::DefinitionEnv;
use super::error::CalcError;
use super::name::{Name, NameSupply};
use super::normal::{collect_garbage, congruent, normalize};
use super::subst::substitute;
use super::term::{Branch, DefId, Formal, Prefix, Process, Value};

/// One side of a communication.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Site {
    /// Index among the top-level components.
    pub comp: usize,
    /// Branch index within the component's sum (or its unfolded body).
    pub branch: usize,
    /// Whether the component is a call looked through.
    pub via_call: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Redex {
    Comm { input: Site, output: Site, chan: Name },
    CondResolve { comp: usize, then_branch: bool },
    Unfold { comp: usize, def: DefId },
}

impl Redex {
    pub fn kind(&self) -> &'static str {
        match self {
            Redex::Comm { .. } => "comm",
            Redex::CondResolve { .. } => "cond",
            Redex::Unfold { .. } => "unfold",
        }
    }

    pub fn channel(&self) -> Option<&Name> {
        match self {
            Redex::Comm { chan, .. } => Some(chan),
            _ => None,
        }
    }
}

/// The branches a top-level component offers, with the restrictions of an
/// unfolded body (already freshened).
struct View {
    names: Vec<Name>,
    branches: Vec<Branch>,
    via_call: bool,
}

fn view(comp: &Process, env: &DefinitionEnv, supply: &mut NameSupply) -> Result<Option<View>, CalcError> {
    match comp {
        Process::Sum(bs) => Ok(Some(View {
            names: vec![],
            branches: bs.clone(),
            via_call: false,
        })),
        Process::Call(d, args) if env.is_guarded_state(d) => {
            let body = env.unfold(d, args, supply)?;
            let (names, inner) = body.strip_restrictions();
            let mut inner = inner.clone();
            let mut fresh_names = Vec::with_capacity(names.len());
            for x in names {
                let fresh = supply.freshen(x);
                inner = substitute(
                    &inner,
                    &[Formal::Name(x.clone())],
                    &[Value::Name(fresh.clone())],
                    supply,
                )?;
                fresh_names.push(fresh);
            }
            let Process::Sum(bs) = inner else {
                unreachable!("guarded state bodies are sums")
            };
            Ok(Some(View {
                names: fresh_names,
                branches: bs,
                via_call: true,
            }))
        }
        _ => Ok(None),
    }
}

fn kinds_match(formals: &[Formal], args: &[Value]) -> bool {
    formals.len() == args.len() && formals.iter().zip(args).all(|(f, a)| f.is_var() == a.is_proc())
}

/// All redexes of a normal form, in component order.
pub fn enumerate_redexes(
    p: &Process,
    env: &DefinitionEnv,
    supply: &mut NameSupply,
) -> Result<Vec<Redex>, CalcError> {
    let (_, comps) = collect_level(p);
    let mut views = Vec::with_capacity(comps.len());
    for c in &comps {
        views.push(view(c, env, supply)?);
    }
    let mut out = Vec::new();
    for (i, vi) in views.iter().enumerate() {
        let Some(vi) = vi else { continue };
        for (bi, b) in vi.branches.iter().enumerate() {
            let Prefix::Input { chan, formals } = &b.prefix else { continue };
            for (j, vj) in views.iter().enumerate() {
                let Some(vj) = vj else { continue };
                if i == j {
                    continue;
                }
                for (bo, o) in vj.branches.iter().enumerate() {
                    let Prefix::Output { chan: c2, args } = &o.prefix else { continue };
                    if c2 == chan && kinds_match(formals, args) {
                        out.push(Redex::Comm {
                            input: Site {
                                comp: i,
                                branch: bi,
                                via_call: vi.via_call,
                            },
                            output: Site {
                                comp: j,
                                branch: bo,
                                via_call: vj.via_call,
                            },
                            chan: chan.clone(),
                        });
                    }
                }
            }
        }
    }
    for (i, c) in comps.iter().enumerate() {
        match c {
            Process::Cond { lhs, rhs, .. } => out.push(Redex::CondResolve {
                comp: i,
                then_branch: lhs == rhs,
            }),
            Process::Call(d, _) => out.push(Redex::Unfold {
                comp: i,
                def: d.clone(),
            }),
            _ => {}
        }
    }
    Ok(out)
}

fn stale(msg: impl Into<String>) -> CalcError {
    CalcError::StaleRedex(msg.into())
}

/// Fires `r` on the normal form `p`; the result is normalised.
pub fn reduce_step(
    p: &Process,
    r: &Redex,
    env: &DefinitionEnv,
    supply: &mut NameSupply,
) -> Result<Process, CalcError> {
    let (names, comps) = collect_level(p);
    let mut comps: Vec<Process> = comps.into_iter().cloned().collect();
    let mut names: Vec<Name> = names;
    match r {
        Redex::Comm { input, output, chan } => {
            if input.comp == output.comp || input.comp >= comps.len() || output.comp >= comps.len() {
                return Err(stale("component index out of range"));
            }
            let vi = view(&comps[input.comp], env, supply)?.ok_or_else(|| stale("input side is not a sum"))?;
            let vo = view(&comps[output.comp], env, supply)?.ok_or_else(|| stale("output side is not a sum"))?;
            if vi.via_call != input.via_call || vo.via_call != output.via_call {
                return Err(stale("component shape changed"));
            }
            let bi = vi.branches.get(input.branch).ok_or_else(|| stale("no such input branch"))?;
            let bo = vo.branches.get(output.branch).ok_or_else(|| stale("no such output branch"))?;
            let (Prefix::Input { chan: ci, formals }, Prefix::Output { chan: co, args }) = (&bi.prefix, &bo.prefix)
            else {
                return Err(stale("branch polarity mismatch"));
            };
            if ci != chan || co != chan {
                return Err(stale("channel mismatch"));
            }
            let received = substitute(&bi.cont, formals, args, supply)?;
            let sent = bo.cont.clone();
            let (lo, hi) = if input.comp < output.comp {
                (input.comp, output.comp)
            } else {
                (output.comp, input.comp)
            };
            comps.remove(hi);
            comps.remove(lo);
            names.extend(vi.names);
            names.extend(vo.names);
            comps.push(received);
            comps.push(sent);
        }
        Redex::CondResolve { comp, then_branch } => {
            let Some(Process::Cond {
                lhs,
                rhs,
                then_branch: t,
                else_branch: e,
            }) = comps.get(*comp)
            else {
                return Err(stale("not a conditional"));
            };
            if (lhs == rhs) != *then_branch {
                return Err(stale("conditional outcome differs"));
            }
            let chosen = if *then_branch { (**t).clone() } else { (**e).clone() };
            comps[*comp] = chosen;
        }
        Redex::Unfold { comp, def } => {
            let Some(Process::Call(d, args)) = comps.get(*comp) else {
                return Err(stale("not a call"));
            };
            if d != def {
                return Err(stale("different definition"));
            }
            comps[*comp] = env.unfold(d, args, supply)?;
        }
    }
    Ok(normalize(&Process::restrict_all(names, Process::par_all(comps)), supply))
}

/// A definition environment plus the fresh-name supply of one reducer.
#[derive(Clone, Debug)]
pub struct Engine {
    env: Arc<DefinitionEnv>,
    supply: NameSupply,
}

impl Engine {
    pub fn new(env: Arc<DefinitionEnv>, supply: NameSupply) -> Self {
        Self { env, supply }
    }

    pub fn env(&self) -> &DefinitionEnv {
        &self.env
    }

    pub fn env_arc(&self) -> Arc<DefinitionEnv> {
        self.env.clone()
    }

    pub fn supply(&mut self) -> &mut NameSupply {
        &mut self.supply
    }

    /// Normal form, after checking every call against the environment.
    pub fn normalize(&mut self, p: &Process) -> Result<Process, CalcError> {
        self.env.check_calls(p)?;
        Ok(normalize(p, &mut self.supply))
    }

    pub fn congruent(&mut self, p: &Process, q: &Process) -> bool {
        congruent(p, q, &mut self.supply)
    }

    pub fn redexes(&mut self, p: &Process) -> Result<Vec<Redex>, CalcError> {
        enumerate_redexes(p, &self.env, &mut self.supply)
    }

    pub fn step(&mut self, p: &Process, r: &Redex) -> Result<Process, CalcError> {
        reduce_step(p, r, &self.env, &mut self.supply)
    }

    /// Whether `r` only rearranges structure: resolving a conditional, or
    /// unfolding a call that is not a folded protocol state.
    pub fn is_administrative(&self, r: &Redex) -> bool {
        match r {
            Redex::Comm { .. } => false,
            Redex::CondResolve { .. } => true,
            Redex::Unfold { def, .. } => !self.env.is_guarded_state(def),
        }
    }

    /// Fires administrative redexes until none is left, then collects
    /// garbage. Terminates because recursion is guarded.
    pub fn settle(&mut self, p: &Process) -> Result<Process, CalcError> {
        let mut cur = p.clone();
        loop {
            let next = self
                .redexes(&cur)?
                .into_iter()
                .find(|r| !matches!(r, Redex::Comm { .. }) && self.is_administrative(r));
            match next {
                Some(r) => cur = self.step(&cur, &r)?,
                None => break,
            }
        }
        Ok(normalize(&collect_garbage(&cur), &mut self.supply))
    }

    /// Values sent by a communication redex, empty for other kinds.
    pub fn payload(&mut self, p: &Process, r: &Redex) -> Result<Vec<Value>, CalcError> {
        let Redex::Comm { output, .. } = r else {
            return Ok(Vec::new());
        };
        let (_, comps) = collect_level(p);
        let comp = comps.get(output.comp).ok_or_else(|| stale("component index out of range"))?;
        let v = view(comp, &self.env, &mut self.supply)?.ok_or_else(|| stale("output side is not a sum"))?;
        match v.branches.get(output.branch).map(|b| &b.prefix) {
            Some(Prefix::Output { args, .. }) => Ok(args.clone()),
            _ => Err(stale("no such output branch")),
        }
    }

    /// Communication redexes of a settled term.
    pub fn moves(&mut self, p: &Process) -> Result<Vec<Redex>, CalcError> {
        Ok(self
            .redexes(p)?
            .into_iter()
            .filter(|r| matches!(r, Redex::Comm { .. }))
            .collect())
    }

    /// Fires a communication and settles the result.
    pub fn advance(&mut self, p: &Process, r: &Redex) -> Result<Process, CalcError> {
        let q = self.step(p, r)?;
        self.settle(&q)
    }
}
