//! Parametric definitions `D(U) = P`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use super::error::CalcError;
use super::free::{free_names, free_vars};
use super::name::{Name, NameSupply};
use super::subst::substitute;
use super::term::{DefId, Formal, Prefix, Process, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub formals: Vec<Formal>,
    pub body: Process,
}

/// Definitions plus the global constants their bodies may mention.
#[derive(Clone, Debug, Default)]
pub struct DefinitionEnv {
    defs: BTreeMap<DefId, Definition>,
    constants: BTreeSet<Name>,
}

impl DefinitionEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_constant(&mut self, n: Name) {
        self.constants.insert(n);
    }

    pub fn constants(&self) -> &BTreeSet<Name> {
        &self.constants
    }

    /// Adds a definition, checking distinct formals and that every free
    /// symbol of the body is a formal or a declared constant.
    pub fn define(&mut self, id: &str, formals: Vec<Formal>, body: Process) -> Result<(), CalcError> {
        if self.defs.contains_key(id) {
            return Err(CalcError::DuplicateDefinition(id.to_string()));
        }
        let mut seen = HashSet::new();
        for f in &formals {
            if !seen.insert(f.id()) {
                let label = match f {
                    Formal::Name(n) => n.label().to_string(),
                    Formal::Var(v) => v.label().to_string(),
                };
                return Err(CalcError::DuplicateFormal(label));
            }
        }
        for n in free_names(&body) {
            let bound = formals.iter().any(|f| matches!(f, Formal::Name(m) if *m == n));
            if !bound && !self.constants.contains(&n) {
                return Err(CalcError::FreeSymbolInBody {
                    def: id.to_string(),
                    symbol: n.label().to_string(),
                });
            }
        }
        for v in free_vars(&body) {
            if !formals.iter().any(|f| matches!(f, Formal::Var(w) if *w == v)) {
                return Err(CalcError::FreeSymbolInBody {
                    def: id.to_string(),
                    symbol: v.label().to_string(),
                });
            }
        }
        self.defs.insert(Arc::from(id), Definition { formals, body });
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Definition> {
        self.defs.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.defs.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DefId, &Definition)> {
        self.defs.iter()
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// `D<K>` replaced by `P{K/U}`.
    pub fn unfold(&self, id: &str, args: &[Value], supply: &mut NameSupply) -> Result<Process, CalcError> {
        let def = self
            .get(id)
            .ok_or_else(|| CalcError::UnboundDefinition(id.to_string()))?;
        substitute(&def.body, &def.formals, args, supply)
    }

    /// Whether the body is a single guarded choice, possibly under
    /// restrictions. Calls to such definitions stay folded: the redex
    /// enumerator looks through them.
    pub fn is_guarded_state(&self, id: &str) -> bool {
        match self.get(id) {
            Some(d) => matches!(d.body.strip_restrictions().1, Process::Sum(bs) if !bs.is_empty()),
            None => false,
        }
    }

    /// Checks that every call resolves with the right arity and kinds and
    /// that no definition reaches itself without passing a prefix.
    pub fn check(&self) -> Result<(), CalcError> {
        for def in self.defs.values() {
            self.check_calls(&def.body)?;
        }
        let mut done = HashSet::new();
        for id in self.defs.keys() {
            let mut stack = Vec::new();
            self.guard_dfs(id, &mut stack, &mut done)?;
        }
        Ok(())
    }

    /// Arity and kind check of every call inside `p`.
    pub fn check_calls(&self, p: &Process) -> Result<(), CalcError> {
        let mut res = Ok(());
        visit_calls(p, &mut |id, args| {
            if res.is_err() {
                return;
            }
            res = self.check_call(id, args);
        });
        res
    }

    fn check_call(&self, id: &str, args: &[Value]) -> Result<(), CalcError> {
        let def = self
            .get(id)
            .ok_or_else(|| CalcError::UnboundDefinition(id.to_string()))?;
        if def.formals.len() != args.len() {
            return Err(CalcError::ArityMismatch {
                expected: def.formals.len(),
                found: args.len(),
            });
        }
        for (i, (f, a)) in def.formals.iter().zip(args).enumerate() {
            if f.is_var() != a.is_proc() {
                return Err(CalcError::KindMismatch { position: i });
            }
        }
        Ok(())
    }

    fn guard_dfs(&self, id: &str, stack: &mut Vec<DefId>, done: &mut HashSet<DefId>) -> Result<(), CalcError> {
        if done.contains(id) {
            return Ok(());
        }
        if stack.iter().any(|s| &**s == id) {
            return Err(CalcError::UnguardedRecursion(id.to_string()));
        }
        let Some(def) = self.get(id) else {
            return Ok(());
        };
        stack.push(Arc::from(id));
        let mut callees = Vec::new();
        unguarded_calls(&def.body, &mut callees);
        for c in callees {
            self.guard_dfs(&c, stack, done)?;
        }
        stack.pop();
        done.insert(Arc::from(id));
        Ok(())
    }
}

/// Calls reachable without crossing a prefix.
fn unguarded_calls(p: &Process, out: &mut Vec<DefId>) {
    match p {
        Process::Sum(_) | Process::VarApp(..) => {}
        Process::Par(l, r) => {
            unguarded_calls(l, out);
            unguarded_calls(r, out);
        }
        Process::Restrict(_, b) => unguarded_calls(b, out),
        Process::Cond {
            then_branch,
            else_branch,
            ..
        } => {
            unguarded_calls(then_branch, out);
            unguarded_calls(else_branch, out);
        }
        Process::Call(d, _) => out.push(d.clone()),
    }
}

/// Visits every call in `p`, including those inside process values.
pub fn visit_calls(p: &Process, f: &mut impl FnMut(&str, &[Value])) {
    fn values(vs: &[Value], f: &mut impl FnMut(&str, &[Value])) {
        for v in vs {
            if let Value::Proc(a) = v {
                visit_calls(&a.body, f);
            }
        }
    }
    match p {
        Process::Sum(bs) => {
            for b in bs {
                if let Prefix::Output { args, .. } = &b.prefix {
                    values(args, f);
                }
                visit_calls(&b.cont, f);
            }
        }
        Process::Par(l, r) => {
            visit_calls(l, f);
            visit_calls(r, f);
        }
        Process::Restrict(_, b) => visit_calls(b, f),
        Process::Cond {
            then_branch,
            else_branch,
            ..
        } => {
            visit_calls(then_branch, f);
            visit_calls(else_branch, f);
        }
        Process::Call(d, args) => {
            f(d, args);
            values(args, f);
        }
        Process::VarApp(_, args) => values(args, f),
    }
}
