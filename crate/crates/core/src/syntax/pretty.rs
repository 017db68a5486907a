use std::collections::{BTreeSet, HashMap};

use super::lexer::{is_ident_char, is_ident_start, KEYWORDS};
use super::parser::Scope;
use crate::calculus::{
    free_names, free_vars, visit_calls, Abstraction, Branch, DefinitionEnv, Formal, Prefix, Process, Value,
};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    /// Top of a term: parallel components go on separate lines.
    Top,
    /// Inside parentheses or braces.
    Group,
    /// Operand of a prefix, `new` or `if`.
    Unary,
}

/// Concrete syntax for `p`. Bound labels are suffixed where they would
/// clash, so the text parses back to an alpha-equivalent term.
pub fn pretty(p: &Process) -> String {
    pretty_with_scope(p).0
}

/// As [`pretty`], also returning the scope (free names, free variables,
/// called definitions) under which the text parses back.
pub fn pretty_with_scope(p: &Process) -> (String, Scope) {
    let mut pr = Printer::for_term(p);
    let mut out = String::new();
    pr.proc(p, Ctx::Top, "\n| ", &mut out);
    (out, pr.scope)
}

/// Concrete syntax for a single value: a name label or `{(x) P}`.
pub fn pretty_value(v: &Value) -> String {
    let holder = Process::Call(std::sync::Arc::from("v"), vec![v.clone()]);
    let mut pr = Printer::for_term(&holder);
    let mut out = String::new();
    pr.values(std::slice::from_ref(v), &mut out);
    out[1..out.len() - 1].to_string()
}

/// A whole program: constants, definitions in id order, then `main`.
pub fn pretty_program(env: &DefinitionEnv, main: &Process) -> String {
    pretty_program_annotated(env, main, |_| None)
}

/// As [`pretty_program`], with an optional comment line above each
/// definition.
pub fn pretty_program_annotated(
    env: &DefinitionEnv,
    main: &Process,
    note: impl Fn(&str) -> Option<String>,
) -> String {
    let mut out = String::new();
    if !env.constants().is_empty() {
        let labels: Vec<String> = env.constants().iter().map(|c| c.label().to_string()).collect();
        out.push_str("const ");
        out.push_str(&labels.join(", "));
        out.push_str("\n\n");
    }
    let defs: BTreeSet<String> = env.iter().map(|(id, _)| id.to_string()).collect();
    for (id, def) in env.iter() {
        let mut pr = Printer::new(&defs);
        for c in env.constants() {
            pr.assign_free_name(c);
        }
        let m = pr.visible.len();
        if let Some(n) = note(id) {
            out.push_str("# ");
            out.push_str(&n);
            out.push('\n');
        }
        out.push_str("def ");
        out.push_str(id);
        out.push('(');
        out.push_str(&pr.bind(&def.formals));
        out.push_str(") =\n    ");
        pr.proc(&def.body, Ctx::Top, "\n  | ", &mut out);
        pr.visible.truncate(m);
        out.push_str("\n\n");
    }
    let mut pr = Printer::new(&defs);
    for c in env.constants() {
        pr.assign_free_name(c);
    }
    for n in free_names(main) {
        pr.assign_free_name(&n);
    }
    out.push_str("main =\n    ");
    pr.proc(main, Ctx::Top, "\n  | ", &mut out);
    out.push('\n');
    out
}

struct Printer {
    reserved: BTreeSet<String>,
    /// Free identifiers by id.
    free: HashMap<u64, String>,
    /// Binders in scope: (id, label).
    visible: Vec<(u64, String)>,
    scope: Scope,
}

fn sanitize(label: &str) -> String {
    let mut s: String = label.chars().map(|c| if is_ident_char(c) { c } else { '_' }).collect();
    if !s.chars().next().is_some_and(is_ident_start) {
        s.insert_str(0, "n_");
    }
    s
}

impl Printer {
    fn new(defs: &BTreeSet<String>) -> Self {
        let mut reserved: BTreeSet<String> = KEYWORDS.iter().map(|k| k.to_string()).collect();
        reserved.extend(defs.iter().cloned());
        let mut scope = Scope::closed();
        for d in defs {
            scope.add_def(d);
        }
        Self {
            reserved,
            free: HashMap::new(),
            visible: Vec::new(),
            scope,
        }
    }

    fn for_term(p: &Process) -> Self {
        let mut defs = BTreeSet::new();
        visit_calls(p, &mut |id, _| {
            defs.insert(id.to_string());
        });
        let mut pr = Self::new(&defs);
        for n in free_names(p) {
            pr.assign_free_name(&n);
        }
        for v in free_vars(p) {
            let label = pr.unused(v.label());
            pr.free.insert(v.id(), label.clone());
            pr.scope.add_labelled_var(&label, &v);
        }
        pr
    }

    fn assign_free_name(&mut self, n: &crate::calculus::Name) {
        if self.free.contains_key(&n.id()) {
            return;
        }
        let label = self.unused(n.label());
        self.free.insert(n.id(), label.clone());
        self.scope.add_labelled(&label, n);
    }

    fn taken(&self, label: &str) -> bool {
        self.reserved.contains(label)
            || self.free.values().any(|l| l == label)
            || self.visible.iter().any(|(_, l)| l == label)
    }

    fn unused(&self, raw: &str) -> String {
        let base = sanitize(raw);
        if !self.taken(&base) {
            return base;
        }
        (2..)
            .map(|i| format!("{base}_{i}"))
            .find(|l| !self.taken(l))
            .expect("unbounded suffixes")
    }

    fn label(&self, id: u64, raw: &str) -> String {
        if let Some((_, l)) = self.visible.iter().rev().find(|(i, _)| *i == id) {
            return l.clone();
        }
        self.free.get(&id).cloned().unwrap_or_else(|| sanitize(raw))
    }

    /// Brings formals into scope and renders them.
    fn bind(&mut self, formals: &[Formal]) -> String {
        let mut parts = Vec::with_capacity(formals.len());
        for f in formals {
            let (id, raw, at) = match f {
                Formal::Name(n) => (n.id(), n.label(), ""),
                Formal::Var(v) => (v.id(), v.label(), "@"),
            };
            let l = self.unused(raw);
            parts.push(format!("{at}{l}"));
            self.visible.push((id, l));
        }
        parts.join(", ")
    }

    fn proc(&mut self, p: &Process, ctx: Ctx, sep: &str, out: &mut String) {
        match p {
            Process::Sum(bs) if bs.is_empty() => out.push('0'),
            Process::Sum(bs) if bs.len() == 1 => self.branch(&bs[0], out),
            Process::Sum(bs) => {
                let wrap = ctx == Ctx::Unary;
                if wrap {
                    out.push('(');
                }
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    self.branch(b, out);
                }
                if wrap {
                    out.push(')');
                }
            }
            Process::Par(..) => {
                let comps = p.components();
                let wrap = ctx == Ctx::Unary;
                if wrap {
                    out.push('(');
                }
                let sep = if ctx == Ctx::Top { sep } else { " | " };
                for (i, c) in comps.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    self.proc(c, Ctx::Unary, sep, out);
                }
                if wrap {
                    out.push(')');
                }
            }
            Process::Restrict(..) => {
                let (names, body) = p.strip_restrictions();
                let m = self.visible.len();
                let formals: Vec<Formal> = names.iter().map(|n| Formal::Name((*n).clone())).collect();
                out.push_str("new ");
                out.push_str(&self.bind(&formals));
                out.push_str(". ");
                self.proc(body, Ctx::Unary, sep, out);
                self.visible.truncate(m);
            }
            Process::Cond {
                lhs,
                rhs,
                then_branch,
                else_branch,
            } => {
                out.push_str(&format!(
                    "if {} = {} then ",
                    self.label(lhs.id(), lhs.label()),
                    self.label(rhs.id(), rhs.label())
                ));
                self.proc(then_branch, Ctx::Unary, sep, out);
                out.push_str(" else ");
                self.proc(else_branch, Ctx::Unary, sep, out);
            }
            Process::Call(d, args) => {
                out.push_str(d);
                self.values(args, out);
            }
            Process::VarApp(x, args) => {
                out.push_str(&self.label(x.id(), x.label()));
                self.values(args, out);
            }
        }
    }

    fn branch(&mut self, b: &Branch, out: &mut String) {
        match &b.prefix {
            Prefix::Input { chan, formals } => {
                out.push_str(&self.label(chan.id(), chan.label()));
                let m = self.visible.len();
                out.push('(');
                out.push_str(&self.bind(formals));
                out.push(')');
                self.cont(&b.cont, out);
                self.visible.truncate(m);
            }
            Prefix::Output { chan, args } => {
                out.push_str(&self.label(chan.id(), chan.label()));
                self.values(args, out);
                self.cont(&b.cont, out);
            }
        }
    }

    fn cont(&mut self, p: &Process, out: &mut String) {
        if !p.is_nil() {
            out.push('.');
            self.proc(p, Ctx::Unary, " | ", out);
        }
    }

    fn values(&mut self, vs: &[Value], out: &mut String) {
        out.push('<');
        for (i, v) in vs.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            match v {
                Value::Name(n) => out.push_str(&self.label(n.id(), n.label())),
                Value::Proc(a) => self.abstraction(a, out),
            }
        }
        out.push('>');
    }

    fn abstraction(&mut self, a: &Abstraction, out: &mut String) {
        out.push('{');
        let m = self.visible.len();
        if !a.params.is_empty() {
            out.push('(');
            out.push_str(&self.bind(&a.params));
            out.push_str(") ");
        }
        self.proc(&a.body, Ctx::Group, " | ", out);
        self.visible.truncate(m);
        out.push('}');
    }
}
