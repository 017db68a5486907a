use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, Spanned, Tok};
use super::{ParseError, SyntaxError};
use crate::calculus::{
    Abstraction, Branch, CalcError, DefinitionEnv, Formal, Name, NameSupply, ProcVar, Process, Value,
};

const MAX_DEPTH: usize = 200;

/// Identifiers visible to a parsed term besides its own binders.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    names: BTreeMap<String, Name>,
    vars: BTreeMap<String, ProcVar>,
    defs: BTreeSet<String>,
    open: bool,
}

impl Scope {
    /// Only the identifiers added explicitly resolve.
    pub fn closed() -> Self {
        Self::default()
    }

    /// Unknown identifiers in name position become fresh free names; the
    /// same identifier always maps to the same name.
    pub fn open() -> Self {
        Self {
            open: true,
            ..Self::default()
        }
    }

    pub fn with_name(mut self, n: &Name) -> Self {
        self.add_name(n);
        self
    }

    pub fn add_name(&mut self, n: &Name) {
        self.names.insert(n.label().to_string(), n.clone());
    }

    pub fn add_labelled(&mut self, label: &str, n: &Name) {
        self.names.insert(label.to_string(), n.clone());
    }

    pub fn add_var(&mut self, v: &ProcVar) {
        self.vars.insert(v.label().to_string(), v.clone());
    }

    pub fn add_labelled_var(&mut self, label: &str, v: &ProcVar) {
        self.vars.insert(label.to_string(), v.clone());
    }

    pub fn add_def(&mut self, id: &str) {
        self.defs.insert(id.to_string());
    }

    pub fn name(&self, label: &str) -> Option<&Name> {
        self.names.get(label)
    }

    pub fn names(&self) -> &BTreeMap<String, Name> {
        &self.names
    }
}

/// A parsed `.hopi` program.
#[derive(Clone, Debug)]
pub struct Program {
    pub env: DefinitionEnv,
    pub main: Process,
    /// Free names of `main` by identifier.
    pub free: BTreeMap<String, Name>,
}

#[derive(Clone)]
enum Bound {
    Name(Name),
    Var(ProcVar),
}

enum Resolved {
    Name(Name),
    Var(ProcVar),
    Def,
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    supply: &'a mut NameSupply,
    scope: &'a mut Scope,
    bound: Vec<(String, Bound)>,
    depth: usize,
    /// Definition being parsed; unknown identifiers there are free symbols.
    current_def: Option<String>,
}

/// Parses one term. Definitions mentioned must be in `scope`.
pub fn parse_process(text: &str, scope: &mut Scope, supply: &mut NameSupply) -> Result<Process, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        supply,
        scope,
        bound: Vec::new(),
        depth: 0,
        current_def: None,
    };
    let t = p.par()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

/// Parses `const`, `def` and `main` items into an environment and a main
/// term, then checks call arities and guardedness.
pub fn parse_program(text: &str, supply: &mut NameSupply) -> Result<Program, ParseError> {
    let toks = lex(text)?;
    let mut scope = Scope::closed();
    let mut env = DefinitionEnv::new();
    for w in toks.windows(2) {
        if let (Tok::Def, Tok::Ident(id)) = (&w[0].tok, &w[1].tok) {
            scope.add_def(id);
        }
    }
    for (i, t) in toks.iter().enumerate() {
        if t.tok != Tok::Const {
            continue;
        }
        for w in toks[i + 1..].chunks(2) {
            let Tok::Ident(label) = &w[0].tok else { break };
            let c = supply.constant(label);
            env.declare_constant(c.clone());
            scope.add_name(&c);
            if w.get(1).map(|t| &t.tok) != Some(&Tok::Comma) {
                break;
            }
        }
    }
    let mut p = Parser {
        toks,
        pos: 0,
        supply,
        scope: &mut scope,
        bound: Vec::new(),
        depth: 0,
        current_def: None,
    };
    let mut main: Option<Process> = None;
    let mut main_free = BTreeMap::new();
    loop {
        let t = p.peek().clone();
        match t.tok {
            Tok::Eof => break,
            Tok::Const => {
                p.advance();
                loop {
                    let (label, _, _) = p.ident()?;
                    let c = p.supply.constant(&label);
                    env.declare_constant(c.clone());
                    p.scope.add_name(&c);
                    if !p.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            Tok::Def => {
                p.advance();
                let (id, _, _) = p.ident()?;
                p.expect(Tok::LParen)?;
                let formals = p.formals(Tok::RParen)?;
                p.expect(Tok::Eq)?;
                p.current_def = Some(id.clone());
                let mark = p.push_formals(&formals);
                let body = p.par()?;
                p.bound.truncate(mark);
                p.current_def = None;
                let formals = formals.into_iter().map(|(_, f)| f).collect();
                env.define(&id, formals, body)?;
            }
            Tok::Main => {
                if main.is_some() {
                    return Err(p.err_here("`main` given twice"));
                }
                p.advance();
                p.expect(Tok::Eq)?;
                let before: BTreeSet<String> = p.scope.names.keys().cloned().collect();
                p.scope.open = true;
                main = Some(p.par()?);
                p.scope.open = false;
                let added: Vec<String> = p.scope.names.keys().filter(|k| !before.contains(*k)).cloned().collect();
                for k in added {
                    if let Some(v) = p.scope.names.remove(&k) {
                        main_free.insert(k, v);
                    }
                }
            }
            _ => return Err(p.unexpected("`def`, `const` or `main`")),
        }
    }
    let main = main.ok_or_else(|| p.err_here("missing `main = ...`"))?;
    env.check()?;
    env.check_calls(&main)?;
    Ok(Program {
        env,
        main,
        free: main_free,
    })
}

impl Parser<'_> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if &self.peek().tok == t {
            self.advance();
            true
        } else {
            false
        }
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let t = self.peek();
        SyntaxError::at(t.line, t.col, msg).into()
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.err_here(format!("expected {wanted}, found {}", self.peek().tok.describe()))
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.unexpected(&t.describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                let t = self.advance();
                Ok((s, t.line, t.col))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.err_here("nesting too deep"));
        }
        Ok(())
    }

    fn resolve(&mut self, label: &str, line: usize, col: usize) -> Result<Resolved, ParseError> {
        if let Some((_, b)) = self.bound.iter().rev().find(|(l, _)| l == label) {
            return Ok(match b {
                Bound::Name(n) => Resolved::Name(n.clone()),
                Bound::Var(v) => Resolved::Var(v.clone()),
            });
        }
        if let Some(v) = self.scope.vars.get(label) {
            return Ok(Resolved::Var(v.clone()));
        }
        if let Some(n) = self.scope.names.get(label) {
            return Ok(Resolved::Name(n.clone()));
        }
        if self.scope.defs.contains(label) {
            return Ok(Resolved::Def);
        }
        if let Some(def) = &self.current_def {
            return Err(CalcError::FreeSymbolInBody {
                def: def.clone(),
                symbol: label.to_string(),
            }
            .into());
        }
        if self.scope.open {
            let n = self.supply.name(label);
            self.scope.add_name(&n);
            return Ok(Resolved::Name(n));
        }
        Err(ParseError::UnboundIdentifier {
            name: label.to_string(),
            line,
            col,
        })
    }

    fn name_at(&mut self, label: &str, line: usize, col: usize) -> Result<Name, ParseError> {
        match self.resolve(label, line, col)? {
            Resolved::Name(n) => Ok(n),
            _ => Err(SyntaxError::at(line, col, format!("`{label}` is not a name")).into()),
        }
    }

    /// Formal tuple up to `close`; binders are created but not yet pushed.
    fn formals(&mut self, close: Tok) -> Result<Vec<(String, Formal)>, ParseError> {
        let mut out: Vec<(String, Formal)> = Vec::new();
        if self.eat(&close) {
            return Ok(out);
        }
        loop {
            let is_var = self.eat(&Tok::At);
            let (label, line, col) = self.ident()?;
            if out.iter().any(|(l, _)| *l == label) {
                return Err(ParseError::DuplicateFormal { name: label, line, col });
            }
            let f = if is_var {
                Formal::Var(self.supply.var(&label))
            } else {
                Formal::Name(self.supply.name(&label))
            };
            out.push((label, f));
            if self.eat(&close) {
                return Ok(out);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn push_formals(&mut self, formals: &[(String, Formal)]) -> usize {
        let mark = self.bound.len();
        for (l, f) in formals {
            let b = match f {
                Formal::Name(n) => Bound::Name(n.clone()),
                Formal::Var(v) => Bound::Var(v.clone()),
            };
            self.bound.push((l.clone(), b));
        }
        mark
    }

    fn par(&mut self) -> Result<Process, ParseError> {
        let mut items = vec![self.sum()?];
        while self.eat(&Tok::Bar) {
            items.push(self.sum()?);
        }
        Ok(Process::par_all(items))
    }

    fn sum(&mut self) -> Result<Process, ParseError> {
        let (line, col) = (self.peek().line, self.peek().col);
        let first = self.unary()?;
        if self.peek().tok != Tok::Plus {
            return Ok(first);
        }
        let mut branches: Vec<Branch> = Vec::new();
        let mut take = |p: Process, line: usize, col: usize| -> Result<(), ParseError> {
            match p {
                Process::Sum(bs) if !bs.is_empty() => {
                    branches.extend(bs);
                    Ok(())
                }
                _ => Err(SyntaxError::at(line, col, "summands of `+` must be prefixed").into()),
            }
        };
        take(first, line, col)?;
        while self.eat(&Tok::Plus) {
            let (line, col) = (self.peek().line, self.peek().col);
            let next = self.unary()?;
            take(next, line, col)?;
        }
        Ok(Process::Sum(branches))
    }

    fn unary(&mut self) -> Result<Process, ParseError> {
        self.enter()?;
        let r = self.unary_inner();
        self.depth -= 1;
        r
    }

    fn unary_inner(&mut self) -> Result<Process, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Zero => {
                self.advance();
                Ok(Process::nil())
            }
            Tok::LParen => {
                self.advance();
                let p = self.par()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::New => {
                self.advance();
                let mark = self.bound.len();
                let mut names = Vec::new();
                loop {
                    let (label, _, _) = self.ident()?;
                    let n = self.supply.name(&label);
                    self.bound.push((label, Bound::Name(n.clone())));
                    names.push(n);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Dot)?;
                let body = self.unary()?;
                self.bound.truncate(mark);
                Ok(Process::restrict_all(names, body))
            }
            Tok::If => {
                self.advance();
                let (l, ll, lc) = self.ident()?;
                let lhs = self.name_at(&l, ll, lc)?;
                self.expect(Tok::Eq)?;
                let (r, rl, rc) = self.ident()?;
                let rhs = self.name_at(&r, rl, rc)?;
                self.expect(Tok::Then)?;
                let then_branch = self.unary()?;
                self.expect(Tok::Else)?;
                let else_branch = self.unary()?;
                Ok(Process::cond(lhs, rhs, then_branch, else_branch))
            }
            Tok::Ident(label) => {
                self.advance();
                match self.peek().tok {
                    Tok::LParen => {
                        let chan = self.name_at(&label, t.line, t.col)?;
                        self.advance();
                        let formals = self.formals(Tok::RParen)?;
                        let mark = self.push_formals(&formals);
                        let cont = if self.eat(&Tok::Dot) {
                            self.unary()?
                        } else {
                            Process::nil()
                        };
                        self.bound.truncate(mark);
                        let formals = formals.into_iter().map(|(_, f)| f).collect();
                        Ok(Process::input(chan, formals, cont))
                    }
                    Tok::Lt => {
                        let target = self.resolve(&label, t.line, t.col)?;
                        self.advance();
                        let args = self.values()?;
                        match target {
                            Resolved::Name(chan) => {
                                let cont = if self.eat(&Tok::Dot) {
                                    self.unary()?
                                } else {
                                    Process::nil()
                                };
                                Ok(Process::output(chan, args, cont))
                            }
                            Resolved::Var(v) => Ok(Process::VarApp(v, args)),
                            Resolved::Def => Ok(Process::call(&label, args)),
                        }
                    }
                    _ => Err(self.unexpected("`(` or `<` after an identifier")),
                }
            }
            _ => Err(self.unexpected("a process")),
        }
    }

    /// Argument tuple after `<`, through the closing `>`.
    fn values(&mut self) -> Result<Vec<Value>, ParseError> {
        let mut out = Vec::new();
        if self.eat(&Tok::Gt) {
            return Ok(out);
        }
        loop {
            out.push(self.value()?);
            if self.eat(&Tok::Gt) {
                return Ok(out);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(label) => {
                self.advance();
                match self.resolve(&label, t.line, t.col)? {
                    Resolved::Name(n) => Ok(Value::Name(n)),
                    _ => Err(SyntaxError::at(
                        t.line,
                        t.col,
                        format!("`{label}` is not a name; wrap processes in braces"),
                    )
                    .into()),
                }
            }
            Tok::LBrace => {
                self.enter()?;
                self.advance();
                let has_params = self.peek().tok == Tok::LParen
                    && match self.peek_at(1) {
                        Tok::RParen | Tok::At => true,
                        Tok::Ident(_) => matches!(self.peek_at(2), Tok::Comma | Tok::RParen),
                        _ => false,
                    };
                let params = if has_params {
                    self.advance();
                    self.formals(Tok::RParen)?
                } else {
                    Vec::new()
                };
                let mark = self.push_formals(&params);
                let body = self.par()?;
                self.bound.truncate(mark);
                self.expect(Tok::RBrace)?;
                self.depth -= 1;
                let params = params.into_iter().map(|(_, f)| f).collect();
                Ok(Value::Proc(Abstraction::new(params, body)))
            }
            _ => Err(self.unexpected("a name or `{`")),
        }
    }
}
