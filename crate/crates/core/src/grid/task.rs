//! Task grammar `T ::= J<k1,...,km> | T.T | T||T | T(+)T | end`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::GridError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basic {
    pub job: String,
    pub kinds: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskDef {
    Basic(Basic),
    Seq(Box<TaskDef>, Box<TaskDef>),
    ParT(Box<TaskDef>, Box<TaskDef>),
    Choice(Box<TaskDef>, Box<TaskDef>),
    End,
}

impl TaskDef {
    pub fn basic(job: &str, kinds: &[&str]) -> Self {
        TaskDef::Basic(Basic {
            job: job.into(),
            kinds: kinds.iter().map(|k| k.to_string()).collect(),
        })
    }

    /// `a.b` with `end.b = b`.
    pub fn seq(a: TaskDef, b: TaskDef) -> Self {
        match a {
            TaskDef::End => b,
            a => TaskDef::Seq(Box::new(a), Box::new(b)),
        }
    }

    /// `a||b` with `end` as unit.
    pub fn par(a: TaskDef, b: TaskDef) -> Self {
        match (a, b) {
            (TaskDef::End, x) | (x, TaskDef::End) => x,
            (a, b) => TaskDef::ParT(Box::new(a), Box::new(b)),
        }
    }

    pub fn choice(a: TaskDef, b: TaskDef) -> Self {
        TaskDef::Choice(Box::new(a), Box::new(b))
    }

    /// Basic tasks in left-to-right order.
    pub fn basics(&self) -> Vec<&Basic> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a TaskDef, out: &mut Vec<&'a Basic>) {
            match t {
                TaskDef::Basic(b) => out.push(b),
                TaskDef::Seq(a, b) | TaskDef::ParT(a, b) | TaskDef::Choice(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                TaskDef::End => {}
            }
        }
        go(self, &mut out);
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            TaskDef::Basic(_) | TaskDef::End => 1,
            TaskDef::Seq(a, b) | TaskDef::ParT(a, b) | TaskDef::Choice(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

impl fmt::Display for TaskDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // operands of `.` are atoms; operands of `||` and `(+)` are
        // parenthesised unless atomic or sequential
        fn atom(t: &TaskDef) -> bool {
            matches!(t, TaskDef::Basic(_) | TaskDef::End)
        }
        match self {
            TaskDef::Basic(b) => write!(f, "{}<{}>", b.job, b.kinds.join(",")),
            TaskDef::End => write!(f, "end"),
            TaskDef::Seq(a, b) => {
                if atom(a) {
                    write!(f, "{a}.")?;
                } else {
                    write!(f, "({a}).")?;
                }
                if atom(b) || matches!(**b, TaskDef::Seq(..)) {
                    write!(f, "{b}")
                } else {
                    write!(f, "({b})")
                }
            }
            TaskDef::ParT(a, b) | TaskDef::Choice(a, b) => {
                let op = if matches!(self, TaskDef::ParT(..)) { "||" } else { "(+)" };
                let side = |t: &TaskDef| atom(t) || matches!(t, TaskDef::Seq(..));
                if side(a) {
                    write!(f, "{a}")?;
                } else {
                    write!(f, "({a})")?;
                }
                write!(f, " {op} ")?;
                if side(b) {
                    write!(f, "{b}")
                } else {
                    write!(f, "({b})")
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum TTok {
    Ident(String),
    End,
    Lt,
    Gt,
    Comma,
    Dot,
    Par,
    Choice,
    LParen,
    RParen,
    Eof,
}

fn lex_task(text: &str) -> Result<Vec<(TTok, usize)>, GridError> {
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let err = |pos: usize, msg: &str| GridError::TaskSyntax {
        pos,
        msg: msg.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_alphanumeric() || c == '_' {
            let mut s = String::new();
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                s.push(bytes[i]);
                i += 1;
            }
            if s == "end" {
                TTok::End
            } else {
                TTok::Ident(s)
            }
        } else {
            i += 1;
            match c {
                '<' => TTok::Lt,
                '>' => TTok::Gt,
                ',' => TTok::Comma,
                '.' => TTok::Dot,
                ')' => TTok::RParen,
                '|' => {
                    if bytes.get(i) != Some(&'|') {
                        return Err(err(start, "expected `||`"));
                    }
                    i += 1;
                    TTok::Par
                }
                '(' => {
                    if bytes.get(i) == Some(&'+') && bytes.get(i + 1) == Some(&')') {
                        i += 2;
                        TTok::Choice
                    } else {
                        TTok::LParen
                    }
                }
                _ => return Err(err(start, &format!("unexpected character {c:?}"))),
            }
        };
        out.push((tok, start));
    }
    out.push((TTok::Eof, bytes.len()));
    Ok(out)
}

struct TaskParser<'a> {
    toks: Vec<(TTok, usize)>,
    pos: usize,
    kinds: &'a BTreeSet<String>,
    depth: usize,
}

impl TaskParser<'_> {
    fn peek(&self) -> &TTok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> TTok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> GridError {
        GridError::TaskSyntax {
            pos: self.here(),
            msg: msg.into(),
        }
    }

    fn expect(&mut self, t: TTok, what: &str) -> Result<(), GridError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    /// `seq (("||" | "(+)") seq)*`, left-associative.
    fn expr(&mut self) -> Result<TaskDef, GridError> {
        self.depth += 1;
        if self.depth > 100 {
            return Err(self.err("nesting too deep"));
        }
        let mut acc = self.seq()?;
        loop {
            match self.peek() {
                TTok::Par => {
                    self.bump();
                    let rhs = self.seq()?;
                    acc = TaskDef::ParT(Box::new(acc), Box::new(rhs));
                }
                TTok::Choice => {
                    self.bump();
                    let rhs = self.seq()?;
                    acc = TaskDef::Choice(Box::new(acc), Box::new(rhs));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    /// `atom ("." seq)?`, right-associative.
    fn seq(&mut self) -> Result<TaskDef, GridError> {
        let a = self.atom()?;
        if *self.peek() == TTok::Dot {
            self.bump();
            let b = self.seq()?;
            return Ok(TaskDef::Seq(Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<TaskDef, GridError> {
        match self.bump() {
            TTok::End => Ok(TaskDef::End),
            TTok::LParen => {
                let e = self.expr()?;
                self.expect(TTok::RParen, "`)`")?;
                Ok(e)
            }
            TTok::Ident(job) => {
                self.expect(TTok::Lt, "`<` after a job name")?;
                let mut kinds = Vec::new();
                loop {
                    let pos = self.here();
                    match self.bump() {
                        TTok::Ident(k) => {
                            if !self.kinds.contains(&k) {
                                return Err(GridError::UnknownDescriptor { kind: k, pos });
                            }
                            kinds.push(k);
                        }
                        _ => return Err(self.err("expected a descriptor")),
                    }
                    match self.bump() {
                        TTok::Comma => continue,
                        TTok::Gt => break,
                        _ => return Err(self.err("expected `,` or `>`")),
                    }
                }
                Ok(TaskDef::Basic(Basic { job, kinds }))
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err("expected a job, `end` or `(`"))
            }
        }
    }
}

/// Parses a task, checking every descriptor against `kinds`.
pub fn parse_task(text: &str, kinds: &BTreeSet<String>) -> Result<TaskDef, GridError> {
    let toks = lex_task(text)?;
    let mut p = TaskParser {
        toks,
        pos: 0,
        kinds,
        depth: 0,
    };
    let t = p.expr()?;
    if *p.peek() != TTok::Eof {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

/// One scheduling step: the basic tasks started together and what remains.
pub type Step = (Vec<Basic>, TaskDef);

/// All ways to take one step. Parallel branches advance in lock-step;
/// a choice is resolved by the step.
pub fn task_step(t: &TaskDef) -> Vec<Step> {
    let mut out: Vec<Step> = match t {
        TaskDef::End => vec![(vec![], TaskDef::End)],
        TaskDef::Basic(b) => vec![(vec![b.clone()], TaskDef::End)],
        TaskDef::Seq(a, b) => task_step(a)
            .into_iter()
            .map(|(f, rest)| (f, TaskDef::seq(rest, (**b).clone())))
            .collect(),
        TaskDef::ParT(a, b) => {
            let sb = task_step(b);
            let mut v = Vec::new();
            for (fa, ra) in task_step(a) {
                for (fb, rb) in &sb {
                    let mut f = fa.clone();
                    f.extend(fb.iter().cloned());
                    v.push((f, TaskDef::par(ra.clone(), rb.clone())));
                }
            }
            v
        }
        TaskDef::Choice(a, b) => {
            let mut v = task_step(a);
            v.extend(task_step(b));
            v
        }
    };
    out.sort();
    out.dedup();
    out
}

/// Descriptor multiset a task may need: sum over its basic tasks, with a
/// choice contributing the pointwise maximum of its sides.
pub fn required_descriptors(t: &TaskDef) -> BTreeMap<String, usize> {
    match t {
        TaskDef::End => BTreeMap::new(),
        TaskDef::Basic(b) => {
            let mut m = BTreeMap::new();
            for k in &b.kinds {
                *m.entry(k.clone()).or_insert(0) += 1;
            }
            m
        }
        TaskDef::Seq(a, b) | TaskDef::ParT(a, b) => {
            let mut m = required_descriptors(a);
            for (k, n) in required_descriptors(b) {
                *m.entry(k).or_insert(0) += n;
            }
            m
        }
        TaskDef::Choice(a, b) => {
            let mut m = required_descriptors(a);
            for (k, n) in required_descriptors(b) {
                let e = m.entry(k).or_insert(0);
                *e = (*e).max(n);
            }
            m
        }
    }
}
