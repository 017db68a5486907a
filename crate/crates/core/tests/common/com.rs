//! The communication rule against a brute-force derivation, on every
//! two-component term with at most two branches per sum and two arguments
//! per prefix over the names `a, b, c` and the process variable `X`.
//!
//! Input continuations expose what they received: a name formal `x`
//! becomes `x<>`, a variable formal `Y` becomes `Y<a>`. The only process
//! value is `(z) X<z>`. Terms are enumerated up to renaming of `a, b, c`:
//! the first component ranges over orbit representatives.


use super::db::{instantiate, to_db, value_to_db, DPre, Db, Registry};
use gridpi_core::calculus::{Abstraction, Branch, DefinitionEnv, Formal, Prefix};
use gridpi_core::{canonical_key, enumerate_redexes, normalize, reduce_step, Name, NameSupply, ProcVar, Process, Redex, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Arg {
    Name(u8),
    Abs,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Spec {
    In(u8, Vec<bool>),
    Out(u8, Vec<Arg>),
}

type Comp = Vec<Spec>;

fn seqs<T: Clone>(alphabet: &[T], max: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|s: &Vec<T>| {
                alphabet.iter().map(move |x| {
                    let mut s = s.clone();
                    s.push(x.clone());
                    s
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn specs() -> Vec<Spec> {
    let mut out = Vec::new();
    for c in 0..3u8 {
        for ks in seqs(&[false, true], 2) {
            out.push(Spec::In(c, ks));
        }
        for args in seqs(&[Arg::Name(0), Arg::Name(1), Arg::Name(2), Arg::Abs], 2) {
            out.push(Spec::Out(c, args));
        }
    }
    out
}

fn components(specs: &[Spec]) -> Vec<Comp> {
    let mut out = Vec::new();
    for i in 0..specs.len() {
        out.push(vec![specs[i].clone()]);
        for j in i..specs.len() {
            out.push(vec![specs[i].clone(), specs[j].clone()]);
        }
    }
    out
}

const PERMS: [[u8; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn rename(c: &Comp, p: &[u8; 3]) -> Comp {
    let mut out: Comp = c
        .iter()
        .map(|s| match s {
            Spec::In(ch, ks) => Spec::In(p[*ch as usize], ks.clone()),
            Spec::Out(ch, args) => Spec::Out(
                p[*ch as usize],
                args.iter()
                    .map(|a| match a {
                        Arg::Name(n) => Arg::Name(p[*n as usize]),
                        Arg::Abs => Arg::Abs,
                    })
                    .collect(),
            ),
        })
        .collect();
    out.sort();
    out
}

fn is_orbit_rep(c: &Comp) -> bool {
    PERMS.iter().all(|p| rename(c, p) >= *c)
}

struct Ctx {
    names: Vec<Name>,
    x: ProcVar,
    supply: NameSupply,
    env: DefinitionEnv,
    registry: Registry,
}

impl Ctx {
    fn new() -> Self {
        let mut supply = NameSupply::new();
        let names: Vec<Name> = ["a", "b", "c"].iter().map(|l| supply.name(l)).collect();
        let x = supply.var("X");
        let mut registry = Registry::default();
        names.iter().for_each(|n| registry.add_name(n));
        registry.add_var(&x);
        Ctx {
            names,
            x,
            supply,
            env: DefinitionEnv::new(),
            registry,
        }
    }

    fn abs(&mut self) -> Value {
        let z = self.supply.name("z");
        Value::Proc(Abstraction::new(
            vec![Formal::Name(z.clone())],
            Process::VarApp(self.x.clone(), vec![Value::Name(z)]),
        ))
    }

    fn branch(&mut self, s: &Spec) -> Branch {
        match s {
            Spec::In(c, ks) => {
                let formals: Vec<Formal> = ks
                    .iter()
                    .map(|&v| if v { Formal::Var(self.supply.var("Y")) } else { Formal::Name(self.supply.name("x")) })
                    .collect();
                let cont = Process::par_all(formals.iter().map(|f| match f {
                    Formal::Name(n) => Process::output(n.clone(), vec![], Process::nil()),
                    Formal::Var(y) => Process::VarApp(y.clone(), vec![Value::Name(self.names[0].clone())]),
                }));
                Branch {
                    prefix: Prefix::Input {
                        chan: self.names[*c as usize].clone(),
                        formals,
                    },
                    cont,
                }
            }
            Spec::Out(c, args) => {
                let args = args
                    .iter()
                    .map(|a| match a {
                        Arg::Name(n) => Value::Name(self.names[*n as usize].clone()),
                        Arg::Abs => self.abs(),
                    })
                    .collect();
                Branch {
                    prefix: Prefix::Output {
                        chan: self.names[*c as usize].clone(),
                        args,
                    },
                    cont: Process::nil(),
                }
            }
        }
    }

    fn comp(&mut self, c: &Comp) -> Process {
        Process::Sum(c.iter().map(|s| self.branch(s)).collect())
    }

    fn key(&mut self, p: &Process) -> String {
        canonical_key(&normalize(p, &mut self.supply))
    }

    /// Every COM reduct of `p | q` derived directly from the rule.
    fn derive(&mut self, p: &Process, q: &Process) -> Vec<String> {
        let (Process::Sum(bp), Process::Sum(bq)) = (p, q) else { unreachable!() };
        let mut out = Vec::new();
        for (ins, outs) in [(bp, bq), (bq, bp)] {
            for i in ins {
                let Prefix::Input { chan, formals } = &i.prefix else { continue };
                for o in outs {
                    let Prefix::Output { chan: c2, args } = &o.prefix else { continue };
                    let kinds_ok = formals.len() == args.len()
                        && formals.iter().zip(args).all(|(f, a)| f.is_var() == a.is_proc());
                    if c2 != chan || !kinds_ok {
                        continue;
                    }
                    let Db::Sum(bs) = to_db(&Process::Sum(vec![i.clone()])) else { unreachable!() };
                    let (DPre::In(..), cont) = &bs[0] else { unreachable!() };
                    let received = instantiate(cont, args.iter().map(value_to_db).collect());
                    let reduct = Db::Par(Box::new(received), Box::new(to_db(&o.cont)));
                    let built = self.registry.build(&reduct, &mut self.supply);
                    out.push(self.key(&built));
                }
            }
        }
        out.sort();
        out
    }

    fn engine(&mut self, p: &Process, q: &Process) -> Vec<String> {
        let term = normalize(&Process::par(p.clone(), q.clone()), &mut self.supply);
        let mut out = Vec::new();
        for r in enumerate_redexes(&term, &self.env, &mut self.supply).unwrap() {
            assert!(matches!(r, Redex::Comm { .. }), "unexpected redex {r:?}");
            let next = reduce_step(&term, &r, &self.env, &mut self.supply).unwrap();
            out.push(canonical_key(&next));
        }
        out.sort();
        out
    }
}

pub struct ComReport {
    pub terms: usize,
    pub reducts: usize,
    pub mismatches: Vec<String>,
}

/// Checks every term whose first component is among the first `reps`
/// orbit representatives (all of them when `None`).
pub fn check(reps: Option<usize>) -> ComReport {
    let specs = specs();
    assert_eq!(specs.len(), 84);
    let comps = components(&specs);
    let all: Vec<&Comp> = comps.iter().filter(|c| is_orbit_rep(c)).collect();
    let take = reps.unwrap_or(all.len()).min(all.len());
    let mut ctx = Ctx::new();
    let built: Vec<Process> = comps.iter().map(|c| ctx.comp(c)).collect();
    let mut rep = ComReport {
        terms: 0,
        reducts: 0,
        mismatches: Vec::new(),
    };
    for first in &all[..take] {
        let p = ctx.comp(first);
        for (q, qc) in built.iter().zip(&comps) {
            let want = ctx.derive(&p, q);
            let got = ctx.engine(&p, q);
            rep.terms += 1;
            rep.reducts += want.len();
            if want != got {
                rep.mismatches.push(format!("{first:?} | {qc:?}"));
            }
        }
    }
    rep
}
