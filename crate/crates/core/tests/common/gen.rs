//! Seeded random processes over a small alphabet.
//!
//! Free names `a, b, c` and one free process variable `X` of arity one.
//! Every abstraction takes exactly one name, so every application is
//! well-kinded whatever is substituted. Binders often reuse the identity of
//! a free alphabet name, which is exactly what capture avoidance has to
//! cope with.

use gridpi_core::calculus::{Abstraction, Branch, Formal, Prefix};
use gridpi_core::{Name, NameSupply, ProcVar, Process, Value};
use rand::seq::SliceRandom;
use rand::Rng;

use super::db::Registry;

pub const MAX_SIZE: usize = 30;

#[derive(Clone)]
pub struct Alphabet {
    pub names: Vec<Name>,
    pub var: ProcVar,
}

impl Alphabet {
    pub fn new(supply: &mut NameSupply) -> Self {
        Alphabet {
            names: ["a", "b", "c"].iter().map(|l| supply.name(l)).collect(),
            var: supply.var("X"),
        }
    }

    pub fn registry(&self) -> Registry {
        let mut r = Registry::default();
        self.names.iter().for_each(|n| r.add_name(n));
        r.add_var(&self.var);
        r
    }
}

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    supply: &'a mut NameSupply,
    alpha: &'a Alphabet,
    names: Vec<Name>,
    vars: Vec<ProcVar>,
    budget: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn take(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        true
    }

    fn pick_name(&mut self) -> Name {
        self.names.choose(self.rng).expect("alphabet is non-empty").clone()
    }

    fn binder(&mut self) -> Name {
        if self.rng.gen_bool(0.4) {
            self.alpha.names.choose(self.rng).unwrap().clone()
        } else {
            let l = ["x", "y", "z"].choose(self.rng).unwrap();
            self.supply.name(l)
        }
    }

    fn var_binder(&mut self) -> ProcVar {
        if self.rng.gen_bool(0.3) {
            self.alpha.var.clone()
        } else {
            self.supply.var("Y")
        }
    }

    fn abstraction(&mut self) -> Abstraction {
        let w = self.binder();
        self.names.push(w.clone());
        let body = self.proc();
        self.names.pop();
        Abstraction::new(vec![Formal::Name(w)], body)
    }

    fn value(&mut self) -> Value {
        if self.budget > 2 && self.rng.gen_bool(0.25) {
            self.budget -= 1;
            Value::Proc(self.abstraction())
        } else {
            Value::Name(self.pick_name())
        }
    }

    fn branch(&mut self) -> Branch {
        let chan = self.pick_name();
        if self.rng.gen_bool(0.5) {
            let n = self.rng.gen_range(0..=2);
            let formals: Vec<Formal> = (0..n)
                .map(|_| {
                    if self.rng.gen_bool(0.3) {
                        Formal::Var(self.var_binder())
                    } else {
                        Formal::Name(self.binder())
                    }
                })
                .collect();
            // Duplicate formals are ill-formed; keep the first.
            let mut seen = Vec::new();
            let formals: Vec<Formal> = formals.into_iter().filter(|f| {
                let fresh = !seen.contains(&f.id());
                seen.push(f.id());
                fresh
            }).collect();
            let (nn, nv) = (self.names.len(), self.vars.len());
            for f in &formals {
                match f {
                    Formal::Name(x) => self.names.push(x.clone()),
                    Formal::Var(x) => self.vars.push(x.clone()),
                }
            }
            let cont = self.proc();
            self.names.truncate(nn);
            self.vars.truncate(nv);
            Branch {
                prefix: Prefix::Input { chan, formals },
                cont,
            }
        } else {
            let n = self.rng.gen_range(0..=2);
            let args = (0..n).map(|_| self.value()).collect();
            let cont = self.proc();
            Branch {
                prefix: Prefix::Output { chan, args },
                cont,
            }
        }
    }

    fn proc(&mut self) -> Process {
        if !self.take() {
            return Process::nil();
        }
        match self.rng.gen_range(0..12) {
            0 => Process::nil(),
            1..=4 => {
                let k = if self.rng.gen_bool(0.3) { 2 } else { 1 };
                Process::Sum((0..k).map(|_| self.branch()).collect())
            }
            5..=6 => {
                let a = self.proc();
                let b = self.proc();
                Process::par(a, b)
            }
            7..=8 => {
                let x = self.binder();
                self.names.push(x.clone());
                let body = self.proc();
                self.names.pop();
                Process::Restrict(x, Box::new(body))
            }
            9 => {
                let (x, y) = (self.pick_name(), self.pick_name());
                let t = self.proc();
                let e = self.proc();
                Process::cond(x, y, t, e)
            }
            _ => {
                let x = self.vars.choose(self.rng).unwrap().clone();
                let a = self.pick_name();
                Process::VarApp(x, vec![Value::Name(a)])
            }
        }
    }
}

/// A random process of size at most [`MAX_SIZE`] whose free symbols are
/// drawn from `alpha`.
pub fn process<R: Rng>(rng: &mut R, alpha: &Alphabet, supply: &mut NameSupply) -> Process {
    loop {
        let budget = rng.gen_range(1..=MAX_SIZE / 2);
        let mut g = Gen {
            rng: &mut *rng,
            supply: &mut *supply,
            alpha,
            names: alpha.names.clone(),
            vars: vec![alpha.var.clone()],
            budget,
        };
        let p = g.proc();
        if p.size() <= MAX_SIZE {
            return p;
        }
    }
}

/// A random closed value for substitution: a name of the alphabet or a
/// one-parameter abstraction.
pub fn value<R: Rng>(rng: &mut R, alpha: &Alphabet, supply: &mut NameSupply, proc: bool) -> Value {
    let mut g = Gen {
        rng,
        supply,
        alpha,
        names: alpha.names.clone(),
        vars: vec![alpha.var.clone()],
        budget: 8,
    };
    if proc {
        Value::Proc(g.abstraction())
    } else {
        Value::Name(g.pick_name())
    }
}
