//! Structural congruence laws and substitution lemmas as seeded checks
//! against the nameless-term oracle.

use std::collections::HashMap;

use gridpi_core::calculus::{free_names, Branch, DefinitionEnv, Formal, Prefix};
use gridpi_core::{congruent, normalize, substitute, NameSupply, Process, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::db::{self, to_db, value_to_db, DVal};
use super::gen::{self, Alphabet, MAX_SIZE};

/// Cases per law.
pub const CASES: u64 = 500;

macro_rules! ensure {
    ($c:expr) => {
        if !$c {
            return Err(format!("{} failed", stringify!($c)));
        }
    };
}

macro_rules! ensure_eq {
    ($a:expr, $b:expr) => {{
        let (a, b) = (&$a, &$b);
        if a != b {
            return Err(format!("{} != {}: {:?} vs {:?}", stringify!($a), stringify!($b), a, b));
        }
    }};
}

pub type Law = fn(u64) -> Result<(), String>;

pub struct World {
    pub rng: ChaCha8Rng,
    pub supply: NameSupply,
    pub alpha: Alphabet,
}

impl World {
    pub fn new(seed: u64) -> Self {
        let mut supply = NameSupply::new();
        let alpha = Alphabet::new(&mut supply);
        World {
            rng: ChaCha8Rng::seed_from_u64(seed),
            supply,
            alpha,
        }
    }

    pub fn p(&mut self) -> Process {
        let p = gen::process(&mut self.rng, &self.alpha, &mut self.supply);
        assert!(p.size() <= MAX_SIZE);
        p
    }

    pub fn cong(&mut self, p: &Process, q: &Process) -> bool {
        congruent(p, q, &mut self.supply)
    }
}

pub fn par_with_nil(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    ensure!(w.cong(&Process::par(p.clone(), Process::nil()), &p));
    Ok(())
}

pub fn alpha_variants_are_congruent(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    let q = w.alpha.registry().build(&to_db(&p), &mut w.supply);
    ensure_eq!(to_db(&q), to_db(&p));
    ensure!(w.cong(&p, &q));
    Ok(())
}

pub fn par_commutes(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let (p, q) = (w.p(), w.p());
    ensure!(w.cong(&Process::par(p.clone(), q.clone()), &Process::par(q, p)));
    Ok(())
}

pub fn par_associates(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let (p, q, r) = (w.p(), w.p(), w.p());
    let left = Process::par(p.clone(), Process::par(q.clone(), r.clone()));
    let right = Process::par(Process::par(p, q), r);
    ensure!(w.cong(&left, &right));
    Ok(())
}

pub fn restricted_nil(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let x = if w.rng.gen_bool(0.5) { w.alpha.names[0].clone() } else { w.supply.name("x") };
    ensure!(w.cong(&Process::restrict(x, Process::nil()), &Process::nil()));
    Ok(())
}

pub fn scope_extrusion(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let (p, q) = (w.p(), w.p());
    let fp = free_names(&p);
    let x = match w.alpha.names.iter().find(|n| !fp.contains(*n)) {
        Some(n) => n.clone(),
        None => w.supply.name("x"),
    };
    let left = Process::par(p.clone(), Process::restrict(x.clone(), q.clone()));
    let right = Process::restrict(x, Process::par(p, q));
    ensure!(w.cong(&left, &right));
    Ok(())
}

pub fn restrictions_commute(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    let mut ns = w.alpha.names.clone();
    ns.shuffle(&mut w.rng);
    let (x, y) = (ns[0].clone(), ns[1].clone());
    let left = Process::restrict(x.clone(), Process::restrict(y.clone(), p.clone()));
    let right = Process::restrict(y, Process::restrict(x, p));
    ensure!(w.cong(&left, &right));
    Ok(())
}

pub fn conditionals_resolve(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let (p, q) = (w.p(), w.p());
    let a = w.alpha.names.choose(&mut w.rng).unwrap().clone();
    let b = w.alpha.names.iter().find(|n| **n != a).unwrap().clone();
    let same = Process::cond(a.clone(), a.clone(), p.clone(), q.clone());
    let differ = Process::cond(a, b, p.clone(), q.clone());
    ensure!(w.cong(&same, &p));
    ensure!(w.cong(&differ, &q));
    Ok(())
}

pub fn definitions_unfold_to_their_instance(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let body = w.p();
    let formals: Vec<Formal> = w.alpha.names.iter().cloned().map(Formal::Name)
        .chain([Formal::Var(w.alpha.var.clone())]).collect();
    let mut env = DefinitionEnv::new();
    env.define("D", formals.clone(), body.clone()).unwrap();
    let mut args = Vec::new();
    for f in &formals {
        args.push(gen::value(&mut w.rng, &w.alpha, &mut w.supply, f.is_var()));
    }
    let unfolded = env.unfold("D", &args, &mut w.supply).unwrap();
    let map: HashMap<u64, DVal> = formals.iter().map(|f| f.id()).zip(args.iter().map(value_to_db)).collect();
    let expected = db::subst(&to_db(&body), &map);
    ensure_eq!(to_db(&unfolded), expected.clone());
    let rebuilt = w.alpha.registry().build(&expected, &mut w.supply);
    ensure!(w.cong(&unfolded, &rebuilt));
    Ok(())
}

pub fn sums_are_unordered(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let mut branches = Vec::new();
    for _ in 0..w.rng.gen_range(2..=4) {
        let chan = w.alpha.names.choose(&mut w.rng).unwrap().clone();
        let arg = w.alpha.names.choose(&mut w.rng).unwrap().clone();
        let cont = w.p();
        branches.push(Branch { prefix: Prefix::Output { chan, args: vec![Value::Name(arg)] }, cont });
    }
    let mut shuffled = branches.clone();
    shuffled.shuffle(&mut w.rng);
    ensure!(w.cong(&Process::Sum(branches), &Process::Sum(shuffled)));
    Ok(())
}

pub fn congruence_is_closed_under_prefixes(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    let x = w.supply.name("x");
    let a = w.alpha.names[0].clone();
    let guarded = |q: Process| Process::input(a.clone(), vec![Formal::Name(x.clone())], q);
    ensure!(w.cong(&guarded(Process::par(p.clone(), Process::nil())), &guarded(p)));
    Ok(())
}

pub fn extra_component_breaks_congruence(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    let a = w.alpha.names[0].clone();
    let q = Process::par(p.clone(), Process::output(a, vec![], Process::nil()));
    ensure!(!w.cong(&p, &q));
    Ok(())
}

pub fn normal_form_is_idempotent_and_congruent(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    let n = normalize(&p, &mut w.supply);
    let nn = normalize(&n, &mut w.supply);
    ensure_eq!(to_db(&n), to_db(&nn));
    ensure!(w.cong(&p, &n));
    Ok(())
}

pub fn substitution_matches_the_oracle(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    let mut targets: Vec<Formal> = w.alpha.names.iter().cloned().map(Formal::Name).collect();
    targets.push(Formal::Var(w.alpha.var.clone()));
    targets.shuffle(&mut w.rng);
    targets.truncate(w.rng.gen_range(1..=4));
    let args: Vec<Value> = targets.iter()
        .map(|f| gen::value(&mut w.rng, &w.alpha, &mut w.supply, f.is_var()))
        .collect();
    let got = substitute(&p, &targets, &args, &mut w.supply).unwrap();
    let map: HashMap<u64, DVal> = targets.iter().map(|f| f.id()).zip(args.iter().map(value_to_db)).collect();
    ensure_eq!(to_db(&got), db::subst(&to_db(&p), &map));
    Ok(())
}

pub fn identity_substitution(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    let a = w.alpha.names.choose(&mut w.rng).unwrap().clone();
    let got = substitute(&p, &[Formal::Name(a.clone())], &[Value::Name(a)], &mut w.supply).unwrap();
    ensure_eq!(to_db(&got), to_db(&p));
    Ok(())
}

pub fn substituting_an_absent_name_is_identity(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    let fresh = w.supply.name("f");
    let a = w.alpha.names.choose(&mut w.rng).unwrap().clone();
    let got = substitute(&p, &[Formal::Name(fresh)], &[Value::Name(a)], &mut w.supply).unwrap();
    ensure_eq!(to_db(&got), to_db(&p));
    Ok(())
}

pub fn fresh_renaming_round_trips(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    let a = w.alpha.names.choose(&mut w.rng).unwrap().clone();
    let f = w.supply.name("f");
    let there = substitute(&p, &[Formal::Name(a.clone())], &[Value::Name(f.clone())], &mut w.supply).unwrap();
    ensure!(!free_names(&there).contains(&a));
    let back = substitute(&there, &[Formal::Name(f)], &[Value::Name(a)], &mut w.supply).unwrap();
    ensure_eq!(to_db(&back), to_db(&p));
    Ok(())
}

pub fn free_names_after_renaming(seed: u64) -> Result<(), String> {
    let mut w = World::new(seed);
    let p = w.p();
    let a = w.alpha.names.choose(&mut w.rng).unwrap().clone();
    let b = w.alpha.names.choose(&mut w.rng).unwrap().clone();
    let got = substitute(&p, &[Formal::Name(a.clone())], &[Value::Name(b.clone())], &mut w.supply).unwrap();
    let mut expected = free_names(&p);
    if expected.remove(&a) {
        expected.insert(b);
    }
    ensure_eq!(free_names(&got), expected);
    Ok(())
}

pub const LAWS: &[(&str, Law)] = &[
    ("par_with_nil", par_with_nil),
    ("alpha_variants_are_congruent", alpha_variants_are_congruent),
    ("par_commutes", par_commutes),
    ("par_associates", par_associates),
    ("restricted_nil", restricted_nil),
    ("scope_extrusion", scope_extrusion),
    ("restrictions_commute", restrictions_commute),
    ("conditionals_resolve", conditionals_resolve),
    ("definitions_unfold_to_their_instance", definitions_unfold_to_their_instance),
    ("sums_are_unordered", sums_are_unordered),
    ("congruence_is_closed_under_prefixes", congruence_is_closed_under_prefixes),
    ("extra_component_breaks_congruence", extra_component_breaks_congruence),
    ("normal_form_is_idempotent_and_congruent", normal_form_is_idempotent_and_congruent),
    ("substitution_matches_the_oracle", substitution_matches_the_oracle),
    ("identity_substitution", identity_substitution),
    ("substituting_an_absent_name_is_identity", substituting_an_absent_name_is_identity),
    ("fresh_renaming_round_trips", fresh_renaming_round_trips),
    ("free_names_after_renaming", free_names_after_renaming),
];

/// Runs every law on seeds `0..cases`; returns the failures.
pub fn run_all(cases: u64) -> Vec<(String, u64, String)> {
    let mut out = Vec::new();
    for (name, law) in LAWS {
        for seed in 0..cases {
            if let Err(e) = law(seed) {
                out.push((name.to_string(), seed, e));
            }
        }
    }
    out
}
