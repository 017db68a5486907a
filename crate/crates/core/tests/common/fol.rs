//! First-order formulas for the configuration laws, evaluated naively over
//! the finite model given by a configuration.

use std::collections::{BTreeMap, BTreeSet};

use gridpi_core::grid::{GridConfig, InvariantId, TaskDef};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy)]
pub enum Dom {
    U,
    V,
    D,
    R,
    N,
    S,
    /// Basic subtasks, as `instance/index`.
    B,
}

pub enum F {
    Rel(&'static str, Vec<&'static str>),
    Eq(&'static str, &'static str),
    Not(Box<F>),
    And(Vec<F>),
    Implies(Box<F>, Box<F>),
    All(&'static str, Dom, Box<F>),
    Some(&'static str, Dom, Box<F>),
}

fn rel(r: &'static str, xs: &[&'static str]) -> F {
    F::Rel(r, xs.to_vec())
}
fn not(f: F) -> F {
    F::Not(Box::new(f))
}
fn imp(a: F, b: F) -> F {
    F::Implies(Box::new(a), Box::new(b))
}
fn all(x: &'static str, d: Dom, f: F) -> F {
    F::All(x, d, Box::new(f))
}
fn some(x: &'static str, d: Dom, f: F) -> F {
    F::Some(x, d, Box::new(f))
}

/// `∀x∈d1. ∃!y∈d2. r(x, y)`.
fn exactly_one(r: &'static str, d1: Dom, d2: Dom) -> F {
    all(
        "x",
        d1,
        some(
            "y",
            d2,
            F::And(vec![rel(r, &["x", "y"]), all("y2", d2, imp(rel(r, &["x", "y2"]), F::Eq("y2", "y")))]),
        ),
    )
}

pub fn formulas() -> Vec<(InvariantId, F)> {
    use Dom::*;
    vec![
        (InvariantId::I1, exactly_one("member", U, V)),
        (
            InvariantId::I2,
            F::And(vec![
                exactly_one("taskOf", U, S),
                all(
                    "s",
                    S,
                    all(
                        "u",
                        U,
                        all(
                            "u2",
                            U,
                            imp(F::And(vec![rel("taskOf", &["u", "s"]), rel("taskOf", &["u2", "s"])]), F::Eq("u", "u2")),
                        ),
                    ),
                ),
            ]),
        ),
        (InvariantId::I3, exactly_one("belongsTo", R, D)),
        (InvariantId::I4, all("d", D, some("v", V, rel("participate", &["d", "v"])))),
        (InvariantId::I5, exactly_one("nodeVO", N, V)),
        (
            InvariantId::I6,
            all("u", U, all("v", V, imp(rel("member", &["u", "v"]), some("n", N, rel("nodeVO", &["n", "v"]))))),
        ),
        (
            InvariantId::I7,
            all(
                "u",
                U,
                all(
                    "s",
                    S,
                    all(
                        "b",
                        B,
                        imp(
                            F::And(vec![rel("taskOf", &["u", "s"]), rel("basicOf", &["b", "s"])]),
                            some(
                                "v",
                                V,
                                some(
                                    "d",
                                    D,
                                    F::And(vec![
                                        rel("member", &["u", "v"]),
                                        rel("participate", &["d", "v"]),
                                        rel("covers", &["d", "b"]),
                                    ]),
                                ),
                            ),
                        ),
                    ),
                ),
            ),
        ),
        (InvariantId::I8, all("v", V, some("d", D, rel("participate", &["d", "v"])))),
    ]
}

/// The finite model: domains and relations as sets of tuples.
pub struct Model {
    doms: BTreeMap<u8, Vec<String>>,
    rels: BTreeMap<&'static str, BTreeSet<Vec<String>>>,
}

fn key(d: Dom) -> u8 {
    d as u8
}

fn pairs(s: &BTreeSet<(String, String)>) -> BTreeSet<Vec<String>> {
    s.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect()
}

impl Model {
    pub fn of(cfg: &GridConfig) -> Self {
        let mut doms = BTreeMap::new();
        let v = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>();
        doms.insert(key(Dom::U), v(&cfg.users));
        doms.insert(key(Dom::V), v(&cfg.vos));
        doms.insert(key(Dom::D), v(&cfg.ads));
        doms.insert(key(Dom::R), v(&cfg.resources));
        doms.insert(key(Dom::N), v(&cfg.nodes));
        doms.insert(key(Dom::S), cfg.user_tasks.keys().cloned().collect());
        let mut basics = Vec::new();
        let mut basic_of = BTreeSet::new();
        let mut covers = BTreeSet::new();
        for (s, tid) in &cfg.user_tasks {
            let Some(t) = cfg.task_defs.get(tid) else { continue };
            for (i, b) in t.basics().into_iter().enumerate() {
                let bid = format!("{s}/{i}");
                basics.push(bid.clone());
                basic_of.insert(vec![bid.clone(), s.clone()]);
                for d in &cfg.ads {
                    // Each demanded kind, counted with multiplicity, has that
                    // many resources of the kind in d.
                    let ok = b.kinds.iter().all(|k| {
                        let need = b.kinds.iter().filter(|x| *x == k).count();
                        let have = cfg
                            .resources
                            .iter()
                            .filter(|r| {
                                cfg.belongs_to.contains(&((*r).clone(), d.clone()))
                                    && cfg.resource_kind.contains(&((*r).clone(), k.clone()))
                            })
                            .count();
                        have >= need
                    });
                    if ok {
                        covers.insert(vec![d.clone(), bid.clone()]);
                    }
                }
            }
        }
        doms.insert(key(Dom::B), basics);
        let mut rels = BTreeMap::new();
        rels.insert("member", pairs(&cfg.member));
        rels.insert("taskOf", pairs(&cfg.task_of));
        rels.insert("belongsTo", pairs(&cfg.belongs_to));
        rels.insert("participate", pairs(&cfg.participate));
        rels.insert("nodeVO", pairs(&cfg.node_vo));
        rels.insert("basicOf", basic_of);
        rels.insert("covers", covers);
        Model { doms, rels }
    }

    pub fn eval(&self, f: &F, env: &mut Vec<(&'static str, String)>) -> bool {
        let look = |env: &Vec<(&'static str, String)>, x: &str| {
            env.iter().rev().find(|(y, _)| *y == x).expect("bound variable").1.clone()
        };
        match f {
            F::Rel(r, xs) => {
                let t: Vec<String> = xs.iter().map(|x| look(env, x)).collect();
                self.rels[r].contains(&t)
            }
            F::Eq(a, b) => look(env, a) == look(env, b),
            F::Not(g) => !self.eval(g, env),
            F::And(gs) => gs.iter().all(|g| self.eval(g, env)),
            F::Implies(a, b) => !self.eval(a, env) || self.eval(b, env),
            F::All(x, d, g) | F::Some(x, d, g) => {
                let universal = matches!(f, F::All(..));
                for e in &self.doms[&key(*d)] {
                    env.push((x, e.clone()));
                    let r = self.eval(g, env);
                    env.pop();
                    if r != universal {
                        return r;
                    }
                }
                universal
            }
        }
    }
}

/// Laws whose formula is false in `cfg`.
pub fn violated(cfg: &GridConfig) -> BTreeSet<InvariantId> {
    let m = Model::of(cfg);
    formulas()
        .into_iter()
        .filter(|(_, f)| !m.eval(f, &mut Vec::new()))
        .map(|(id, _)| id)
        .collect()
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn task<R: Rng>(rng: &mut R, kinds: &[String], depth: usize, job: &mut usize) -> TaskDef {
    if depth == 0 || rng.gen_bool(0.5) {
        *job += 1;
        let n = rng.gen_range(1..=3);
        let ks: Vec<&str> = (0..n).map(|_| kinds.choose(rng).unwrap().as_str()).collect();
        return TaskDef::basic(&format!("J{job}"), &ks);
    }
    let a = task(rng, kinds, depth - 1, job);
    let b = task(rng, kinds, depth - 1, job);
    match rng.gen_range(0..3) {
        0 => TaskDef::seq(a, b),
        1 => TaskDef::par(a, b),
        _ => TaskDef::choice(a, b),
    }
}

/// A relation over `xs × ys`: either a random function (possibly
/// perturbed) or an arbitrary random set of pairs.
fn relation<R: Rng>(rng: &mut R, xs: &[String], ys: &[String]) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    if ys.is_empty() {
        return out;
    }
    if rng.gen_bool(0.6) {
        for x in xs {
            out.insert((x.clone(), ys.choose(rng).unwrap().clone()));
        }
        if rng.gen_bool(0.3) {
            let x = xs.choose(rng);
            if let Some(x) = x {
                out.insert((x.clone(), ys.choose(rng).unwrap().clone()));
            }
        }
        if rng.gen_bool(0.2) && !out.is_empty() {
            let first = out.iter().next().unwrap().clone();
            out.remove(&first);
        }
    } else {
        let p = rng.gen_range(0.1..0.7);
        for x in xs {
            for y in ys {
                if rng.gen_bool(p) {
                    out.insert((x.clone(), y.clone()));
                }
            }
        }
    }
    out
}

/// A random configuration whose base sets have at most five elements.
pub fn random_config(seed: u64) -> GridConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n = || rng.gen_range(0..=5);
    let (users, vos, ads, res, nodes, insts) = (ids("u", n()), ids("v", n()), ids("d", n()), ids("r", n()), ids("n", n()), ids("S", n()));
    let kinds = ids("k", rng.gen_range(1..=5));
    let mut cfg = GridConfig {
        users: users.iter().cloned().collect(),
        vos: vos.iter().cloned().collect(),
        ads: ads.iter().cloned().collect(),
        resources: res.iter().cloned().collect(),
        nodes: nodes.iter().cloned().collect(),
        descriptors: kinds.iter().cloned().collect(),
        ..GridConfig::default()
    };
    let mut job = 0;
    for s in &insts {
        let tid = format!("T{}", &s[1..]);
        let t = task(&mut rng, &kinds, 2, &mut job);
        cfg.task_defs.insert(tid.clone(), t);
        cfg.user_tasks.insert(s.clone(), tid);
    }
    cfg.member = relation(&mut rng, &users, &vos);
    cfg.task_of = relation(&mut rng, &users, &insts);
    cfg.belongs_to = relation(&mut rng, &res, &ads);
    cfg.participate = relation(&mut rng, &ads, &vos);
    cfg.node_vo = relation(&mut rng, &nodes, &vos);
    for r in &res {
        cfg.resource_kind.insert((r.clone(), kinds.choose(&mut rng).unwrap().clone()));
    }
    cfg
}
