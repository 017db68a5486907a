//! Encoding of a configuration as a process term.
//!
//! The encoder writes a `.hopi` program (one family of definitions per
//! protocol role, specialised to the configuration's arities and resource
//! tables) and parses it. The generated text doubles as the shipped prelude.

use std::collections::{BTreeMap, BTreeSet};

use crate::calculus::{Abstraction, Branch, DefinitionEnv, Formal, Name, NameSupply, Prefix, Process, Value};
use crate::syntax::{parse_program, pretty_program_annotated};

use super::config::{GridConfig, Id};
use super::invariants::{check_invariants, InvariantId, Violation};
use super::task::TaskDef;
use super::GridError;

/// Constants the protocol itself relies on.
pub const PROTOCOL_CONSTANTS: &[&str] = &[
    "ok",
    "denied",
    "null",
    "none",
    "state",
    "result",
    "submitted",
    "queued",
    "running",
    "finished",
    "free",
    "busy",
    "delivered",
];

/// Definitions transcribed from displayed terms; every other family is
/// reconstructed from the protocol description.
const DISPLAYED: &[&str] = &["User_c", "PrxHdl_", "Assign"];

#[derive(Clone, Debug)]
pub struct UserEntry {
    pub id: Id,
    pub vo: Id,
    pub node: Id,
    /// User task instance.
    pub task: Id,
    pub creds: Vec<Id>,
}

#[derive(Clone, Debug)]
pub struct NodeEntry {
    pub id: Id,
    pub vo: Id,
    /// Access channel `y` of the node's access point.
    pub channel: Name,
}

#[derive(Clone, Debug)]
pub struct AdEntry {
    pub id: Id,
    /// `(resource, kind)` in resource order.
    pub resources: Vec<(Id, Id)>,
    /// Request channel `d` of the domain.
    pub channel: Name,
}

/// Sizes and the component registry of an encoding.
#[derive(Clone, Debug)]
pub struct EncodingParams {
    /// Users.
    pub omega: usize,
    /// VOs.
    pub mu: usize,
    /// Administrative domains.
    pub delta: usize,
    /// Access nodes.
    pub eta: usize,
    /// Kind-tuple arities of basic tasks.
    pub zetas: BTreeSet<usize>,
    pub users: Vec<UserEntry>,
    pub nodes: Vec<NodeEntry>,
    pub ads: Vec<AdEntry>,
}

impl EncodingParams {
    pub fn user(&self, id: &str) -> Option<&UserEntry> {
        self.users.iter().find(|u| u.id == id)
    }

    pub fn ad(&self, id: &str) -> Option<&AdEntry> {
        self.ads.iter().find(|d| d.id == id)
    }
}

#[derive(Clone, Debug)]
pub struct Encoding {
    pub env: DefinitionEnv,
    pub main: Process,
    pub params: EncodingParams,
    /// Supply that allocated every name in `env` and `main`.
    pub supply: NameSupply,
    /// Non-fatal findings (I7: a job no single AD can serve).
    pub warnings: Vec<Violation>,
}

impl Encoding {
    /// The program as `.hopi` text, reconstructed definitions marked.
    pub fn prelude(&self) -> String {
        let mut out = String::from("# Generated grid encoding.\n\n");
        out.push_str(&pretty_program_annotated(&self.env, &self.main, |id| {
            (!DISPLAYED.iter().any(|p| id.starts_with(p))).then(|| "reconstructed".to_string())
        }));
        out
    }
}

/// Encodes `cfg`, refusing configurations that break I1..I6 or I8.
pub fn encode_grid(cfg: &GridConfig) -> Result<Encoding, GridError> {
    cfg.validate()?;
    let report = check_invariants(cfg);
    let (warnings, fatal): (Vec<_>, Vec<_>) =
        report.violations.into_iter().partition(|v| v.invariant == InvariantId::I7);
    if !fatal.is_empty() {
        return Err(GridError::InvariantViolation(super::InvariantReport { violations: fatal }));
    }
    check_identifiers(cfg)?;
    let g = Gen::new(cfg)?;
    let text = g.program();
    let mut supply = NameSupply::new();
    let prog = parse_program(&text, &mut supply)
        .map_err(|e| GridError::Malformed(format!("generated program does not parse: {e}")))?;
    if let Some(n) = prog.free.keys().next() {
        return Err(GridError::Malformed(format!("generated main has free identifier {n}")));
    }
    check_capture(&prog.env, &prog.main)?;
    let restricted = restricted_by_label(&prog.main);
    let chan = |label: &str| -> Result<Name, GridError> {
        restricted
            .get(label)
            .cloned()
            .ok_or_else(|| GridError::Malformed(format!("channel {label} missing from main")))
    };
    let mut nodes = Vec::new();
    for (n, vo) in &g.nodes {
        nodes.push(NodeEntry {
            id: n.clone(),
            vo: vo.clone(),
            channel: chan(&format!("y_{n}"))?,
        });
    }
    let mut ads = Vec::new();
    for d in &cfg.ads {
        ads.push(AdEntry {
            id: d.clone(),
            resources: cfg.resources_of(d).into_iter().map(|(r, k)| (r.clone(), k.clone())).collect(),
            channel: chan(&format!("d_{d}"))?,
        });
    }
    let params = EncodingParams {
        omega: cfg.users.len(),
        mu: cfg.vos.len(),
        delta: cfg.ads.len(),
        eta: cfg.nodes.len(),
        zetas: g.zetas.clone(),
        users: g.users.clone(),
        nodes,
        ads,
    };
    Ok(Encoding {
        env: prog.env,
        main: prog.main,
        params,
        supply,
        warnings,
    })
}

/// Encodes one task for the channels `t` and `e`, as a process.
pub fn encode_task(task: &TaskDef) -> String {
    let mut ctr = 0;
    encode_cps(task, "none", &[], &mut ctr)
}

fn valid_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !crate::syntax::KEYWORDS.contains(&s)
}

fn check_identifiers(cfg: &GridConfig) -> Result<(), GridError> {
    let creds = cfg.credentials.values().flatten();
    let jobs: Vec<Id> = cfg.task_defs.values().flat_map(|t| t.basics()).map(|b| b.job.clone()).collect();
    for id in cfg
        .users
        .iter()
        .chain(&cfg.vos)
        .chain(&cfg.ads)
        .chain(&cfg.resources)
        .chain(&cfg.nodes)
        .chain(&cfg.descriptors)
        .chain(creds)
        .chain(&jobs)
    {
        if !valid_ident(id) {
            return Err(GridError::Malformed(format!("`{id}` is not a valid identifier")));
        }
        if PROTOCOL_CONSTANTS.contains(&id.as_str()) {
            return Err(GridError::Malformed(format!("`{id}` is reserved by the encoding")));
        }
    }
    Ok(())
}

fn binder_labels(p: &Process, out: &mut BTreeSet<String>) {
    fn formals(fs: &[Formal], out: &mut BTreeSet<String>) {
        for f in fs {
            if let Formal::Name(n) = f {
                out.insert(n.label().to_string());
            }
        }
    }
    fn values(vs: &[Value], out: &mut BTreeSet<String>) {
        for v in vs {
            if let Value::Proc(Abstraction { params, body }) = v {
                formals(params, out);
                binder_labels(body, out);
            }
        }
    }
    match p {
        Process::Sum(bs) => {
            for Branch { prefix, cont } in bs {
                match prefix {
                    Prefix::Input { formals: fs, .. } => formals(fs, out),
                    Prefix::Output { args, .. } => values(args, out),
                }
                binder_labels(cont, out);
            }
        }
        Process::Par(a, b) => {
            binder_labels(a, out);
            binder_labels(b, out);
        }
        Process::Restrict(n, q) => {
            out.insert(n.label().to_string());
            binder_labels(q, out);
        }
        Process::Cond {
            then_branch,
            else_branch,
            ..
        } => {
            binder_labels(then_branch, out);
            binder_labels(else_branch, out);
        }
        Process::Call(_, args) | Process::VarApp(_, args) => values(args, out),
    }
}

/// A configuration identifier that equals an internal binder label could be
/// captured by it.
fn check_capture(env: &DefinitionEnv, main: &Process) -> Result<(), GridError> {
    let consts: BTreeSet<&str> = env.constants().iter().map(|c| c.label()).collect();
    let mut labels = BTreeSet::new();
    binder_labels(main, &mut labels);
    for (id, def) in env.iter() {
        if consts.contains(&id[..]) {
            return Err(GridError::Malformed(format!("`{id}` clashes with a definition name")));
        }
        for f in &def.formals {
            if let Formal::Name(n) = f {
                labels.insert(n.label().to_string());
            }
        }
        binder_labels(&def.body, &mut labels);
    }
    match labels.iter().find(|l| consts.contains(l.as_str())) {
        Some(l) => Err(GridError::Malformed(format!("`{l}` clashes with a name used by the encoding"))),
        None => Ok(()),
    }
}

fn restricted_by_label(p: &Process) -> BTreeMap<String, Name> {
    let mut out = BTreeMap::new();
    fn walk(p: &Process, out: &mut BTreeMap<String, Name>) {
        match p {
            Process::Restrict(n, q) => {
                out.entry(n.label().to_string()).or_insert_with(|| n.clone());
                walk(q, out);
            }
            Process::Par(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            _ => {}
        }
    }
    walk(p, &mut out);
    out
}

fn seq(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn args(parts: &[String]) -> String {
    parts.join(", ")
}

/// `a + b + ...`, or `0` when empty.
fn sum(branches: Vec<String>) -> String {
    if branches.is_empty() {
        "0".into()
    } else {
        branches.join("\n      + ")
    }
}

fn multiset<'a>(ks: impl IntoIterator<Item = &'a Id>) -> BTreeMap<&'a Id, usize> {
    let mut m = BTreeMap::new();
    for k in ks {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

fn within(need: &BTreeMap<&Id, usize>, have: &BTreeMap<&Id, usize>) -> bool {
    need.iter().all(|(k, n)| have.get(k).copied().unwrap_or(0) >= *n)
}

/// Decision tree over the values of `kind1..kindzeta`: `leaf` at a full
/// tuple, `miss` for unknown kinds or once `viable` fails.
fn kind_tree(
    zeta: usize,
    kinds: &[Id],
    prefix: &mut Vec<Id>,
    viable: &dyn Fn(&[Id]) -> bool,
    leaf: &dyn Fn(&[Id]) -> String,
    miss: &str,
) -> String {
    if !viable(prefix) {
        return miss.to_string();
    }
    if prefix.len() == zeta {
        return leaf(prefix);
    }
    let i = prefix.len() + 1;
    let mut acc = miss.to_string();
    for k in kinds.iter().rev() {
        prefix.push(k.clone());
        let sub = kind_tree(zeta, kinds, prefix, viable, leaf, miss);
        prefix.pop();
        acc = format!("if kind{i} = {k} then ({sub}) else {acc}");
    }
    acc
}

enum Frame<'a> {
    Then(&'a TaskDef),
    Send(String),
}

fn resume(frames: &[Frame], r: &str, ctr: &mut usize) -> String {
    match frames.split_last() {
        None => format!("e<{r}>"),
        Some((Frame::Send(ch), _)) => format!("{ch}<{r}>"),
        Some((Frame::Then(t), rest)) => encode_cps(t, r, rest, ctr),
    }
}

/// Continuation-passing encoding: each job is requested on `t` and its
/// result threaded to the continuation; the last result is reported on `e`.
fn encode_cps(t: &TaskDef, last: &str, frames: &[Frame], ctr: &mut usize) -> String {
    *ctr += 1;
    let i = *ctr;
    match t {
        TaskDef::End => resume(frames, last, ctr),
        TaskDef::Basic(b) => {
            let cont = resume(frames, &format!("res{i}"), ctr);
            format!(
                "new done{i}. t<{}, {{(z) z<{}>}}, done{i}>. done{i}(res{i}). {cont}",
                args(&b.kinds),
                b.job
            )
        }
        TaskDef::Seq(a, b) => {
            let mut fs: Vec<Frame> = frames.iter().map(Frame::reborrow).collect();
            fs.push(Frame::Then(b));
            encode_cps(a, last, &fs, ctr)
        }
        TaskDef::ParT(a, b) => {
            let left = encode_cps(a, last, &[Frame::Send(format!("j{i}"))], ctr);
            let right = encode_cps(b, last, &[Frame::Send(format!("jj{i}"))], ctr);
            let cont = resume(frames, &format!("y{i}"), ctr);
            format!("new j{i}, jj{i}. ({left} | {right} | j{i}(x{i}). jj{i}(y{i}). {cont})")
        }
        TaskDef::Choice(a, b) => {
            let left = encode_cps(a, last, frames, ctr);
            let right = encode_cps(b, last, frames, ctr);
            format!("new c{i}. (c{i}<> | c{i}(). ({left}) + c{i}(). ({right}))")
        }
    }
}

impl<'a> Frame<'a> {
    fn reborrow(&self) -> Frame<'a> {
        match self {
            Frame::Then(t) => Frame::Then(t),
            Frame::Send(s) => Frame::Send(s.clone()),
        }
    }
}

struct Gen<'c> {
    cfg: &'c GridConfig,
    users: Vec<UserEntry>,
    /// `(node, vo)` in node order.
    nodes: Vec<(Id, Id)>,
    zetas: BTreeSet<usize>,
    cred_arities: BTreeSet<usize>,
    kinds: Vec<Id>,
}

impl<'c> Gen<'c> {
    fn new(cfg: &'c GridConfig) -> Result<Self, GridError> {
        let mut users = Vec::new();
        for u in &cfg.users {
            let vo = cfg.vo_of(u).expect("I1 holds").clone();
            let node = cfg
                .node_of(u)
                .ok_or_else(|| GridError::Malformed(format!("user {u} has no access node")))?
                .clone();
            if cfg.vo_of_node(&node) != Some(&vo) {
                return Err(GridError::Malformed(format!("node {node} of user {u} is not in VO {vo}")));
            }
            users.push(UserEntry {
                id: u.clone(),
                vo,
                node,
                task: cfg.task_instance_of(u).expect("I2 holds").clone(),
                creds: cfg.credentials.get(u).cloned().unwrap_or_default(),
            });
        }
        let nodes = cfg
            .nodes
            .iter()
            .map(|n| (n.clone(), cfg.vo_of_node(n).expect("I5 holds").clone()))
            .collect();
        let zetas = users
            .iter()
            .filter_map(|u| cfg.task_def_of(&u.id))
            .flat_map(|t| t.basics())
            .map(|b| b.kinds.len())
            .collect();
        let cred_arities = users.iter().map(|u| u.creds.len()).collect();
        Ok(Self {
            cfg,
            users,
            nodes,
            zetas,
            cred_arities,
            kinds: cfg.descriptors.iter().cloned().collect(),
        })
    }

    fn ads_of(&self, vo: &str) -> Vec<&'c Id> {
        self.cfg.ads_of_vo(vo)
    }

    fn program(&self) -> String {
        let mut consts: BTreeSet<String> = PROTOCOL_CONSTANTS.iter().map(|s| s.to_string()).collect();
        consts.extend(self.cfg.users.iter().cloned());
        consts.extend(self.cfg.ads.iter().cloned());
        consts.extend(self.cfg.resources.iter().cloned());
        consts.extend(self.cfg.descriptors.iter().cloned());
        consts.extend(self.cfg.credentials.values().flatten().cloned());
        consts.extend(
            self.cfg
                .task_defs
                .values()
                .flat_map(|t| t.basics())
                .map(|b| b.job.clone()),
        );
        let mut out = format!("const {}\n\n", consts.into_iter().collect::<Vec<_>>().join(", "));
        for (name, text) in self.defs() {
            out.push_str(&format!("def {name} =\n    {text}\n\n"));
        }
        out.push_str("main =\n    ");
        out.push_str(&self.main());
        out.push('\n');
        out
    }

    /// `(header, body)` pairs, header including the formals.
    fn defs(&self) -> Vec<(String, String)> {
        let mut d = Vec::new();
        for &n in &self.cred_arities {
            d.push(self.user_def(n));
            d.push(self.monitor_def(n));
        }
        let vos: BTreeSet<&Id> = self.nodes.iter().map(|(_, v)| v).collect();
        for vo in &vos {
            d.push(self.ap_def(vo));
            d.extend(self.auth_defs(vo));
            d.push(self.usrhdl_def(vo));
            d.push(self.prxhdl_def(vo));
        }
        d.push(self.log_def());
        let widths: BTreeSet<usize> = vos.iter().map(|v| self.ads_of(v).len()).collect();
        for &n in &widths {
            d.extend(self.acc_defs(n));
        }
        let searched: BTreeSet<&Id> = vos.iter().flat_map(|v| self.ads_of(v)).collect();
        for &z in &self.zetas {
            for ad in &searched {
                d.push(self.search_def(z, ad));
            }
        }
        d.push(self.uprx_def());
        for &z in &self.zetas {
            d.push(self.launch_def(z));
        }
        d.push(self.receptor_def());
        d.push(self.nil_def());
        for &z in &self.zetas {
            d.push(self.cell_def(z));
        }
        d.push(self.assign_def());
        for ad in &self.cfg.ads {
            d.push(self.lrm_def(ad));
        }
        d.push((
            "RPrx(rid, x, q, r, w)".into(),
            "x(a, @J, f). r<{(z) J<z>}>. RPrxBusy<rid, x, q, r, w, a, f>".into(),
        ));
        d.push((
            "RPrxBusy(rid, x, q, r, w, a, f)".into(),
            "q(res). w<>. f<res>. RPrx<rid, x, q, r, w>".into(),
        ));
        d.push((
            "Resource(r, q)".into(),
            "r(@J). new z. (J<z> | z(res). q<res>. Resource<r, q>)".into(),
        ));
        for ad in &self.cfg.ads {
            d.push(self.ad_def(ad));
        }
        d
    }

    fn user_def(&self, n: usize) -> (String, String) {
        let c = args(&seq("cred", n));
        let mut head = c.clone();
        if n > 0 {
            head.push_str(", ");
        }
        (
            format!("User_c{n}({head}@S, y, @P)"),
            format!(
                "new u. y<{head}u>. u(ch1, ch2, m). if m = ok then ch1<>. ch1(a). ch1<{{(t, e) S<t, e>}}>. ch1(g). Monitor_c{n}<{head}g, a, y, {{(z) P<z>}}> else 0"
            ),
        )
    }

    fn monitor_def(&self, n: usize) -> (String, String) {
        let mut c = args(&seq("cred", n));
        if n > 0 {
            c.push_str(", ");
        }
        let again = format!("Monitor_c{n}<{c}g, a, y, {{(w) P<w>}}>");
        (
            format!("Monitor_c{n}({c}g, a, y, @P)"),
            format!(
                "new r. g<r>. r(st, z). if st = finished then (if z = null then {again} else P<z>) else {again}"
            ),
        )
    }

    fn ap_def(&self, vo: &str) -> (String, String) {
        let d = args(&seq("dch", self.ads_of(vo).len()));
        let branches = self
            .cred_arities
            .iter()
            .map(|&n| {
                let mut c = args(&seq("cred", n));
                if n > 0 {
                    c.push_str(", ");
                }
                format!("y({c}u). (AP_{vo}<y, {d}> | Auth_{vo}_c{n}_1<{c}u, {d}>)")
            })
            .collect();
        (format!("AP_{vo}(y, {d})"), sum(branches))
    }

    /// Credential check against each member of `vo`, one definition per
    /// member so the decision tree stays linear.
    fn auth_defs(&self, vo: &str) -> Vec<(String, String)> {
        let d = args(&seq("dch", self.ads_of(vo).len()));
        let mut out = Vec::new();
        for &n in &self.cred_arities {
            let mut c = args(&seq("cred", n));
            if n > 0 {
                c.push_str(", ");
            }
            let members: Vec<&UserEntry> =
                self.users.iter().filter(|u| u.vo == vo && u.creds.len() == n).collect();
            for i in 1..=members.len() + 1 {
                let head = format!("Auth_{vo}_c{n}_{i}({c}u, {d})");
                let body = match members.get(i - 1) {
                    None => "u<null, null, denied>".to_string(),
                    Some(m) => {
                        let next = format!("Auth_{vo}_c{n}_{}<{c}u, {d}>", i + 1);
                        let mut acc =
                            format!("new ch1, ch2. u<ch1, ch2, ok>. UsrHdl_{vo}<ch1, ch2, {d}>");
                        for (j, cr) in m.creds.iter().enumerate().rev() {
                            acc = format!("if cred{} = {cr} then ({acc}) else {next}", j + 1);
                        }
                        acc
                    }
                };
                out.push((head, body));
            }
        }
        out
    }

    /// Status record; state updates only ever move forward.
    fn log_def(&self) -> (String, String) {
        let set = |v: &str| format!("Log<gw, gr, {v}, z>");
        let mut upd = set("st");
        for s in ["queued", "running", "finished"] {
            upd = format!("if st = {s} then {} else if v = {s} then {} else {upd}", set("st"), set("v"));
        }
        (
            "Log(gw, gr, st, z)".into(),
            format!(
                "gr(r). r<st, z>. Log<gw, gr, st, z> + gw(kd, v). if kd = result then Log<gw, gr, st, v> else {upd}"
            ),
        )
    }

    fn usrhdl_def(&self, vo: &str) -> (String, String) {
        let d = args(&seq("dch", self.ads_of(vo).len()));
        (
            format!("UsrHdl_{vo}(ch1, ch2, {d})"),
            format!(
                "ch1(). new a. ch1<a>. ch1(@X). new gw, gr, ce, t, e. ch1<gr>. (X<t, e> | Log<gw, gr, submitted, null> | e(r). gw<state, finished>. gw<result, r> | UPrx<ce, a, t, gw> | PrxHdl_{vo}<ce, {d}>)"
            ),
        )
    }

    fn prxhdl_def(&self, vo: &str) -> (String, String) {
        let ads = self.ads_of(vo);
        let n = ads.len();
        let d = args(&seq("dch", n));
        let branches = self
            .zetas
            .iter()
            .map(|&z| {
                let k = args(&seq("kind", z));
                let searches: Vec<String> = ads
                    .iter()
                    .enumerate()
                    .map(|(i, ad)| format!("Search_z{z}_{ad}<{k}, c, f, dch{}>", i + 1))
                    .collect();
                let choose: Vec<String> = (1..=n)
                    .map(|s| {
                        let es = seq("e", s);
                        let sends: Vec<String> =
                            es.iter().map(|e| format!("{e}<{k}, m, a, g>")).collect();
                        format!("b({}). ({})", args(&es), sends.join(" + "))
                    })
                    .collect();
                format!(
                    "ce({k}, m, a, g). (PrxHdl_{vo}<ce, {d}> | new c, b, f. ({} | Acc_n{n}_h0_m0<c, f, b> | {}))",
                    searches.join(" | "),
                    choose.join(" + ")
                )
            })
            .collect();
        (format!("PrxHdl_{vo}(ce, {d})"), sum(branches))
    }

    /// Collects one hit or miss per AD, then forwards the hits, or the
    /// misses when nothing matched.
    fn acc_defs(&self, n: usize) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for h in 0..=n {
            for m in 0..=n - h {
                let hs = seq("hit", h);
                let ms = seq("miss", m);
                let mut f = vec!["c".to_string(), "f".to_string(), "b".to_string()];
                f.extend(hs.iter().cloned());
                f.extend(ms.iter().cloned());
                let body = if h + m < n {
                    let mut hit = vec!["c".to_string(), "f".to_string(), "b".to_string()];
                    hit.extend(hs.iter().cloned());
                    hit.push("x".into());
                    hit.extend(ms.iter().cloned());
                    let mut miss = vec!["c".to_string(), "f".to_string(), "b".to_string()];
                    miss.extend(hs.iter().cloned());
                    miss.extend(ms.iter().cloned());
                    miss.push("x".into());
                    format!(
                        "c(x). Acc_n{n}_h{}_m{m}<{}> + f(x). Acc_n{n}_h{h}_m{}<{}>",
                        h + 1,
                        args(&hit),
                        m + 1,
                        args(&miss)
                    )
                } else if h > 0 {
                    format!("b<{}>", args(&hs))
                } else {
                    format!("b<{}>", args(&ms))
                };
                out.push((format!("Acc_n{n}_h{h}_m{m}({})", args(&f)), body));
            }
        }
        out
    }

    fn search_def(&self, z: usize, ad: &str) -> (String, String) {
        let have = multiset(self.cfg.resources_of(ad).into_iter().map(|(_, k)| k));
        let viable = |p: &[Id]| within(&multiset(p), &have);
        let body = kind_tree(z, &self.kinds, &mut Vec::new(), &viable, &|_| "c<d>".into(), "f<d>");
        (format!("Search_z{z}_{ad}({}, c, f, d)", args(&seq("kind", z))), body)
    }

    fn uprx_def(&self) -> (String, String) {
        let mut branches = Vec::new();
        for &z in &self.zetas {
            let k = args(&seq("kind", z));
            let cr = args(&seq("cr", z));
            branches.push(format!(
                "t({k}, @J, done). new m. (ce<{k}, m, p, g>. UPrx<ce, p, t, g> | m({cr}, o). g<state, running>. o<{{Launch_z{z}<{cr}, p, {{(z) J<z>}}, done>}}>)"
            ));
        }
        for &z in &self.zetas {
            let pairs: Vec<String> = (1..=z).map(|i| format!("kind{i}, cr{i}")).collect();
            let cr = args(&seq("cr", z));
            branches.push(format!("p({}, m, o). m<{cr}, o>. UPrx<ce, p, t, g>", args(&pairs)));
        }
        ("UPrx(ce, p, t, g)".into(), sum(branches))
    }

    fn launch_def(&self, z: usize) -> (String, String) {
        let crs = seq("cr", z);
        let mut parts: Vec<String> = crs.iter().map(|c| format!("{c}<p, {{(z) J<z>}}, f>")).collect();
        let mut collect = String::new();
        for i in 1..=z {
            collect.push_str(&format!("f(res{i}). "));
        }
        collect.push_str(&format!("done<res{z}>"));
        parts.push(collect);
        (
            format!("Launch_z{z}({}, p, @J, done)", args(&crs)),
            format!("new f. ({})", parts.join(" | ")),
        )
    }

    fn receptor_def(&self) -> (String, String) {
        let branches = self
            .zetas
            .iter()
            .map(|&z| {
                let k = args(&seq("kind", z));
                format!("d({k}, m, p, g). g<state, queued>. enq<{k}, m, p, g>. Receptor<enq, d>")
            })
            .collect();
        ("Receptor(enq, d)".into(), sum(branches))
    }

    fn nil_def(&self) -> (String, String) {
        let mut branches = vec!["b(n, c). n<>. Nil<ad, b, enq>".to_string()];
        for &z in &self.zetas {
            let k = args(&seq("kind", z));
            branches.push(format!(
                "enq({k}, m, p, g). new b2. (Cell_z{z}<b, {k}, m, p, g, b2> | Nil<ad, b2, enq>)"
            ));
        }
        ("Nil(ad, b, enq)".into(), sum(branches))
    }

    fn cell_def(&self, z: usize) -> (String, String) {
        let k = args(&seq("kind", z));
        (
            format!("Cell_z{z}(b, {k}, m, p, g, b2)"),
            format!("b(n, c). c<{k}, m, p, g, b2>"),
        )
    }

    fn assign_def(&self) -> (String, String) {
        let mut branches = Vec::new();
        for &z in &self.zetas {
            let k = args(&seq("kind", z));
            let cr = args(&seq("cr", z));
            let pairs: Vec<String> = (1..=z).map(|i| format!("kind{i}, cr{i}")).collect();
            branches.push(format!(
                "c({k}, m, p, g, b2). new o, ans1, ans2. (ch<{k}, ans1, ans2>. (ans1({cr}). p<{}, m, o>. Assign<b2, d, ch> + ans2(). d<{k}, m, p, g>. Assign<b2, d, ch>) | o(@X). X<>)",
                args(&pairs)
            ));
        }
        branches.push("n(). Assign<b, d, ch>".into());
        (
            "Assign(b, d, ch)".into(),
            format!("new n, c. b<n, c>. ({})", branches.join(" + ")),
        )
    }

    /// First-fit allocator over the AD's resources; `s_j` is `free` or
    /// `busy`, `x_j` the proxy channel, `w_j` the release signal.
    fn lrm_def(&self, ad: &str) -> (String, String) {
        let res: Vec<(Id, Id)> = self
            .cfg
            .resources_of(ad)
            .into_iter()
            .map(|(r, k)| (r.clone(), k.clone()))
            .collect();
        let n = res.len();
        let s = seq("s", n);
        let x = seq("x", n);
        let w = seq("w", n);
        let call = |state: &[String]| -> String {
            let mut a: Vec<String> = state.to_vec();
            a.extend(x.iter().cloned());
            a.extend(w.iter().cloned());
            a.push("ch".into());
            a.push("d".into());
            format!("LRM_{ad}<{}>", args(&a))
        };
        let mut branches = Vec::new();
        for j in 0..n {
            let mut st = s.clone();
            st[j] = "free".into();
            branches.push(format!("{}(). {}", w[j], call(&st)));
        }
        let have = multiset(res.iter().map(|(_, k)| k));
        let fail = format!("a2<>. {}", call(&s));
        for &z in &self.zetas {
            let viable = |p: &[Id]| within(&multiset(p), &have);
            let leaf = |need: &[Id]| -> String { self.alloc(&res, need, &mut Vec::new(), &s, &x, &call, &fail) };
            let tree = kind_tree(z, &self.kinds, &mut Vec::new(), &viable, &leaf, &fail);
            branches.push(format!("ch({}, a1, a2). {tree}", args(&seq("kind", z))));
        }
        let mut f = s.clone();
        f.extend(x.iter().cloned());
        f.extend(w.iter().cloned());
        f.push("ch".into());
        f.push("d".into());
        (format!("LRM_{ad}({})", args(&f)), sum(branches))
    }

    #[allow(clippy::too_many_arguments)]
    fn alloc(
        &self,
        res: &[(Id, Id)],
        need: &[Id],
        used: &mut Vec<usize>,
        s: &[String],
        x: &[String],
        call: &dyn Fn(&[String]) -> String,
        fail: &str,
    ) -> String {
        if used.len() == need.len() {
            let mut st = s.to_vec();
            for &j in used.iter() {
                st[j] = "busy".into();
            }
            let crs: Vec<String> = used.iter().map(|&j| x[j].clone()).collect();
            return format!("a1<{}>. {}", args(&crs), call(&st));
        }
        let kind = &need[used.len()];
        let cands: Vec<usize> = (0..res.len())
            .filter(|j| &res[*j].1 == kind && !used.contains(j))
            .collect();
        let mut acc = fail.to_string();
        for &j in cands.iter().rev() {
            used.push(j);
            let sub = self.alloc(res, need, used, s, x, call, fail);
            used.pop();
            acc = format!("if {} = free then ({sub}) else {acc}", s[j]);
        }
        acc
    }

    fn ad_def(&self, ad: &str) -> (String, String) {
        let res: Vec<&Id> = self.cfg.resources_of(ad).into_iter().map(|(r, _)| r).collect();
        let mut private = vec!["b".to_string(), "enq".into(), "ch".into()];
        let mut lrm: Vec<String> = res.iter().map(|_| "free".to_string()).collect();
        let mut parts = vec![
            "Receptor<enq, d>".to_string(),
            format!("Nil<{ad}, b, enq>"),
            "Assign<b, d, ch>".into(),
        ];
        for r in &res {
            private.extend([format!("x_{r}"), format!("q_{r}"), format!("rr_{r}"), format!("w_{r}")]);
            parts.push(format!("RPrx<{r}, x_{r}, q_{r}, rr_{r}, w_{r}>"));
            parts.push(format!("Resource<rr_{r}, q_{r}>"));
        }
        lrm.extend(res.iter().map(|r| format!("x_{r}")));
        lrm.extend(res.iter().map(|r| format!("w_{r}")));
        lrm.push("ch".into());
        lrm.push("d".into());
        parts.insert(3, format!("LRM_{ad}<{}>", args(&lrm)));
        (
            format!("AD_{ad}(d)"),
            format!("new {}. ({})", args(&private), parts.join(" | ")),
        )
    }

    fn main(&self) -> String {
        let mut parts = Vec::new();
        for u in &self.users {
            let task = self.cfg.task_def_of(&u.id).expect("task resolved");
            let mut a: Vec<String> = u.creds.clone();
            a.push(format!("{{(t, e) {}}}", encode_task(task)));
            a.push(format!("y_{}", u.node));
            a.push(format!("{{(z) delivered<{}, z>}}", u.id));
            parts.push(format!("User_c{}<{}>", u.creds.len(), args(&a)));
        }
        let mut inner = Vec::new();
        for (n, vo) in &self.nodes {
            let ds: Vec<String> = self.ads_of(vo).iter().map(|d| format!("d_{d}")).collect();
            inner.push(format!("AP_{vo}<y_{n}, {}>", args(&ds)));
        }
        for d in &self.cfg.ads {
            inner.push(format!("AD_{d}<d_{d}>"));
        }
        let ds: Vec<String> = self.cfg.ads.iter().map(|d| format!("d_{d}")).collect();
        parts.push(format!("new {}. ({})", args(&ds), inner.join("\n      | ")));
        let ys: Vec<String> = self.nodes.iter().map(|(n, _)| format!("y_{n}")).collect();
        format!("new {}. ({})", args(&ys), parts.join("\n  | "))
    }
}
