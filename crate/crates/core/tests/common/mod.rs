#![allow(dead_code)]

pub mod cut_corpus;
pub mod prolog;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use optab::bench::RunSpec;
use optab::engine::{EngineConfig, RunResult, Scheduling};
use optab::terms::Token;

pub fn spec(program: &str, query: &str, sched: Scheduling) -> RunSpec {
    RunSpec::parse(program, query, EngineConfig { scheduling: sched, ..EngineConfig::default() }).expect("parses")
}

/// Sorted answers of a run; `workers == 0` is the sequential engine.
pub fn answers(s: &RunSpec, workers: usize) -> Vec<String> {
    s.run(workers).expect("run succeeds").sorted_answers()
}

// Graphs

pub fn random_digraph(rng: &mut StdRng, max_nodes: usize) -> (usize, Vec<(usize, usize)>) {
    let n = rng.gen_range(1..=max_nodes);
    let p = rng.gen_range(0.02..0.15);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    (n, edges)
}

/// Pairs (x, y) with y reachable from x by one or more edges.
pub fn reachable_pairs(n: usize, edges: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    let mut out = BTreeSet::new();
    for s in 0..n {
        let mut seen = vec![false; n];
        let mut q: VecDeque<usize> = adj[s].iter().copied().collect();
        while let Some(v) = q.pop_front() {
            if !std::mem::replace(&mut seen[v], true) {
                out.insert((s, v));
                q.extend(adj[v].iter().copied());
            }
        }
    }
    out
}

pub fn left_tc_program(edges: &[(usize, usize)]) -> String {
    let mut p = String::from(":- table path/2.\npath(X,Y) :- path(X,Z), e(Z,Y).\npath(X,Y) :- e(X,Y).\n");
    for (a, b) in edges {
        writeln!(p, "e(n{a},n{b}).").unwrap();
    }
    p
}

// Random Datalog

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Arg {
    Var(u8),
    Const(i64),
}

#[derive(Clone, Debug)]
pub struct Atom {
    pub pred: String,
    pub args: [Arg; 2],
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Atom>,
}

#[derive(Clone, Debug)]
pub struct Datalog {
    pub edb: HashMap<String, HashSet<(i64, i64)>>,
    pub idb: Vec<String>,
    pub rules: Vec<Rule>,
    pub query: Atom,
}

const VARS: [&str; 4] = ["A", "B", "C", "D"];

fn show_arg(a: &Arg) -> String {
    match a {
        Arg::Var(v) => VARS[*v as usize].to_string(),
        Arg::Const(c) => c.to_string(),
    }
}

fn show_atom(a: &Atom) -> String {
    format!("{}({},{})", a.pred, show_arg(&a.args[0]), show_arg(&a.args[1]))
}

impl Datalog {
    pub fn random(rng: &mut StdRng) -> Datalog {
        let consts = rng.gen_range(3..9i64);
        let mut edb = HashMap::new();
        for name in ["e", "f"] {
            let k = rng.gen_range(consts as usize..(consts * consts / 2 + consts).min(25) as usize + 1);
            let facts = (0..k).map(|_| (rng.gen_range(0..consts), rng.gen_range(0..consts))).collect();
            edb.insert(name.to_string(), facts);
        }
        let nidb = rng.gen_range(1..4);
        let idb: Vec<String> = (0..nidb).map(|i| format!("p{i}")).collect();
        let preds: Vec<String> = idb.iter().cloned().chain(["e".into(), "f".into()]).collect();
        let mut rules = Vec::new();
        for (hi, h) in idb.iter().enumerate() {
            // p0 always gets a recursive second rule.
            let nrules = if hi == 0 { rng.gen_range(2..4) } else { rng.gen_range(1..4) };
            for k in 0..nrules {
                let blen = rng.gen_range(1..4);
                let mut body = Vec::new();
                for _ in 0..blen {
                    // The first rule of each predicate is a base case over EDB only.
                    let choices = if k == 0 { &preds[nidb..] } else { &preds[..] };
                    let pred = choices[rng.gen_range(0..choices.len())].clone();
                    let mut arg = || {
                        if rng.gen_bool(0.85) {
                            Arg::Var(rng.gen_range(0..VARS.len() as u8))
                        } else {
                            Arg::Const(rng.gen_range(0..consts))
                        }
                    };
                    body.push(Atom { pred, args: [arg(), arg()] });
                }
                if hi == 0 && k == 1 {
                    let at = rng.gen_range(0..body.len());
                    body[at].pred = "p0".into();
                }
                let bound: Vec<Arg> =
                    body.iter().flat_map(|a| a.args.iter()).filter(|a| matches!(a, Arg::Var(_))).cloned().collect();
                let mut pick = || {
                    if bound.is_empty() || rng.gen_bool(0.1) {
                        Arg::Const(rng.gen_range(0..consts))
                    } else {
                        bound[rng.gen_range(0..bound.len())].clone()
                    }
                };
                rules.push(Rule { head: Atom { pred: h.clone(), args: [pick(), pick()] }, body });
            }
        }
        let qarg0 = if rng.gen_bool(0.5) { Arg::Var(0) } else { Arg::Const(rng.gen_range(0..consts)) };
        let query = Atom { pred: "p0".into(), args: [qarg0, Arg::Var(1)] };
        Datalog { edb, idb, rules, query }
    }

    pub fn program(&self) -> String {
        let mut p = String::new();
        for i in &self.idb {
            writeln!(p, ":- table {i}/2.").unwrap();
        }
        for r in &self.rules {
            let body: Vec<String> = r.body.iter().map(show_atom).collect();
            writeln!(p, "{} :- {}.", show_atom(&r.head), body.join(", ")).unwrap();
        }
        let mut names: Vec<&String> = self.edb.keys().collect();
        names.sort();
        for n in names {
            let mut facts: Vec<_> = self.edb[n].iter().collect();
            facts.sort();
            for (a, b) in facts {
                writeln!(p, "{n}({a},{b}).").unwrap();
            }
        }
        p
    }

    pub fn query_text(&self) -> String {
        show_atom(&self.query)
    }

    /// Least model of the IDB predicates by semi-naive iteration.
    pub fn semi_naive(&self) -> HashMap<String, HashSet<(i64, i64)>> {
        let mut full: HashMap<String, HashSet<(i64, i64)>> = self.edb.clone();
        for i in &self.idb {
            full.insert(i.clone(), HashSet::new());
        }
        let is_idb = |p: &str| self.idb.iter().any(|i| i == p);
        // Round 0 uses the full (empty) IDB relations everywhere.
        let mut delta: HashMap<String, HashSet<(i64, i64)>> = HashMap::new();
        for r in &self.rules {
            for t in eval_rule(r, &full, &full, None) {
                delta.entry(r.head.pred.clone()).or_default().insert(t);
            }
        }
        loop {
            let mut fresh: HashMap<String, HashSet<(i64, i64)>> = HashMap::new();
            for (p, ts) in &delta {
                for t in ts {
                    if full.get_mut(p).unwrap().insert(*t) {
                        fresh.entry(p.clone()).or_default().insert(*t);
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            let mut next: HashMap<String, HashSet<(i64, i64)>> = HashMap::new();
            for r in &self.rules {
                for (i, a) in r.body.iter().enumerate() {
                    if !is_idb(&a.pred) || !fresh.contains_key(&a.pred) {
                        continue;
                    }
                    for t in eval_rule(r, &full, &fresh, Some(i)) {
                        if !full[&r.head.pred].contains(&t) {
                            next.entry(r.head.pred.clone()).or_default().insert(t);
                        }
                    }
                }
            }
            delta = next;
        }
        full.retain(|k, _| is_idb(k));
        full
    }

    /// Expected answer lines for the query, sorted.
    pub fn expected(&self) -> Vec<String> {
        let model = self.semi_naive();
        let mut out: Vec<String> = model[&self.query.pred]
            .iter()
            .filter(|(a, _)| match self.query.args[0] {
                Arg::Const(c) => *a == c,
                Arg::Var(_) => true,
            })
            .map(|(a, b)| match self.query.args[0] {
                Arg::Const(_) => format!("B={b}"),
                Arg::Var(_) => format!("A={a}, B={b}"),
            })
            .collect();
        out.sort();
        out
    }
}

/// Checks every table of a finished run against the model: each subgoal
/// holds exactly the model tuples matching its call pattern. Returns the
/// number of subgoals checked.
pub fn check_tables(model: &HashMap<String, HashSet<(i64, i64)>>, r: &RunResult) -> Result<usize, String> {
    let syms = &r.shared.program.symbols;
    let mut checked = 0;
    for f in r.shared.tables.frames() {
        let name = syms.name(f.pred.0);
        if !f.is_complete() {
            return Err(format!("{name} subgoal {} incomplete", f.id));
        }
        let mut want = BTreeSet::new();
        for &(a, b) in &model[name] {
            let mut vals = vec![None; f.nvars as usize];
            let mut ok = true;
            for (v, t) in [a, b].iter().zip(&f.key) {
                ok &= match *t {
                    Token::Int(c) => c == *v,
                    Token::Var(i) => *vals[i as usize].get_or_insert(*v) == *v,
                    _ => false,
                };
            }
            if ok {
                want.insert(vals.into_iter().map(Option::unwrap).collect::<Vec<i64>>());
            }
        }
        let list = f.answer_list();
        let got: BTreeSet<Vec<i64>> = list
            .iter()
            .map(|ts| ts.iter().map(|t| if let Token::Int(i) = t { *i } else { i64::MIN }).collect())
            .collect();
        if got.len() != list.len() {
            return Err(format!("{name} subgoal {} stores a duplicate answer", f.id));
        }
        if got != want {
            return Err(format!("{name}{:?}: got {got:?}, want {want:?}", f.key));
        }
        checked += 1;
    }
    Ok(checked)
}

/// Tuples derived by `r`, reading body atom `delta_at` from `delta` and the
/// rest from `full`.
fn eval_rule(
    r: &Rule,
    full: &HashMap<String, HashSet<(i64, i64)>>,
    delta: &HashMap<String, HashSet<(i64, i64)>>,
    delta_at: Option<usize>,
) -> Vec<(i64, i64)> {
    let mut envs: Vec<[Option<i64>; 4]> = vec![[None; 4]];
    for (i, a) in r.body.iter().enumerate() {
        let rel = if delta_at == Some(i) { delta.get(&a.pred) } else { full.get(&a.pred) };
        let Some(rel) = rel else { return Vec::new() };
        let mut next = Vec::new();
        for env in &envs {
            for &(x, y) in rel {
                let mut e = *env;
                if bind(&mut e, &a.args[0], x) && bind(&mut e, &a.args[1], y) {
                    next.push(e);
                }
            }
        }
        envs = next;
    }
    let val = |e: &[Option<i64>; 4], a: &Arg| match a {
        Arg::Const(c) => *c,
        Arg::Var(v) => e[*v as usize].expect("head variables occur in the body"),
    };
    envs.iter().map(|e| (val(e, &r.head.args[0]), val(e, &r.head.args[1]))).collect()
}

fn bind(e: &mut [Option<i64>; 4], a: &Arg, v: i64) -> bool {
    match a {
        Arg::Const(c) => *c == v,
        Arg::Var(i) => match e[*i as usize] {
            Some(x) => x == v,
            None => {
                e[*i as usize] = Some(v);
                true
            }
        },
    }
}

// Queens

/// All placements by brute force over permutations, one row per column.
pub fn queens_brute(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            let ok = (0..n).all(|i| (i + 1..n).all(|j| cur[i].abs_diff(cur[j]) != j - i));
            if ok {
                out.push(cur.clone());
            }
            return;
        }
        for r in 1..=n {
            if !used[r] {
                used[r] = true;
                cur.push(r);
                rec(n, cur, used, out);
                cur.pop();
                used[r] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut vec![false; n + 1], &mut out);
    out
}

pub fn list_text(xs: &[usize]) -> String {
    xs.iter().rev().fold("[]".to_string(), |acc, x| format!("'.'({x},{acc})"))
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
