//! Terms, clauses and programs, plus the heap store used at run time.

mod parser;
mod store;
mod symbols;
mod variant;

use std::collections::{HashMap, HashSet};
use std::fmt;

pub use parser::{parse_program, parse_query, ParseError};
pub use store::{Cell, Store, TermError, TrailMark};
pub use symbols::{wk, Sym, SymbolTable};
pub use variant::{decode_terms, Token, VariantKey};

/// A clause-local term. Variables are numbered from 0 within their clause.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(u32),
    Atom(Sym),
    Int(i64),
    Compound(Sym, Vec<Term>),
}

impl Term {
    pub fn functor(&self) -> Option<(Sym, u32)> {
        match self {
            Term::Atom(s) => Some((*s, 0)),
            Term::Compound(f, args) => Some((*f, args.len() as u32)),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn display<'a>(&'a self, syms: &'a SymbolTable) -> TermDisplay<'a> {
        TermDisplay { term: self, syms, names: None }
    }

    pub fn display_named<'a>(&'a self, syms: &'a SymbolTable, names: &'a [String]) -> TermDisplay<'a> {
        TermDisplay { term: self, syms, names: Some(names) }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    syms: &'a SymbolTable,
    names: Option<&'a [String]>,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self.term, self.syms, self.names, f)
    }
}

fn write_term(t: &Term, syms: &SymbolTable, names: Option<&[String]>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(v) => match names.and_then(|n| n.get(*v as usize)) {
            Some(n) => f.write_str(n),
            None => write!(f, "_G{v}"),
        },
        Term::Atom(s) => syms.write_atom(*s, f),
        Term::Int(i) => write!(f, "{i}"),
        Term::Compound(fun, args) => {
            syms.write_atom(*fun, f)?;
            f.write_str("(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write_term(a, syms, names, f)?;
            }
            f.write_str(")")
        }
    }
}

pub type PredKey = (Sym, u32);

#[derive(Clone, Debug)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Term>,
    pub nvars: u32,
}

impl Clause {
    pub fn has_cut(&self) -> bool {
        self.body.iter().any(|g| *g == Term::Atom(wk::CUT))
    }
}

/// Key used for first-argument clause selection.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ArgKey {
    Atom(Sym),
    Int(i64),
    Functor(Sym, u32),
}

impl ArgKey {
    pub fn of(t: &Term) -> Option<ArgKey> {
        match t {
            Term::Var(_) => None,
            Term::Atom(s) => Some(ArgKey::Atom(*s)),
            Term::Int(i) => Some(ArgKey::Int(*i)),
            Term::Compound(f, a) => Some(ArgKey::Functor(*f, a.len() as u32)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Predicate {
    pub key: PredKey,
    pub clauses: Vec<Clause>,
    pub has_cut: bool,
    all: std::sync::Arc<[u32]>,
    by_key: HashMap<ArgKey, std::sync::Arc<[u32]>>,
    unkeyed: std::sync::Arc<[u32]>,
}

impl Predicate {
    fn new(key: PredKey) -> Self {
        Predicate {
            key,
            clauses: Vec::new(),
            has_cut: false,
            all: Vec::new().into(),
            by_key: HashMap::new(),
            unkeyed: Vec::new().into(),
        }
    }

    fn build_index(&mut self) {
        self.has_cut = self.clauses.iter().any(Clause::has_cut);
        self.all = (0..self.clauses.len() as u32).collect::<Vec<_>>().into();
        if self.key.1 == 0 {
            return;
        }
        let keys: Vec<Option<ArgKey>> = self.clauses.iter().map(|c| ArgKey::of(&c.head.args()[0])).collect();
        let distinct: HashSet<ArgKey> = keys.iter().flatten().copied().collect();
        self.by_key = distinct
            .into_iter()
            .map(|k| {
                let list: Vec<u32> = (0..keys.len())
                    .filter(|&i| keys[i].is_none_or(|ck| ck == k))
                    .map(|i| i as u32)
                    .collect();
                (k, list.into())
            })
            .collect();
        self.unkeyed = (0..keys.len()).filter(|&i| keys[i].is_none()).map(|i| i as u32).collect::<Vec<_>>().into();
    }

    pub fn all_clauses(&self) -> &std::sync::Arc<[u32]> {
        &self.all
    }

    /// Clauses whose first head argument can match a call argument with key `k`.
    pub fn clauses_for(&self, k: Option<ArgKey>) -> &std::sync::Arc<[u32]> {
        match k {
            None => &self.all,
            Some(k) => self.by_key.get(&k).unwrap_or(&self.unkeyed),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub symbols: SymbolTable,
    preds: Vec<Predicate>,
    index: HashMap<PredKey, usize>,
    tabled: Vec<PredKey>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_clause(&mut self, c: Clause) {
        let key = c.head.functor().expect("clause head is callable");
        let i = match self.index.get(&key) {
            Some(&i) => i,
            None => {
                self.preds.push(Predicate::new(key));
                self.index.insert(key, self.preds.len() - 1);
                self.preds.len() - 1
            }
        };
        self.preds[i].clauses.push(c);
    }

    pub fn declare_tabled(&mut self, key: PredKey) {
        if !self.tabled.contains(&key) {
            self.tabled.push(key);
        }
    }

    pub(crate) fn finish(&mut self) {
        for p in &mut self.preds {
            p.build_index();
        }
    }

    pub fn predicate(&self, key: PredKey) -> Option<&Predicate> {
        self.index.get(&key).map(|&i| &self.preds[i])
    }

    pub fn pred_index(&self, key: PredKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.preds
    }

    pub fn clauses(&self, key: PredKey) -> &[Clause] {
        self.predicate(key).map(|p| p.clauses.as_slice()).unwrap_or(&[])
    }

    pub fn is_tabled(&self, key: PredKey) -> bool {
        self.tabled.contains(&key)
    }

    pub fn tabled(&self) -> &[PredKey] {
        &self.tabled
    }

    pub fn pred_name(&self, key: PredKey) -> String {
        format!("{}/{}", self.symbols.name(key.0), key.1)
    }
}

/// A parsed query: a conjunction plus the names of its variables.
#[derive(Clone, Debug)]
pub struct Query {
    pub goals: Vec<Term>,
    pub var_names: Vec<String>,
}

impl Query {
    /// Variables to report in answers; anonymous ones are skipped.
    pub fn named_vars(&self) -> Vec<(u32, &str)> {
        self.var_names
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.starts_with('_'))
            .map(|(i, n)| (i as u32, n.as_str()))
            .collect()
    }
}
