//! A tiny depth-first Prolog interpreter with cut and no tabling, used as a
//! reference. It shares only the parser with the engine under test.

use std::collections::HashMap;
use std::rc::Rc;

use optab::terms::{parse_program, parse_query, SymbolTable, Term};

#[derive(Clone, Debug, PartialEq)]
pub enum T {
    V(usize),
    A(String),
    I(i64),
    S(String, Vec<T>),
}

struct Clause {
    head: T,
    body: Vec<T>,
    nvars: usize,
}

enum Flow {
    More,
    Cut(u64),
    Stop,
}

enum Goals {
    Nil,
    Cons(T, u64, Rc<Goals>),
}

#[derive(Debug, PartialEq)]
pub enum RefError {
    Arith,
    Unknown(String),
    Budget,
}

pub struct Interp {
    db: HashMap<(String, usize), Vec<Rc<Clause>>>,
    bind: Vec<Option<T>>,
    trail: Vec<usize>,
    frames: u64,
    steps: u64,
    budget: u64,
}

fn convert(t: &Term, syms: &SymbolTable, base: usize) -> T {
    match t {
        Term::Var(v) => T::V(base + *v as usize),
        Term::Atom(s) => T::A(syms.name(*s).to_string()),
        Term::Int(i) => T::I(*i),
        Term::Compound(f, a) => T::S(syms.name(*f).to_string(), a.iter().map(|x| convert(x, syms, base)).collect()),
    }
}

fn key(t: &T) -> Option<(String, usize)> {
    match t {
        T::A(n) => Some((n.clone(), 0)),
        T::S(n, a) => Some((n.clone(), a.len())),
        _ => None,
    }
}

fn offset(t: &T, base: usize) -> T {
    match t {
        T::V(v) => T::V(v + base),
        T::S(f, a) => T::S(f.clone(), a.iter().map(|x| offset(x, base)).collect()),
        other => other.clone(),
    }
}

impl Interp {
    /// Table directives are ignored: every predicate runs by plain SLD.
    pub fn new(program: &str) -> Interp {
        let p = parse_program(program).expect("reference program parses");
        let mut db: HashMap<(String, usize), Vec<Rc<Clause>>> = HashMap::new();
        for pred in p.predicates() {
            for c in &pred.clauses {
                let head = convert(&c.head, &p.symbols, 0);
                let body = c.body.iter().map(|g| convert(g, &p.symbols, 0)).collect();
                db.entry(key(&head).unwrap()).or_default().push(Rc::new(Clause { head, body, nvars: c.nvars as usize }));
            }
        }
        Interp { db, bind: Vec::new(), trail: Vec::new(), frames: 0, steps: 0, budget: 50_000_000 }
    }

    fn walk(&self, t: &T) -> T {
        let mut t = t.clone();
        while let T::V(v) = t {
            match &self.bind[v] {
                Some(b) => t = b.clone(),
                None => return T::V(v),
            }
        }
        t
    }

    fn resolve(&self, t: &T) -> T {
        match self.walk(t) {
            T::S(f, a) => T::S(f, a.iter().map(|x| self.resolve(x)).collect()),
            other => other,
        }
    }

    fn set(&mut self, v: usize, t: T) {
        self.bind[v] = Some(t);
        self.trail.push(v);
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.bind[v] = None;
        }
    }

    fn unify(&mut self, a: &T, b: &T) -> bool {
        match (self.walk(a), self.walk(b)) {
            (T::V(x), T::V(y)) if x == y => true,
            (T::V(x), t) | (t, T::V(x)) => {
                self.set(x, t);
                true
            }
            (T::A(x), T::A(y)) => x == y,
            (T::I(x), T::I(y)) => x == y,
            (T::S(f, xs), T::S(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(&ys).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    fn eval(&self, t: &T) -> Result<i64, RefError> {
        match self.walk(t) {
            T::I(i) => Ok(i),
            T::S(f, a) if a.len() == 1 => {
                let x = self.eval(&a[0])?;
                match f.as_str() {
                    "-" => Ok(-x),
                    "+" => Ok(x),
                    "abs" => Ok(x.abs()),
                    _ => Err(RefError::Arith),
                }
            }
            T::S(f, a) if a.len() == 2 => {
                let (x, y) = (self.eval(&a[0])?, self.eval(&a[1])?);
                match f.as_str() {
                    "+" => Ok(x + y),
                    "-" => Ok(x - y),
                    "*" => Ok(x * y),
                    "//" if y != 0 => Ok(x / y),
                    "mod" if y != 0 => Ok(x.rem_euclid(y)),
                    "min" => Ok(x.min(y)),
                    "max" => Ok(x.max(y)),
                    _ => Err(RefError::Arith),
                }
            }
            _ => Err(RefError::Arith),
        }
    }

    /// Some(result) when `g` is a builtin.
    fn builtin(&mut self, g: &T) -> Option<Result<bool, RefError>> {
        let (name, args) = match g {
            T::A(n) if n == "true" => return Some(Ok(true)),
            T::A(n) if n == "fail" => return Some(Ok(false)),
            T::S(n, a) if a.len() == 2 => (n.as_str(), a),
            _ => return None,
        };
        let cmp = |s: &Self, f: fn(i64, i64) -> bool| -> Result<bool, RefError> {
            Ok(f(s.eval(&args[0])?, s.eval(&args[1])?))
        };
        Some(match name {
            "=" => Ok(self.unify(&args[0], &args[1])),
            "\\=" => {
                let m = self.trail.len();
                let ok = self.unify(&args[0], &args[1]);
                self.undo(m);
                Ok(!ok)
            }
            "is" => self.eval(&args[1]).map(|v| self.unify(&args[0], &T::I(v))),
            "<" => cmp(self, |x, y| x < y),
            ">" => cmp(self, |x, y| x > y),
            "=<" => cmp(self, |x, y| x <= y),
            ">=" => cmp(self, |x, y| x >= y),
            "=:=" => cmp(self, |x, y| x == y),
            "=\\=" => cmp(self, |x, y| x != y),
            _ => return None,
        })
    }

    fn solve(&mut self, goals: &Rc<Goals>, out: &mut dyn FnMut(&Self) -> bool) -> Result<Flow, RefError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(RefError::Budget);
        }
        let Goals::Cons(g, cutb, rest) = &**goals else {
            return Ok(if out(self) { Flow::More } else { Flow::Stop });
        };
        let g = self.walk(g);
        if g == T::A("!".into()) {
            return Ok(match self.solve(rest, out)? {
                Flow::Stop => Flow::Stop,
                Flow::Cut(b) if b < *cutb => Flow::Cut(b),
                _ => Flow::Cut(*cutb),
            });
        }
        let mark = self.trail.len();
        if let Some(r) = self.builtin(&g) {
            let flow = if r? { self.solve(rest, out)? } else { Flow::More };
            self.undo(mark);
            return Ok(flow);
        }
        let k = key(&g).ok_or(RefError::Unknown("unbound call".into()))?;
        let Some(clauses) = self.db.get(&k).cloned() else {
            // Unknown predicates fail, as in the engine.
            return Ok(Flow::More);
        };
        self.frames += 1;
        let me = self.frames;
        for c in clauses {
            let base = self.bind.len();
            self.bind.resize(base + c.nvars, None);
            let head = offset(&c.head, base);
            if self.unify(&head, &g) {
                let mut next = rest.clone();
                for b in c.body.iter().rev() {
                    next = Rc::new(Goals::Cons(offset(b, base), me, next));
                }
                let flow = self.solve(&next, out)?;
                self.undo(mark);
                match flow {
                    Flow::More => {}
                    Flow::Cut(b) if b == me => return Ok(Flow::More),
                    other => return Ok(other),
                }
            } else {
                self.undo(mark);
            }
        }
        Ok(Flow::More)
    }

    /// All solutions of `query` in SLD order, formatted as the engine does.
    pub fn run(&mut self, query: &str) -> Result<Vec<String>, RefError> {
        let mut syms = SymbolTable::new();
        let q = parse_query(&mut syms, query).expect("query parses");
        let named: Vec<(usize, String)> = q.named_vars().into_iter().map(|(i, n)| (i as usize, n.to_string())).collect();
        let names: Vec<String> = named.iter().map(|(_, n)| n.clone()).collect();
        self.bind = vec![None; q.var_names.len()];
        self.trail.clear();
        let mut goals = Rc::new(Goals::Nil);
        for g in q.goals.iter().rev() {
            goals = Rc::new(Goals::Cons(convert(g, &syms, 0), 0, goals));
        }
        let mut sols = Vec::new();
        self.solve(&goals, &mut |s: &Self| {
            sols.push(format_answer(&names, &named.iter().map(|(v, _)| s.resolve(&T::V(*v))).collect::<Vec<_>>()));
            true
        })?;
        Ok(sols)
    }
}

fn plain_atom(n: &str) -> bool {
    n == "[]"
        || n.chars().next().is_some_and(|c| c.is_ascii_lowercase()) && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn show(t: &T, out: &mut String) {
    match t {
        T::V(v) => out.push_str(&format!("_V{v}")),
        T::A(n) if plain_atom(n) => out.push_str(n),
        T::A(n) => out.push_str(&format!("'{}'", n.replace('\\', "\\\\").replace('\'', "\\'"))),
        T::I(i) => out.push_str(&i.to_string()),
        T::S(f, a) => {
            show(&T::A(f.clone()), out);
            out.push('(');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                show(x, out);
            }
            out.push(')');
        }
    }
}

pub fn format_answer(names: &[String], vals: &[T]) -> String {
    if names.is_empty() {
        return "true".into();
    }
    names
        .iter()
        .zip(vals)
        .map(|(n, v)| {
            let mut s = format!("{n}=");
            show(v, &mut s);
            s
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Runs the reference on a thread with a large stack; its recursion depth
/// grows with the length of a derivation.
pub fn reference(program: &str, query: &str) -> Result<Vec<String>, RefError> {
    let (p, q) = (program.to_string(), query.to_string());
    std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(move || Interp::new(&p).run(&q))
        .unwrap()
        .join()
        .unwrap()
}
