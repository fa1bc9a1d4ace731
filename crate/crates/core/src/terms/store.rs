use std::collections::HashMap;

use thiserror::Error;

use super::{Sym, Term};

/// One heap word. An unbound variable is a `Ref` pointing at itself.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Cell {
    Ref(usize),
    Atom(Sym),
    Int(i64),
    /// Pointer to a `Fun` cell followed by the arguments.
    Str(usize),
    Fun(Sym, u32),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("trail mark {mark} is beyond the trail top {top}")]
    MarkBeyondTop { mark: usize, top: usize },
    #[error("call to an unbound variable")]
    UnboundCall,
    #[error("goal is not callable")]
    NotCallable,
}

/// Position in the trail, as returned by [`Store::mark`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct TrailMark(pub usize);

/// Heap plus trail for one worker. Every binding is trailed.
#[derive(Clone, Debug, Default)]
pub struct Store {
    heap: Vec<Cell>,
    trail: Vec<usize>,
    pub occurs_check: bool,
    pdl: Vec<(usize, usize)>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn heap(&self) -> &[Cell] {
        &self.heap
    }

    pub fn trail(&self) -> &[usize] {
        &self.trail
    }

    pub fn new_var(&mut self) -> usize {
        let a = self.heap.len();
        self.heap.push(Cell::Ref(a));
        a
    }

    pub fn push(&mut self, c: Cell) -> usize {
        self.heap.push(c);
        self.heap.len() - 1
    }

    /// Cuts the heap back to `len` cells. Callers must undo trail entries
    /// above the matching mark first.
    pub fn truncate(&mut self, len: usize) {
        self.heap.truncate(len);
    }

    pub fn cell(&self, a: usize) -> Cell {
        self.heap[a]
    }

    pub fn deref(&self, mut a: usize) -> usize {
        loop {
            match self.heap[a] {
                Cell::Ref(r) if r != a => a = r,
                _ => return a,
            }
        }
    }

    pub fn is_unbound(&self, a: usize) -> bool {
        let a = self.deref(a);
        self.heap[a] == Cell::Ref(a)
    }

    pub fn mark(&self) -> TrailMark {
        TrailMark(self.trail.len())
    }

    pub fn undo_to(&mut self, mark: TrailMark) -> Result<(), TermError> {
        if mark.0 > self.trail.len() {
            return Err(TermError::MarkBeyondTop { mark: mark.0, top: self.trail.len() });
        }
        self.undo_unchecked(mark.0);
        Ok(())
    }

    pub(crate) fn undo_unchecked(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let a = self.trail.pop().unwrap();
            if a < self.heap.len() {
                self.heap[a] = Cell::Ref(a);
            }
        }
    }

    /// Trail entries from `from` upwards, paired with the value each variable
    /// currently holds.
    pub fn trail_snapshot(&self, from: usize) -> Vec<(usize, Cell)> {
        self.trail[from..].iter().map(|&a| (a, self.heap[a])).collect()
    }

    /// Re-applies bindings captured by [`Store::trail_snapshot`].
    pub(crate) fn replay(&mut self, entries: &[(usize, Cell)]) {
        for &(a, c) in entries {
            self.heap[a] = c;
            self.trail.push(a);
        }
    }

    pub(crate) fn heap_set(&mut self, a: usize, c: Cell) {
        self.heap[a] = c;
    }

    /// Unifies the term at `a` with an atomic cell.
    pub(crate) fn unify_const(&mut self, a: usize, c: Cell) -> bool {
        let a = self.deref(a);
        match self.heap[a] {
            Cell::Ref(_) => {
                self.bind(a, c);
                true
            }
            v => v == c,
        }
    }

    fn bind(&mut self, var: usize, value: Cell) {
        self.heap[var] = value;
        self.trail.push(var);
    }

    /// Unifies the terms at `a` and `b`. On failure every binding made by the
    /// call is undone.
    pub fn unify(&mut self, a: usize, b: usize) -> bool {
        let mark = self.trail.len();
        self.pdl.clear();
        self.pdl.push((a, b));
        while let Some((a, b)) = self.pdl.pop() {
            let a = self.deref(a);
            let b = self.deref(b);
            if a == b {
                continue;
            }
            let ok = match (self.heap[a], self.heap[b]) {
                (Cell::Ref(_), Cell::Ref(_)) => {
                    if a < b {
                        self.bind(b, Cell::Ref(a));
                    } else {
                        self.bind(a, Cell::Ref(b));
                    }
                    true
                }
                (Cell::Ref(_), v) => self.bind_checked(a, b, v),
                (v, Cell::Ref(_)) => self.bind_checked(b, a, v),
                (Cell::Atom(x), Cell::Atom(y)) => x == y,
                (Cell::Int(x), Cell::Int(y)) => x == y,
                (Cell::Str(p), Cell::Str(q)) => {
                    if p == q {
                        true
                    } else if self.heap[p] != self.heap[q] {
                        false
                    } else {
                        let Cell::Fun(_, n) = self.heap[p] else { unreachable!("Str must point at Fun") };
                        for i in (1..=n as usize).rev() {
                            self.pdl.push((p + i, q + i));
                        }
                        true
                    }
                }
                _ => false,
            };
            if !ok {
                self.pdl.clear();
                self.undo_unchecked(mark);
                return false;
            }
        }
        true
    }

    fn bind_checked(&mut self, var: usize, value_addr: usize, value: Cell) -> bool {
        if self.occurs_check && matches!(value, Cell::Str(_)) && self.occurs(var, value_addr) {
            return false;
        }
        self.bind(var, value);
        true
    }

    fn occurs(&self, var: usize, addr: usize) -> bool {
        let mut stack = vec![addr];
        while let Some(a) = stack.pop() {
            let a = self.deref(a);
            match self.heap[a] {
                Cell::Ref(_) if a == var => return true,
                Cell::Str(p) => {
                    let Cell::Fun(_, n) = self.heap[p] else { unreachable!() };
                    stack.extend((1..=n as usize).map(|i| p + i));
                }
                _ => {}
            }
        }
        false
    }

    /// Builds a cell for a clause term. `vars[i]` holds the heap address of
    /// clause variable `i` once it has been allocated.
    pub fn put_term(&mut self, t: &Term, vars: &mut [Option<usize>]) -> Cell {
        match t {
            Term::Var(v) => {
                let slot = &mut vars[*v as usize];
                match *slot {
                    Some(a) => Cell::Ref(a),
                    None => {
                        let a = self.heap.len();
                        self.heap.push(Cell::Ref(a));
                        *slot = Some(a);
                        Cell::Ref(a)
                    }
                }
            }
            Term::Atom(s) => Cell::Atom(*s),
            Term::Int(i) => Cell::Int(*i),
            Term::Compound(f, args) => {
                let p = self.heap.len();
                self.heap.push(Cell::Fun(*f, args.len() as u32));
                self.heap.resize(p + 1 + args.len(), Cell::Int(0));
                for (i, a) in args.iter().enumerate() {
                    let c = self.put_term(a, vars);
                    self.heap[p + 1 + i] = c;
                }
                Cell::Str(p)
            }
        }
    }

    /// Like [`Store::put_term`] but returns an address holding the term.
    pub fn put_term_addr(&mut self, t: &Term, vars: &mut [Option<usize>]) -> usize {
        match self.put_term(t, vars) {
            Cell::Ref(a) => a,
            c => self.push(c),
        }
    }

    /// Reads back the term at `a`. Unbound variables are numbered in
    /// first-occurrence order through `names`, which may be shared between
    /// calls to keep numbering consistent.
    pub fn to_term(&self, a: usize, names: &mut HashMap<usize, u32>) -> Term {
        let a = self.deref(a);
        match self.heap[a] {
            Cell::Ref(_) => {
                let n = names.len() as u32;
                Term::Var(*names.entry(a).or_insert(n))
            }
            Cell::Atom(s) => Term::Atom(s),
            Cell::Int(i) => Term::Int(i),
            Cell::Str(p) => {
                let Cell::Fun(f, n) = self.heap[p] else { unreachable!() };
                Term::Compound(f, (1..=n as usize).map(|i| self.to_term(p + i, names)).collect())
            }
            Cell::Fun(..) => unreachable!("Fun cells are only reached through Str"),
        }
    }

    /// Functor of the callable term at `a`, or why it is not callable.
    pub fn callable(&self, a: usize) -> Result<(Sym, u32, usize), TermError> {
        let a = self.deref(a);
        match self.heap[a] {
            Cell::Ref(_) => Err(TermError::UnboundCall),
            Cell::Atom(s) => Ok((s, 0, a)),
            Cell::Str(p) => match self.heap[p] {
                Cell::Fun(f, n) => Ok((f, n, p)),
                _ => unreachable!(),
            },
            _ => Err(TermError::NotCallable),
        }
    }
}
