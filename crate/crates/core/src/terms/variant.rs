use super::{Cell, Store, Sym, Term, TermError};

/// One symbol of a flattened term. Variables are numbered by first occurrence.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Token {
    Atom(Sym),
    Int(i64),
    Var(u32),
    Functor(Sym, u32),
}

/// Flattened goal, functor first, identical for goals equal up to renaming.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VariantKey(pub Vec<Token>);

impl Store {
    /// Appends the preorder tokens of the term at `a` to `out`. `vars` maps
    /// variable numbers to heap addresses and grows as new ones are met.
    pub fn encode(&self, a: usize, out: &mut Vec<Token>, vars: &mut Vec<usize>) {
        let a = self.deref(a);
        match self.cell(a) {
            Cell::Ref(_) => {
                let n = match vars.iter().position(|&v| v == a) {
                    Some(n) => n,
                    None => {
                        vars.push(a);
                        vars.len() - 1
                    }
                };
                out.push(Token::Var(n as u32));
            }
            Cell::Atom(s) => out.push(Token::Atom(s)),
            Cell::Int(i) => out.push(Token::Int(i)),
            Cell::Str(p) => {
                let Cell::Fun(f, n) = self.cell(p) else { unreachable!() };
                out.push(Token::Functor(f, n));
                for i in 1..=n as usize {
                    self.encode(p + i, out, vars);
                }
            }
            Cell::Fun(..) => unreachable!(),
        }
    }

    /// Canonical key of a callable goal together with the addresses of its
    /// distinct variables in numbering order.
    pub fn canonical_variant(&self, goal: usize) -> Result<(VariantKey, Vec<usize>), TermError> {
        let (f, n, p) = self.callable(goal)?;
        let mut out = Vec::with_capacity(1 + 2 * n as usize);
        out.push(Token::Functor(f, n));
        let mut vars = Vec::new();
        for i in 1..=n as usize {
            self.encode(p + i, &mut out, &mut vars);
        }
        Ok((VariantKey(out), vars))
    }

    /// Builds the terms spelled by `tokens` on the heap and returns one
    /// address per term. Token variables become fresh heap variables.
    pub fn decode(&mut self, tokens: &[Token], count: usize) -> Vec<usize> {
        let mut fresh: Vec<usize> = Vec::new();
        let mut pos = 0;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let c = self.decode_one(tokens, &mut pos, &mut fresh);
            out.push(match c {
                Cell::Ref(a) => a,
                c => self.push(c),
            });
        }
        out
    }

    fn decode_one(&mut self, tokens: &[Token], pos: &mut usize, fresh: &mut Vec<usize>) -> Cell {
        let t = tokens[*pos];
        *pos += 1;
        match t {
            Token::Atom(s) => Cell::Atom(s),
            Token::Int(i) => Cell::Int(i),
            Token::Var(n) => {
                let n = n as usize;
                if n == fresh.len() {
                    fresh.push(self.new_var());
                }
                Cell::Ref(fresh[n])
            }
            Token::Functor(f, n) => {
                let p = self.push(Cell::Fun(f, n));
                for _ in 0..n {
                    self.push(Cell::Int(0));
                }
                for i in 1..=n as usize {
                    let c = self.decode_one(tokens, pos, fresh);
                    self.heap_set(p + i, c);
                }
                Cell::Str(p)
            }
        }
    }
}

/// Rebuilds `count` clause-level terms from tokens.
pub fn decode_terms(tokens: &[Token], count: usize) -> Vec<Term> {
    fn one(tokens: &[Token], pos: &mut usize) -> Term {
        let t = tokens[*pos];
        *pos += 1;
        match t {
            Token::Atom(s) => Term::Atom(s),
            Token::Int(i) => Term::Int(i),
            Token::Var(n) => Term::Var(n),
            Token::Functor(f, n) => Term::Compound(f, (0..n).map(|_| one(tokens, pos)).collect()),
        }
    }
    let mut pos = 0;
    (0..count).map(|_| one(tokens, &mut pos)).collect()
}
