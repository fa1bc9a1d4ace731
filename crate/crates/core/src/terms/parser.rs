use std::collections::HashMap;

use thiserror::Error;

use super::symbols::is_symbol_char;
use super::{wk, Clause, PredKey, Program, Query, SymbolTable, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Atom(String),
    Var(String),
    Int(i64),
    Open,
    Close,
    Comma,
    Neck,
    End,
    Eof,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(s: &'a str) -> Self {
        Lexer { chars: s.chars().peekable(), line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn skip_layout(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '%' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Returns the next token with the position it started at.
    fn next(&mut self) -> Result<(Tok, usize, usize), ParseError> {
        self.skip_layout();
        let (line, col) = (self.line, self.col);
        let Some(&c) = self.chars.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::Open
            }
            ')' => {
                self.bump();
                Tok::Close
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '!' => {
                self.bump();
                Tok::Atom("!".into())
            }
            '.' => {
                self.bump();
                match self.chars.peek() {
                    None => Tok::End,
                    Some(&n) if n.is_whitespace() || n == '%' => Tok::End,
                    _ => return Err(ParseError { line, col, msg: "unexpected '.'".into() }),
                }
            }
            '[' => {
                self.bump();
                if self.chars.peek() == Some(&']') {
                    self.bump();
                    Tok::Atom("[]".into())
                } else {
                    return Err(ParseError { line, col, msg: "list syntax is not supported".into() });
                }
            }
            '\'' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.err("unterminated quoted atom")),
                        Some('\\') => match self.bump() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(e) => s.push(e),
                            None => return Err(self.err("unterminated quoted atom")),
                        },
                        Some('\'') => {
                            if self.chars.peek() == Some(&'\'') {
                                self.bump();
                                s.push('\'');
                            } else {
                                break;
                            }
                        }
                        Some(ch) => s.push(ch),
                    }
                }
                Tok::Atom(s)
            }
            c if c.is_ascii_digit() => Tok::Int(self.digits(line, col, false)?),
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&ch) = self.chars.peek() {
                    if ch.is_alphanumeric() || ch == '_' {
                        s.push(ch);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if c.is_uppercase() || c == '_' {
                    Tok::Var(s)
                } else {
                    Tok::Atom(s)
                }
            }
            c if is_symbol_char(c) => {
                let mut s = String::new();
                while let Some(&ch) = self.chars.peek() {
                    if is_symbol_char(ch) {
                        s.push(ch);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if s == "-" && self.chars.peek().is_some_and(|d| d.is_ascii_digit()) {
                    Tok::Int(self.digits(line, col, true)?)
                } else if s == ":-" {
                    Tok::Neck
                } else {
                    Tok::Atom(s)
                }
            }
            other => return Err(ParseError { line, col, msg: format!("unexpected character {other:?}") }),
        };
        Ok((tok, line, col))
    }

    fn digits(&mut self, line: usize, col: usize, neg: bool) -> Result<i64, ParseError> {
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        while let Some(&d) = self.chars.peek() {
            if d.is_ascii_digit() {
                s.push(d);
                self.bump();
            } else {
                break;
            }
        }
        s.parse().map_err(|_| ParseError { line, col, msg: format!("integer out of range: {s}") })
    }
}

struct Parser<'a, 's> {
    lex: Lexer<'a>,
    tok: Tok,
    line: usize,
    col: usize,
    syms: &'s mut SymbolTable,
    vars: HashMap<String, u32>,
    names: Vec<String>,
}

impl<'a, 's> Parser<'a, 's> {
    fn new(text: &'a str, syms: &'s mut SymbolTable) -> Result<Self, ParseError> {
        let mut lex = Lexer::new(text);
        let (tok, line, col) = lex.next()?;
        Ok(Parser { lex, tok, line, col, syms, vars: HashMap::new(), names: Vec::new() })
    }

    fn advance(&mut self) -> Result<Tok, ParseError> {
        let (t, l, c) = self.lex.next()?;
        self.line = l;
        self.col = c;
        Ok(std::mem::replace(&mut self.tok, t))
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.tok == t {
            self.advance()?;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}, found {}", describe(&self.tok))))
        }
    }

    fn reset_vars(&mut self) {
        self.vars.clear();
        self.names.clear();
    }

    fn var(&mut self, name: String) -> u32 {
        if name == "_" {
            self.names.push("_".into());
            return self.names.len() as u32 - 1;
        }
        if let Some(&v) = self.vars.get(&name) {
            return v;
        }
        let v = self.names.len() as u32;
        self.names.push(name.clone());
        self.vars.insert(name, v);
        v
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (line, col) = (self.line, self.col);
        match self.advance()? {
            Tok::Var(n) => Ok(Term::Var(self.var(n))),
            Tok::Int(i) => Ok(Term::Int(i)),
            Tok::Atom(a) => {
                let f = self.syms.intern(&a);
                if self.tok != Tok::Open {
                    return Ok(Term::Atom(f));
                }
                self.advance()?;
                let mut args = vec![self.term()?];
                while self.tok == Tok::Comma {
                    self.advance()?;
                    args.push(self.term()?);
                }
                self.expect(Tok::Close, "')'")?;
                Ok(Term::Compound(f, args))
            }
            other => Err(ParseError { line, col, msg: format!("expected a term, found {}", describe(&other)) }),
        }
    }

    fn goal(&mut self) -> Result<Term, ParseError> {
        let (l, c) = (self.line, self.col);
        let t = self.term()?;
        match t {
            Term::Atom(_) | Term::Compound(..) => Ok(t),
            _ => Err(ParseError { line: l, col: c, msg: "goal must be an atom or compound term".into() }),
        }
    }

    fn body(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut goals = vec![self.goal()?];
        while self.tok == Tok::Comma {
            self.advance()?;
            goals.push(self.goal()?);
        }
        Ok(goals)
    }

    fn directive(&mut self) -> Result<Vec<PredKey>, ParseError> {
        match self.advance()? {
            Tok::Atom(a) if a == "table" => {}
            other => return Err(self.err(format!("unknown directive starting with {}", describe(&other)))),
        }
        let mut decls = Vec::new();
        loop {
            let name = match self.advance()? {
                Tok::Atom(a) => a,
                other => return Err(self.err(format!("expected predicate name, found {}", describe(&other)))),
            };
            match self.advance()? {
                Tok::Atom(s) if s == "/" => {}
                other => return Err(self.err(format!("expected '/', found {}", describe(&other)))),
            }
            let arity = match self.advance()? {
                Tok::Int(i) if (0..=u32::MAX as i64).contains(&i) => i as u32,
                other => return Err(self.err(format!("expected arity, found {}", describe(&other)))),
            };
            decls.push((self.syms.intern(&name), arity));
            if self.tok == Tok::Comma {
                self.advance()?;
            } else {
                break;
            }
        }
        self.expect(Tok::End, "'.'")?;
        Ok(decls)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Atom(a) => format!("atom {a:?}"),
        Tok::Var(v) => format!("variable {v}"),
        Tok::Int(i) => format!("integer {i}"),
        Tok::Open => "'('".into(),
        Tok::Close => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::Neck => "':-'".into(),
        Tok::End => "end of clause".into(),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut syms = SymbolTable::new();
    let mut clauses = Vec::new();
    let mut tabled = Vec::new();
    {
        let mut p = Parser::new(text, &mut syms)?;
        while p.tok != Tok::Eof {
            p.reset_vars();
            if p.tok == Tok::Neck {
                p.advance()?;
                tabled.extend(p.directive()?);
                continue;
            }
            let (l, c) = (p.line, p.col);
            let head = p.term()?;
            if !matches!(head, Term::Atom(_) | Term::Compound(..)) {
                return Err(ParseError { line: l, col: c, msg: "clause head must be an atom or compound term".into() });
            }
            let body = if p.tok == Tok::Neck {
                p.advance()?;
                p.body()?
            } else {
                Vec::new()
            };
            p.expect(Tok::End, "'.'")?;
            let body = body.into_iter().filter(|g| *g != Term::Atom(wk::TRUE)).collect();
            clauses.push(Clause { head, body, nvars: p.names.len() as u32 });
        }
    }
    let mut prog = Program { symbols: syms, ..Program::new() };
    for c in clauses {
        prog.add_clause(c);
    }
    for k in tabled {
        prog.declare_tabled(k);
    }
    prog.finish();
    Ok(prog)
}

/// Parses `goal, goal, ... .` (the final period is optional).
pub fn parse_query(syms: &mut SymbolTable, text: &str) -> Result<Query, ParseError> {
    let mut p = Parser::new(text, syms)?;
    let goals = p.body()?;
    if p.tok == Tok::End {
        p.advance()?;
    }
    if p.tok != Tok::Eof {
        return Err(p.err(format!("unexpected {} after query", describe(&p.tok))));
    }
    Ok(Query { goals, var_names: std::mem::take(&mut p.names) })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_CYCLE: &str = "
        :- table path/2.
        path(X,Z) :- path(X,Y), path(Y,Z).
        path(X,Z) :- arc(X,Z).
        arc(a,b). arc(b,c). arc(c,b).
        arc(d,a). arc(d,b). arc(d,c).
    ";

    #[test]
    fn two_cycle_shape() {
        let p = parse_program(TWO_CYCLE).unwrap();
        let path = (p.symbols.lookup("path").unwrap(), 2);
        let arc = (p.symbols.lookup("arc").unwrap(), 2);
        assert_eq!(p.tabled(), &[path]);
        assert_eq!(p.clauses(path).len(), 2);
        assert_eq!(p.clauses(arc).len(), 6);
        assert_eq!(p.clauses(path)[0].nvars, 3);
    }

    #[test]
    fn empty_input() {
        let p = parse_program("").unwrap();
        assert!(p.predicates().is_empty());
        let p = parse_program("  % only a comment\n").unwrap();
        assert!(p.predicates().is_empty());
    }

    #[test]
    fn malformed_body() {
        let e = parse_program("p(a) :- .").unwrap_err();
        assert_eq!((e.line, e.col), (1, 9));
    }

    #[test]
    fn missing_period_reports_position() {
        let e = parse_program("p(a).\nq(b)").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn table_before_clauses_and_unknown_arity() {
        let p = parse_program(":- table q/3, r/0.\np(a).").unwrap();
        let q = p.symbols.lookup("q").unwrap();
        assert!(p.is_tabled((q, 3)));
        assert!(p.clauses((q, 3)).is_empty());
    }

    #[test]
    fn operators_in_prefix_form() {
        let p = parse_program("n(Q,D) :- =\\=(-(Q,1),D), is(D1, +(D,-2)), <(D1, 3), '=<'(0, D1).").unwrap();
        let c = &p.predicates()[0].clauses[0];
        assert_eq!(c.body.len(), 4);
        assert_eq!(c.body[0].functor(), Some((wk::ANE, 2)));
        assert_eq!(c.body[1].args()[1], Term::Compound(wk::PLUS, vec![Term::Var(1), Term::Int(-2)]));
        assert_eq!(c.body[3].functor(), Some((wk::LE, 2)));
    }

    #[test]
    fn anonymous_vars_are_distinct() {
        let p = parse_program("p(_, _, X, X).").unwrap();
        let c = &p.predicates()[0].clauses[0];
        assert_eq!(c.nvars, 3);
        assert_eq!(c.head.args()[0], Term::Var(0));
        assert_eq!(c.head.args()[1], Term::Var(1));
    }

    #[test]
    fn cut_and_nil() {
        let p = parse_program("p(X) :- q(X, []), !.").unwrap();
        let c = &p.predicates()[0].clauses[0];
        assert!(c.has_cut());
        assert_eq!(c.body[0].args()[1], Term::Atom(wk::NIL));
    }

    #[test]
    fn query_parse() {
        let mut s = SymbolTable::new();
        let q = parse_query(&mut s, "path(a,Z), arc(Z, _).").unwrap();
        assert_eq!(q.goals.len(), 2);
        assert_eq!(q.named_vars(), vec![(0, "Z")]);
        assert!(parse_query(&mut s, "path(a,Z) x").is_err());
    }

    #[test]
    fn variable_goal_rejected() {
        assert!(parse_program("p :- X.").is_err());
    }

    #[test]
    fn first_arg_index() {
        let p = parse_program("a(x,1). a(Y,2). a(z,3). a(f(q),4).").unwrap();
        let pr = &p.predicates()[0];
        let x = p.symbols.lookup("x").unwrap();
        let w = p.symbols.lookup("z").unwrap();
        let f = p.symbols.lookup("f").unwrap();
        assert_eq!(pr.clauses_for(Some(crate::terms::ArgKey::Atom(x)))[..], [0, 1]);
        assert_eq!(pr.clauses_for(Some(crate::terms::ArgKey::Atom(w)))[..], [1, 2]);
        assert_eq!(pr.clauses_for(Some(crate::terms::ArgKey::Functor(f, 1)))[..], [1, 3]);
        assert_eq!(pr.clauses_for(Some(crate::terms::ArgKey::Int(7)))[..], [1]);
        assert_eq!(pr.clauses_for(None).len(), 4);
    }
}
