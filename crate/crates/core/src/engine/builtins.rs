use super::EngineError;
use crate::terms::{wk, Cell, Store, Sym};

pub fn is_builtin(f: Sym, n: u32) -> bool {
    match n {
        0 => f == wk::TRUE || f == wk::FAIL,
        2 => matches!(f, wk::EQ | wk::NEQ | wk::IS | wk::LT | wk::GT | wk::LE | wk::GE | wk::AEQ | wk::ANE),
        _ => false,
    }
}

/// Runs builtin `f/n` whose argument cells start at `p + 1`.
pub fn call(store: &mut Store, f: Sym, n: u32, p: usize) -> Result<bool, EngineError> {
    if n == 0 {
        return Ok(f == wk::TRUE);
    }
    let (a, b) = (p + 1, p + 2);
    match f {
        wk::EQ => Ok(store.unify(a, b)),
        wk::NEQ => {
            let m = store.mark();
            let ok = store.unify(a, b);
            store.undo_unchecked(m.0);
            Ok(!ok)
        }
        wk::IS => {
            let v = eval(store, b)?;
            let c = store.push(Cell::Int(v));
            Ok(store.unify(a, c))
        }
        _ => {
            let (x, y) = (eval(store, a)?, eval(store, b)?);
            Ok(match f {
                wk::LT => x < y,
                wk::GT => x > y,
                wk::LE => x <= y,
                wk::GE => x >= y,
                wk::AEQ => x == y,
                wk::ANE => x != y,
                _ => unreachable!("checked by is_builtin"),
            })
        }
    }
}

pub fn eval(store: &Store, a: usize) -> Result<i64, EngineError> {
    let a = store.deref(a);
    match store.cell(a) {
        Cell::Int(i) => Ok(i),
        Cell::Ref(_) => Err(EngineError::Arith("unbound variable in arithmetic".into())),
        Cell::Atom(_) => Err(EngineError::Arith("atom in arithmetic".into())),
        Cell::Str(p) => {
            let Cell::Fun(f, n) = store.cell(p) else { unreachable!() };
            let overflow = || EngineError::Arith("integer overflow".into());
            match (f, n) {
                (wk::MINUS, 1) => eval(store, p + 1)?.checked_neg().ok_or_else(overflow),
                (wk::ABS, 1) => eval(store, p + 1)?.checked_abs().ok_or_else(overflow),
                (wk::PLUS, 1) => eval(store, p + 1),
                (_, 2) => {
                    let x = eval(store, p + 1)?;
                    let y = eval(store, p + 2)?;
                    match f {
                        wk::PLUS => x.checked_add(y).ok_or_else(overflow),
                        wk::MINUS => x.checked_sub(y).ok_or_else(overflow),
                        wk::TIMES => x.checked_mul(y).ok_or_else(overflow),
                        wk::IDIV if y == 0 => Err(EngineError::Arith("division by zero".into())),
                        wk::IDIV => x.checked_div(y).ok_or_else(overflow),
                        wk::MOD if y == 0 => Err(EngineError::Arith("division by zero".into())),
                        wk::MOD => Ok(x.rem_euclid(y)),
                        wk::MIN => Ok(x.min(y)),
                        wk::MAX => Ok(x.max(y)),
                        _ => Err(EngineError::Arith("unknown arithmetic function".into())),
                    }
                }
                _ => Err(EngineError::Arith("unknown arithmetic function".into())),
            }
        }
        Cell::Fun(..) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{parse_query, SymbolTable};

    fn run(goal: &str) -> Result<bool, EngineError> {
        let mut syms = SymbolTable::new();
        let q = parse_query(&mut syms, goal).unwrap();
        let mut s = Store::new();
        let mut vars = vec![None; q.var_names.len()];
        let mut ok = true;
        for g in &q.goals {
            let a = s.put_term_addr(g, &mut vars);
            let (f, n, p) = s.callable(a).unwrap();
            assert!(is_builtin(f, n));
            ok = ok && call(&mut s, f, n, p)?;
        }
        Ok(ok)
    }

    #[test]
    fn arithmetic() {
        assert!(run("is(X, +(2, *(3,4))), =:=(X, 14)").unwrap());
        assert!(run("is(X, -(5)), <(X, 0)").unwrap());
        assert!(run("=\\=(-(3,1), 1)").unwrap());
        assert!(!run("=\\=(-(3,1), 2)").unwrap());
        assert!(run("is(X, mod(-7, 3)), =:=(X, 2)").unwrap());
        assert!(run("is(X, //(7, 0))").is_err());
        assert!(run("<(X, 1)").is_err());
    }

    #[test]
    fn unification_builtins() {
        assert!(run("=(f(X), f(a)), =(X, a)").unwrap());
        assert!(run("\\=(a, b)").unwrap());
        assert!(!run("\\=(X, b)").unwrap());
        assert!(run("true").unwrap());
        assert!(!run("fail").unwrap());
    }
}
