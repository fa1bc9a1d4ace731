use std::collections::HashMap;
use std::fmt;

/// Interned atom or functor name.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Sym(pub u32);

/// Names the engine needs to recognise without a table lookup. They are
/// interned first, in this order, by [`SymbolTable::new`].
pub mod wk {
    use super::Sym;

    pub const TRUE: Sym = Sym(0);
    pub const FAIL: Sym = Sym(1);
    pub const CUT: Sym = Sym(2);
    pub const EQ: Sym = Sym(3);
    pub const NEQ: Sym = Sym(4);
    pub const IS: Sym = Sym(5);
    pub const LT: Sym = Sym(6);
    pub const GT: Sym = Sym(7);
    pub const LE: Sym = Sym(8);
    pub const GE: Sym = Sym(9);
    pub const AEQ: Sym = Sym(10);
    pub const ANE: Sym = Sym(11);
    pub const PLUS: Sym = Sym(12);
    pub const MINUS: Sym = Sym(13);
    pub const TIMES: Sym = Sym(14);
    pub const IDIV: Sym = Sym(15);
    pub const MOD: Sym = Sym(16);
    pub const MIN: Sym = Sym(17);
    pub const MAX: Sym = Sym(18);
    pub const ABS: Sym = Sym(19);
    pub const NIL: Sym = Sym(20);
    pub const DOT: Sym = Sym(21);

    pub(super) const NAMES: [&str; 22] = [
        "true", "fail", "!", "=", "\\=", "is", "<", ">", "=<", ">=", "=:=", "=\\=", "+", "-",
        "*", "//", "mod", "min", "max", "abs", "[]", ".",
    ];
}

#[derive(Clone, Debug)]
pub struct SymbolTable {
    names: Vec<String>,
    ids: HashMap<String, Sym>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}

impl SymbolTable {
    pub fn new() -> Self {
        let mut t = SymbolTable { names: Vec::new(), ids: HashMap::new() };
        for n in wk::NAMES {
            t.intern(n);
        }
        t
    }

    pub fn intern(&mut self, name: &str) -> Sym {
        if let Some(&s) = self.ids.get(name) {
            return s;
        }
        let s = Sym(self.names.len() as u32);
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), s);
        s
    }

    pub fn lookup(&self, name: &str) -> Option<Sym> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s.0 as usize]
    }

    /// Writes `s` as an atom, quoting it when it would not read back as one.
    pub fn write_atom(&self, s: Sym, out: &mut impl fmt::Write) -> fmt::Result {
        let n = self.name(s);
        if needs_quotes(n) {
            out.write_char('\'')?;
            for c in n.chars() {
                if c == '\'' || c == '\\' {
                    out.write_char('\\')?;
                }
                out.write_char(c)?;
            }
            out.write_char('\'')
        } else {
            out.write_str(n)
        }
    }
}

pub(crate) fn is_symbol_char(c: char) -> bool {
    matches!(c, '+' | '-' | '*' | '/' | '\\' | '^' | '<' | '>' | '=' | '~' | ':' | '?' | '@' | '#' | '&' | '$')
}

fn needs_quotes(n: &str) -> bool {
    if n == "[]" || n == "!" {
        return false;
    }
    let mut cs = n.chars();
    match cs.next() {
        None => true,
        Some(c) if c.is_ascii_lowercase() => !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'),
        Some(c) if is_symbol_char(c) => !n.chars().all(is_symbol_char),
        _ => true,
    }
}
