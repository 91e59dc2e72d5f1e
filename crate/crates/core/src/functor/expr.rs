use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Symbol = String;

/// A finitary set functor built from identity, finite constants, binary
/// products, coproducts, finite exponents and the finite powerset.
///
/// Every functor in this grammar preserves wide intersections and
/// injections on nonempty carriers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FunctorExpr {
    Id,
    /// `H X = C` for a finite, ordered set of symbols `C`.
    Const(Vec<Symbol>),
    Prod(Box<FunctorExpr>, Box<FunctorExpr>),
    /// Tagged sum; the tag of a summand is its position.
    Coprod(Vec<FunctorExpr>),
    /// `F^I` for a finite, nonempty index set `I`.
    Exp(Box<FunctorExpr>, Vec<Symbol>),
    /// Finite powerset of the inner functor.
    Pow(Box<FunctorExpr>),
}

pub(crate) fn is_symbol_char(c: char) -> bool {
    c.is_alphanumeric() || "_-.'*+!?#$%&~/=".contains(c)
}

fn check_symbols(syms: &[Symbol], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for s in syms {
        if s.is_empty() || !s.chars().all(is_symbol_char) {
            return Err(Error::Invalid(format!("bad symbol {s:?} in {what}")));
        }
        if !seen.insert(s) {
            return Err(Error::Invalid(format!("duplicate symbol {s:?} in {what}")));
        }
    }
    Ok(())
}

impl FunctorExpr {
    pub fn constant<S: Into<Symbol>>(syms: impl IntoIterator<Item = S>) -> Result<Self> {
        let syms: Vec<Symbol> = syms.into_iter().map(Into::into).collect();
        check_symbols(&syms, "constant")?;
        Ok(FunctorExpr::Const(syms))
    }

    pub fn prod(a: FunctorExpr, b: FunctorExpr) -> Self {
        FunctorExpr::Prod(Box::new(a), Box::new(b))
    }

    pub fn coprod(summands: Vec<FunctorExpr>) -> Result<Self> {
        if summands.is_empty() {
            return Err(Error::Invalid("coproduct needs at least one summand".into()));
        }
        Ok(FunctorExpr::Coprod(summands))
    }

    pub fn exp<S: Into<Symbol>>(base: FunctorExpr, index: impl IntoIterator<Item = S>) -> Result<Self> {
        let index: Vec<Symbol> = index.into_iter().map(Into::into).collect();
        if index.is_empty() {
            return Err(Error::Invalid("empty exponent index".into()));
        }
        check_symbols(&index, "exponent index")?;
        Ok(FunctorExpr::Exp(Box::new(base), index))
    }

    pub fn pow(inner: FunctorExpr) -> Self {
        FunctorExpr::Pow(Box::new(inner))
    }

    /// Checks the structural invariants of every node.
    pub fn validate(&self) -> Result<()> {
        match self {
            FunctorExpr::Id => Ok(()),
            FunctorExpr::Const(syms) => check_symbols(syms, "constant"),
            FunctorExpr::Prod(a, b) => {
                a.validate()?;
                b.validate()
            }
            FunctorExpr::Coprod(summands) => {
                if summands.is_empty() {
                    return Err(Error::Invalid("coproduct needs at least one summand".into()));
                }
                summands.iter().try_for_each(FunctorExpr::validate)
            }
            FunctorExpr::Exp(base, index) => {
                if index.is_empty() {
                    return Err(Error::Invalid("empty exponent index".into()));
                }
                check_symbols(index, "exponent index")?;
                base.validate()
            }
            FunctorExpr::Pow(inner) => inner.validate(),
        }
    }

    /// True if the functor mentions the powerset anywhere, i.e. its
    /// elements contain unordered parts.
    pub fn has_powerset(&self) -> bool {
        match self {
            FunctorExpr::Id | FunctorExpr::Const(_) => false,
            FunctorExpr::Prod(a, b) => a.has_powerset() || b.has_powerset(),
            FunctorExpr::Coprod(s) => s.iter().any(FunctorExpr::has_powerset),
            FunctorExpr::Exp(base, _) => base.has_powerset(),
            FunctorExpr::Pow(_) => true,
        }
    }

    fn level(&self) -> u8 {
        match self {
            FunctorExpr::Coprod(_) => 0,
            FunctorExpr::Prod(..) => 1,
            FunctorExpr::Exp(..) => 2,
            _ => 3,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min_level: u8) -> fmt::Result {
        if self.level() < min_level {
            f.write_str("(")?;
            self.write_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            FunctorExpr::Id => f.write_str("Id"),
            FunctorExpr::Const(syms) => write!(f, "{{{}}}", syms.join(",")),
            FunctorExpr::Prod(a, b) => {
                a.write_at(f, 1)?;
                f.write_str("*")?;
                b.write_at(f, 2)
            }
            FunctorExpr::Coprod(summands) => {
                if summands.len() == 1 {
                    f.write_str("+")?;
                }
                for (i, s) in summands.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    s.write_at(f, 1)?;
                }
                Ok(())
            }
            FunctorExpr::Exp(base, index) => {
                base.write_at(f, 2)?;
                write!(f, "^{{{}}}", index.join(","))
            }
            FunctorExpr::Pow(inner) => {
                f.write_str("P(")?;
                inner.write_at(f, 0)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for FunctorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl FromStr for FunctorExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_functor(s)
    }
}

/// Parses the functor grammar
///
/// ```text
/// sum     := '+'? prod ('+' prod)*
/// prod    := postfix ('*' postfix)*
/// postfix := atom ('^' '{' sym, ... '}')*
/// atom    := 'Id' | '{' sym, ... '}' | 'P' '(' sum ')' | '(' sum ')'
/// ```
///
/// A leading `+` marks a one-summand coproduct.
pub fn parse_functor(src: &str) -> Result<FunctorExpr> {
    let mut p = Parser { src, pos: 0 };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(Error::parse(p.pos, "unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek_raw() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek_raw(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek_raw()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected '{c}'")))
        }
    }

    fn sum(&mut self) -> Result<FunctorExpr> {
        let forced = self.eat('+');
        let mut summands = vec![self.prod()?];
        while self.eat('+') {
            summands.push(self.prod()?);
        }
        if summands.len() == 1 && !forced {
            Ok(summands.pop().unwrap())
        } else {
            Ok(FunctorExpr::Coprod(summands))
        }
    }

    fn prod(&mut self) -> Result<FunctorExpr> {
        let mut acc = self.postfix()?;
        while self.eat('*') {
            let rhs = self.postfix()?;
            acc = FunctorExpr::prod(acc, rhs);
        }
        Ok(acc)
    }

    fn postfix(&mut self) -> Result<FunctorExpr> {
        let mut acc = self.atom()?;
        while self.eat('^') {
            let start = self.pos;
            let index = self.symbol_list()?;
            if index.is_empty() {
                return Err(Error::parse(start, "empty exponent index"));
            }
            acc = FunctorExpr::Exp(Box::new(acc), index);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<FunctorExpr> {
        match self.peek() {
            Some('{') => Ok(FunctorExpr::Const(self.symbol_list()?)),
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(_) if self.src[self.pos..].starts_with("Id") => {
                self.pos += 2;
                Ok(FunctorExpr::Id)
            }
            Some('P') => {
                self.pos += 1;
                self.expect('(')?;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(FunctorExpr::pow(e))
            }
            Some(c) => Err(Error::parse(self.pos, format!("unexpected '{c}'"))),
            None => Err(Error::parse(self.pos, "unexpected end of input")),
        }
    }

    fn symbol_list(&mut self) -> Result<Vec<Symbol>> {
        self.expect('{')?;
        let mut syms: Vec<Symbol> = Vec::new();
        if self.eat('}') {
            return Ok(syms);
        }
        loop {
            self.skip_ws();
            let start = self.pos;
            while let Some(c) = self.peek_raw() {
                if !is_symbol_char(c) {
                    break;
                }
                self.pos += c.len_utf8();
            }
            if start == self.pos {
                return Err(Error::parse(start, "expected a symbol"));
            }
            let sym = &self.src[start..self.pos];
            if syms.iter().any(|s| s == sym) {
                return Err(Error::parse(start, format!("duplicate symbol '{sym}'")));
            }
            syms.push(sym.to_string());
            if self.eat('}') {
                return Ok(syms);
            }
            self.expect(',')?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cst(syms: &[&str]) -> FunctorExpr {
        FunctorExpr::constant(syms.iter().copied()).unwrap()
    }

    #[test]
    fn binary_tree_functor() {
        let f = parse_functor("Id*Id+{leaf}").unwrap();
        assert_eq!(
            f,
            FunctorExpr::Coprod(vec![FunctorExpr::prod(FunctorExpr::Id, FunctorExpr::Id), cst(&["leaf"])])
        );
    }

    #[test]
    fn moore_functor() {
        let f = parse_functor("Id^{a,b}*{0,1}").unwrap();
        let exp = FunctorExpr::exp(FunctorExpr::Id, ["a", "b"]).unwrap();
        assert_eq!(f, FunctorExpr::prod(exp, cst(&["0", "1"])));
    }

    #[test]
    fn empty_exponent_rejected() {
        assert!(matches!(parse_functor("Id^{}"), Err(Error::Parse { pos: 3, .. })));
    }

    #[test]
    fn duplicate_symbols_rejected() {
        assert!(parse_functor("{a,b,a}").is_err());
        assert!(parse_functor("Id^{x,x}").is_err());
    }

    #[test]
    fn bad_input_positions() {
        match parse_functor("Id*") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_functor("Id Id").is_err());
        assert!(parse_functor("P(Id").is_err());
    }

    #[test]
    fn printing_round_trips() {
        for src in [
            "Id",
            "{}",
            "{*}",
            "Id*Id+{leaf}",
            "Id^{a,b}*{0,1}",
            "P(Id)",
            "P({a,b}*Id)",
            "Id*{a,b}+{end}",
            "Id*(Id*Id)",
            "(Id+{x})*Id",
            "(Id+Id)+Id",
            "+Id",
            "(+Id)*{u}",
            "(Id*Id)^{i}^{j}",
            "P(P(Id)+{z})^{k}",
        ] {
            let f = parse_functor(src).unwrap();
            let printed = f.to_string();
            assert_eq!(parse_functor(&printed).unwrap(), f, "{src} -> {printed}");
        }
        assert_eq!(parse_functor(" Id * Id + { leaf } ").unwrap().to_string(), "Id*Id+{leaf}");
    }

    #[test]
    fn product_is_left_associative() {
        let f = parse_functor("Id*{a}*Id").unwrap();
        assert_eq!(
            f,
            FunctorExpr::prod(FunctorExpr::prod(FunctorExpr::Id, cst(&["a"])), FunctorExpr::Id)
        );
    }
}
