//! Text and JSON encodings of terms.
//!
//! Text form: `@k` for a state, a bare symbol for a constant, `(a, b)` for
//! pairs, `inj k t` for injections, `[i: t, ...]` for tables in index order
//! and `{t, ...}` for sets. Parsing is directed by the functor, so symbols
//! never clash with the keywords.

use serde_json::{json, Map, Value};

use super::expr::is_symbol_char;
use super::{FunctorExpr, StateId, Term};
use crate::error::{Error, Result};

impl FunctorExpr {
    /// Renders a state term in canonical text form.
    pub fn render(&self, t: &Term) -> String {
        self.render_with(t, &mut |x, out| {
            out.push('@');
            out.push_str(&x.to_string());
        })
    }

    /// Renders a term, delegating leaves to `leaf`.
    pub fn render_with<L>(&self, t: &Term<L>, leaf: &mut impl FnMut(&L, &mut String)) -> String {
        let mut out = String::new();
        self.write_term(t, leaf, &mut out);
        out
    }

    fn write_term<L>(&self, t: &Term<L>, leaf: &mut impl FnMut(&L, &mut String), out: &mut String) {
        match (self, t) {
            (_, Term::State(l)) => leaf(l, out),
            (FunctorExpr::Const(syms), Term::Const(c)) => out.push_str(&syms[*c]),
            (FunctorExpr::Prod(fa, fb), Term::Pair(a, b)) => {
                out.push('(');
                fa.write_term(a, leaf, out);
                out.push_str(", ");
                fb.write_term(b, leaf, out);
                out.push(')');
            }
            (FunctorExpr::Coprod(summands), Term::Inj(k, inner)) => {
                out.push_str("inj ");
                out.push_str(&k.to_string());
                out.push(' ');
                summands[*k].write_term(inner, leaf, out);
            }
            (FunctorExpr::Exp(base, index), Term::Tab(entries)) => {
                out.push('[');
                for (i, (sym, e)) in index.iter().zip(entries).enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(sym);
                    out.push_str(": ");
                    base.write_term(e, leaf, out);
                }
                out.push(']');
            }
            (FunctorExpr::Pow(inner), Term::Set(elems)) => {
                out.push('{');
                for (i, e) in elems.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    inner.write_term(e, leaf, out);
                }
                out.push('}');
            }
            _ => panic!("term does not inhabit {self}"),
        }
    }

    /// Parses the text form of an element of `H({0..n})` and canonicalizes it.
    pub fn parse_term(&self, src: &str, n: usize) -> Result<Term> {
        self.parse_term_at(src, n, 0)
    }

    /// Like [`FunctorExpr::parse_term`], reporting positions shifted by `offset`.
    pub fn parse_term_at(&self, src: &str, n: usize, offset: usize) -> Result<Term> {
        let mut p = TermParser { src, pos: 0, n };
        let t = p.term(self).map_err(|e| shift(e, offset))?;
        p.skip_ws();
        if p.pos < src.len() {
            return Err(Error::parse(offset + p.pos, "unexpected trailing input"));
        }
        Ok(t.canonicalize())
    }

    /// JSON encoding: `{"state": k}`, `{"const": sym}`, `{"pair": [a, b]}`,
    /// `{"inj": [k, t]}`, `{"tab": {i: t, ...}}`, `{"set": [t, ...]}`.
    pub fn term_to_json(&self, t: &Term) -> Value {
        match (self, t) {
            (_, Term::State(x)) => json!({ "state": x }),
            (FunctorExpr::Const(syms), Term::Const(c)) => json!({ "const": syms[*c] }),
            (FunctorExpr::Prod(fa, fb), Term::Pair(a, b)) => {
                json!({ "pair": [fa.term_to_json(a), fb.term_to_json(b)] })
            }
            (FunctorExpr::Coprod(s), Term::Inj(k, inner)) => json!({ "inj": [k, s[*k].term_to_json(inner)] }),
            (FunctorExpr::Exp(base, index), Term::Tab(entries)) => {
                let map: Map<String, Value> = index
                    .iter()
                    .zip(entries)
                    .map(|(i, e)| (i.clone(), base.term_to_json(e)))
                    .collect();
                json!({ "tab": map })
            }
            (FunctorExpr::Pow(inner), Term::Set(elems)) => {
                json!({ "set": elems.iter().map(|e| inner.term_to_json(e)).collect::<Vec<_>>() })
            }
            _ => panic!("term does not inhabit {self}"),
        }
    }

    pub fn term_from_json(&self, v: &Value, n: usize) -> Result<Term> {
        Ok(self.json_term(v, n)?.canonicalize())
    }

    fn json_term(&self, v: &Value, n: usize) -> Result<Term> {
        let bad = |what: &str| Error::Decode(format!("expected {what} for {self}, found {v}"));
        let obj = v.as_object().filter(|o| o.len() == 1).ok_or_else(|| bad("a one-key object"))?;
        let (key, body) = obj.iter().next().unwrap();
        match (self, key.as_str()) {
            (FunctorExpr::Id, "state") => {
                let x = body.as_u64().ok_or_else(|| bad("a state index"))? as StateId;
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, size: n });
                }
                Ok(Term::State(x))
            }
            (FunctorExpr::Const(syms), "const") => {
                let s = body.as_str().ok_or_else(|| bad("a symbol"))?;
                let c = syms.iter().position(|x| x == s).ok_or_else(|| bad("a declared symbol"))?;
                Ok(Term::Const(c))
            }
            (FunctorExpr::Prod(fa, fb), "pair") => match body.as_array().map(Vec::as_slice) {
                Some([a, b]) => Ok(Term::pair(fa.json_term(a, n)?, fb.json_term(b, n)?)),
                _ => Err(bad("a two-element array")),
            },
            (FunctorExpr::Coprod(s), "inj") => match body.as_array().map(Vec::as_slice) {
                Some([k, t]) => {
                    let k = k.as_u64().ok_or_else(|| bad("an injection tag"))? as usize;
                    let f = s.get(k).ok_or_else(|| bad("an injection tag in range"))?;
                    Ok(Term::inj(k, f.json_term(t, n)?))
                }
                _ => Err(bad("[tag, term]")),
            },
            (FunctorExpr::Exp(base, index), "tab") => {
                let map = body.as_object().ok_or_else(|| bad("an object"))?;
                if map.len() != index.len() {
                    return Err(bad("one entry per index symbol"));
                }
                index
                    .iter()
                    .map(|i| base.json_term(map.get(i).ok_or_else(|| bad("an entry for every index"))?, n))
                    .collect::<Result<Vec<_>>>()
                    .map(Term::Tab)
            }
            (FunctorExpr::Pow(inner), "set") => body
                .as_array()
                .ok_or_else(|| bad("an array"))?
                .iter()
                .map(|e| inner.json_term(e, n))
                .collect::<Result<Vec<_>>>()
                .map(Term::Set),
            _ => Err(bad("a matching constructor")),
        }
    }
}

fn shift(e: Error, offset: usize) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Parse { pos: pos + offset, msg },
        e => e,
    }
}

struct TermParser<'a> {
    src: &'a str,
    pos: usize,
    n: usize,
}

impl TermParser<'_> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
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

    fn word(&mut self) -> Result<&str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !is_symbol_char(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        if start == self.pos {
            return Err(Error::parse(start, "expected a symbol"));
        }
        Ok(&self.src[start..self.pos])
    }

    fn number(&mut self) -> Result<usize> {
        let start = self.pos;
        let w = self.word()?;
        w.parse().map_err(|_| Error::parse(start, format!("expected a number, found '{w}'")))
    }

    fn term(&mut self, f: &FunctorExpr) -> Result<Term> {
        match f {
            FunctorExpr::Id => {
                self.expect('@')?;
                let start = self.pos;
                let x = self.number()?;
                if x >= self.n {
                    return Err(Error::parse(start, format!("state @{x} out of range (carrier has {})", self.n)));
                }
                Ok(Term::State(x))
            }
            FunctorExpr::Const(syms) => {
                let start = self.pos;
                let w = self.word()?;
                match syms.iter().position(|s| s == w) {
                    Some(c) => Ok(Term::Const(c)),
                    None => Err(Error::parse(start, format!("'{w}' is not one of {{{}}}", syms.join(",")))),
                }
            }
            FunctorExpr::Prod(fa, fb) => {
                self.expect('(')?;
                let a = self.term(fa)?;
                self.expect(',')?;
                let b = self.term(fb)?;
                self.expect(')')?;
                Ok(Term::pair(a, b))
            }
            FunctorExpr::Coprod(summands) => {
                let start = self.pos;
                if self.word()? != "inj" {
                    return Err(Error::parse(start, "expected 'inj'"));
                }
                let kpos = self.pos;
                let k = self.number()?;
                let s = summands
                    .get(k)
                    .ok_or_else(|| Error::parse(kpos, format!("injection tag {k} out of range")))?;
                Ok(Term::inj(k, self.term(s)?))
            }
            FunctorExpr::Exp(base, index) => {
                self.expect('[')?;
                let mut entries: Vec<Option<Term>> = vec![None; index.len()];
                if !self.eat(']') {
                    loop {
                        let start = self.pos;
                        let w = self.word()?.to_string();
                        let i = index
                            .iter()
                            .position(|s| *s == w)
                            .ok_or_else(|| Error::parse(start, format!("'{w}' is not an index symbol")))?;
                        if entries[i].is_some() {
                            return Err(Error::parse(start, format!("duplicate entry for '{w}'")));
                        }
                        self.expect(':')?;
                        entries[i] = Some(self.term(base)?);
                        if self.eat(']') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                let missing = entries.iter().position(Option::is_none);
                if let Some(i) = missing {
                    return Err(Error::parse(self.pos, format!("missing entry for '{}'", index[i])));
                }
                Ok(Term::Tab(entries.into_iter().map(Option::unwrap).collect()))
            }
            FunctorExpr::Pow(inner) => {
                self.expect('{')?;
                let mut elems = Vec::new();
                if !self.eat('}') {
                    loop {
                        elems.push(self.term(inner)?);
                        if self.eat('}') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                Ok(Term::Set(elems))
            }
        }
    }
}
