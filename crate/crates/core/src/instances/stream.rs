use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::coalgebra::{wp, Coalgebra, PointedCoalgebra};
use crate::error::{Error, Result};
use crate::functor::{FunctorExpr, StateId, Symbol, Term};

/// A finite word or an eventually periodic stream `u v^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StreamSpec {
    Finite(Vec<Symbol>),
    Lasso { prefix: Vec<Symbol>, period: Vec<Symbol> },
}

impl StreamSpec {
    pub fn lasso(prefix: Vec<Symbol>, period: Vec<Symbol>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Invalid("lasso period must be nonempty".into()));
        }
        Ok(StreamSpec::Lasso { prefix, period })
    }

    /// Letters occurring in the stream, sorted.
    pub fn alphabet(&self) -> Vec<Symbol> {
        let letters: BTreeSet<&Symbol> = match self {
            StreamSpec::Finite(w) => w.iter().collect(),
            StreamSpec::Lasso { prefix, period } => prefix.iter().chain(period).collect(),
        };
        letters.into_iter().cloned().collect()
    }

    /// Representation size: `|w|` or `|u| + |v|`.
    pub fn len(&self) -> usize {
        match self {
            StreamSpec::Finite(w) => w.len(),
            StreamSpec::Lasso { prefix, period } => prefix.len() + period.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, StreamSpec::Finite(w) if w.is_empty())
    }

    /// The letter at position `i`, if any.
    pub fn at(&self, i: usize) -> Option<&Symbol> {
        match self {
            StreamSpec::Finite(w) => w.get(i),
            StreamSpec::Lasso { prefix, period } => {
                prefix.get(i).or_else(|| Some(&period[(i - prefix.len()) % period.len()]))
            }
        }
    }
}

/// `Id*{I}+{end}`: head/tail pairs in the left summand, the empty stream on the right.
pub fn stream_functor(alphabet: &[Symbol]) -> FunctorExpr {
    FunctorExpr::Coprod(vec![
        FunctorExpr::prod(FunctorExpr::Id, FunctorExpr::Const(alphabet.to_vec())),
        FunctorExpr::Const(vec!["end".into()]),
    ])
}

/// Encodes over the stream's own alphabet.
pub fn stream_to_coalgebra(s: &StreamSpec) -> PointedCoalgebra {
    stream_to_coalgebra_over(s, &s.alphabet()).expect("own alphabet covers every letter")
}

/// A finite word `w` becomes a path of `|w| + 1` states ending in a deadlock;
/// a lasso `u v^ω` becomes `|u| + |v|` states whose last one loops back.
pub fn stream_to_coalgebra_over(s: &StreamSpec, alphabet: &[Symbol]) -> Result<PointedCoalgebra> {
    let f = stream_functor(alphabet);
    f.validate()?;
    let letter = |a: &Symbol| {
        alphabet
            .iter()
            .position(|b| b == a)
            .ok_or_else(|| Error::Invalid(format!("letter '{a}' is not in the alphabet")))
    };
    let cons = |next: StateId, a: usize| Term::inj(0, Term::pair(Term::State(next), Term::Const(a)));
    let structure = match s {
        StreamSpec::Finite(w) => {
            let mut v = w
                .iter()
                .enumerate()
                .map(|(i, a)| Ok(cons(i + 1, letter(a)?)))
                .collect::<Result<Vec<_>>>()?;
            v.push(Term::inj(1, Term::Const(0)));
            v
        }
        StreamSpec::Lasso { prefix, period } => {
            if period.is_empty() {
                return Err(Error::Invalid("lasso period must be nonempty".into()));
            }
            let n = prefix.len() + period.len();
            prefix
                .iter()
                .chain(period)
                .enumerate()
                .map(|(i, a)| {
                    let next = if i + 1 == n { prefix.len() } else { i + 1 };
                    Ok(cons(next, letter(a)?))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    PointedCoalgebra::new(Coalgebra::new(f, structure)?, 0)
}

/// Reads the stream generated from the point of a stream coalgebra.
pub fn coalgebra_to_stream(pc: &PointedCoalgebra) -> Result<StreamSpec> {
    let alphabet = match pc.functor() {
        FunctorExpr::Coprod(s) => match s.as_slice() {
            [FunctorExpr::Prod(id, letters), FunctorExpr::Const(end)]
                if **id == FunctorExpr::Id && end.len() == 1 =>
            {
                match &**letters {
                    FunctorExpr::Const(a) => a.clone(),
                    _ => return Err(Error::Decode("not a stream functor".into())),
                }
            }
            _ => return Err(Error::Decode("not a stream functor".into())),
        },
        other => return Err(Error::Decode(format!("{other} is not a stream functor"))),
    };
    let mut visited = vec![None; pc.len()];
    let mut word = Vec::new();
    let mut x = pc.point;
    loop {
        if let Some(i) = visited[x] {
            let period = word.split_off(i);
            return Ok(StreamSpec::Lasso { prefix: word, period });
        }
        visited[x] = Some(word.len());
        match pc.base.step(x) {
            Term::Inj(0, p) => match &**p {
                Term::Pair(next, a) => match (&**next, &**a) {
                    (Term::State(y), Term::Const(a)) => {
                        word.push(alphabet[*a].clone());
                        x = *y;
                    }
                    _ => unreachable!("type-checked"),
                },
                _ => unreachable!("type-checked"),
            },
            _ => return Ok(StreamSpec::Finite(word)),
        }
    }
}

/// The representation with the shortest prefix and period.
pub fn stream_normalize(s: &StreamSpec) -> StreamSpec {
    coalgebra_to_stream(&wp(&stream_to_coalgebra(s))).expect("wp of a stream coalgebra is a stream coalgebra")
}

impl fmt::Display for StreamSpec {
    /// `abc` for finite words (`ε` when empty), `ab(c)^w` for lassos.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamSpec::Finite(w) if w.is_empty() => f.write_str("ε"),
            StreamSpec::Finite(w) => f.write_str(&w.concat()),
            StreamSpec::Lasso { prefix, period } => write!(f, "{}({})^w", prefix.concat(), period.concat()),
        }
    }
}

impl FromStr for StreamSpec {
    type Err = Error;

    /// Letters are single alphanumeric characters.
    fn from_str(src: &str) -> Result<Self> {
        let s = src.trim();
        if s.is_empty() || s == "ε" || s == "eps" {
            return Ok(StreamSpec::Finite(Vec::new()));
        }
        let letters = |part: &str, offset: usize| -> Result<Vec<Symbol>> {
            part.char_indices()
                .map(|(i, c)| {
                    if c.is_alphanumeric() {
                        Ok(c.to_string())
                    } else {
                        Err(Error::parse(offset + i, format!("unexpected '{c}'")))
                    }
                })
                .collect()
        };
        match s.find('(') {
            None => Ok(StreamSpec::Finite(letters(s, 0)?)),
            Some(open) => {
                let rest = &s[open + 1..];
                let close = rest.find(')').ok_or_else(|| Error::parse(s.len(), "missing ')'"))?;
                let tail = &rest[close + 1..];
                if tail != "^w" && tail != "^ω" {
                    return Err(Error::parse(open + close + 2, "expected '^w' after the period"));
                }
                let period = letters(&rest[..close], open + 1)?;
                if period.is_empty() {
                    return Err(Error::parse(open + 1, "lasso period must be nonempty"));
                }
                Ok(StreamSpec::Lasso { prefix: letters(&s[..open], 0)?, period })
            }
        }
    }
}
