//! Coalgebra files.
//!
//! Text form, one item per line, blank lines and lines starting with `#`
//! ignored:
//!
//! ```text
//! functor: Id*Id+{leaf}
//! states: 2
//! point: 0
//! 0: inj 0 (@1, @1)
//! 1: inj 1 leaf
//! ```
//!
//! The JSON form carries the same fields, with `structure` a list of JSON
//! terms in state order. Both forms round-trip exactly.

use serde_json::{json, Value};

use crate::coalgebra::{Coalgebra, PointedCoalgebra};
use crate::error::{Error, Result};
use crate::functor::{parse_functor, FunctorExpr, StateId, Term};

/// A coalgebra with an optional distinguished state, as stored in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalgebraFile {
    pub coalgebra: Coalgebra,
    pub point: Option<StateId>,
}

impl CoalgebraFile {
    pub fn new(coalgebra: Coalgebra, point: Option<StateId>) -> Result<Self> {
        if let Some(p) = point {
            if p >= coalgebra.len() {
                return Err(Error::IndexOutOfRange { index: p, size: coalgebra.len() });
            }
        }
        Ok(CoalgebraFile { coalgebra, point })
    }

    /// The pointed coalgebra, pointed at state 0 when the file names no point.
    pub fn pointed(&self) -> Result<PointedCoalgebra> {
        PointedCoalgebra::new(self.coalgebra.clone(), self.point.unwrap_or(0))
    }

    /// Accepts either form; JSON is recognized by a leading `{`.
    pub fn parse(src: &str) -> Result<Self> {
        if src.trim_start().starts_with('{') {
            let v: Value = serde_json::from_str(src)
                .map_err(|e| Error::parse(json_offset(src, e.line(), e.column()), e.to_string()))?;
            Self::from_json(&v)
        } else {
            Self::parse_text(src)
        }
    }

    pub fn parse_text(src: &str) -> Result<Self> {
        let mut functor: Option<FunctorExpr> = None;
        let mut n: Option<usize> = None;
        let mut point: Option<StateId> = None;
        let mut terms: Vec<Option<Term>> = Vec::new();
        let mut offset = 0;
        for line in src.split_inclusive('\n') {
            let start = offset;
            offset += line.len();
            let body = line.trim_end_matches(['\n', '\r']);
            let trimmed = body.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let lead = start + body.len() - trimmed.len();
            let colon = trimmed.find(':').ok_or_else(|| Error::parse(lead, "expected 'key: value'"))?;
            let key = trimmed[..colon].trim();
            let value = &trimmed[colon + 1..];
            let value_pos = lead + colon + 1 + (value.len() - value.trim_start().len());
            let value = value.trim();
            match key {
                "functor" => {
                    if functor.is_some() {
                        return Err(Error::parse(lead, "duplicate functor line"));
                    }
                    functor = Some(parse_functor(value).map_err(|e| shift(e, value_pos))?);
                }
                "states" => {
                    if n.is_some() {
                        return Err(Error::parse(lead, "duplicate states line"));
                    }
                    let k: usize = value.parse().map_err(|_| Error::parse(value_pos, "expected a state count"))?;
                    n = Some(k);
                    terms = vec![None; k];
                }
                "point" => {
                    if point.is_some() {
                        return Err(Error::parse(lead, "duplicate point line"));
                    }
                    point = Some(value.parse().map_err(|_| Error::parse(value_pos, "expected a state index"))?);
                }
                _ => {
                    let x: StateId = key.parse().map_err(|_| Error::parse(lead, format!("unknown key '{key}'")))?;
                    let (Some(f), Some(n)) = (&functor, n) else {
                        return Err(Error::parse(lead, "state lines must follow the functor and states lines"));
                    };
                    if x >= n {
                        return Err(Error::IndexOutOfRange { index: x, size: n });
                    }
                    if terms[x].is_some() {
                        return Err(Error::parse(lead, format!("state {x} defined twice")));
                    }
                    terms[x] = Some(f.parse_term_at(value, n, value_pos)?);
                }
            }
        }
        let functor = functor.ok_or_else(|| Error::parse(src.len(), "missing functor line"))?;
        n.ok_or_else(|| Error::parse(src.len(), "missing states line"))?;
        let structure = terms
            .into_iter()
            .enumerate()
            .map(|(x, t)| t.ok_or_else(|| Error::parse(src.len(), format!("state {x} has no structure line"))))
            .collect::<Result<Vec<_>>>()?;
        CoalgebraFile::new(Coalgebra::new(functor, structure)?, point)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Decode(format!("missing field '{k}'")));
        let functor = parse_functor(field("functor")?.as_str().ok_or_else(|| Error::Decode("functor must be a string".into()))?)?;
        let n = field("states")?.as_u64().ok_or_else(|| Error::Decode("states must be a count".into()))? as usize;
        let point = match v.get("point") {
            None | Some(Value::Null) => None,
            Some(p) => Some(p.as_u64().ok_or_else(|| Error::Decode("point must be a state index".into()))? as StateId),
        };
        let items = field("structure")?.as_array().ok_or_else(|| Error::Decode("structure must be a list".into()))?;
        if items.len() != n {
            return Err(Error::Decode(format!("structure has {} terms for {n} states", items.len())));
        }
        let structure = items.iter().map(|t| functor.term_from_json(t, n)).collect::<Result<Vec<_>>>()?;
        CoalgebraFile::new(Coalgebra::new(functor, structure)?, point)
    }

    pub fn to_text(&self) -> String {
        let c = &self.coalgebra;
        let mut out = format!("functor: {}\nstates: {}\n", c.functor(), c.len());
        if let Some(p) = self.point {
            out.push_str(&format!("point: {p}\n"));
        }
        for (x, t) in c.structure().iter().enumerate() {
            out.push_str(&format!("{x}: {}\n", c.functor().render(t)));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let c = &self.coalgebra;
        let mut v = json!({
            "functor": c.functor().to_string(),
            "states": c.len(),
            "structure": c.structure().iter().map(|t| c.functor().term_to_json(t)).collect::<Vec<_>>(),
        });
        if let Some(p) = self.point {
            v["point"] = json!(p);
        }
        v
    }
}

impl From<PointedCoalgebra> for CoalgebraFile {
    fn from(pc: PointedCoalgebra) -> Self {
        CoalgebraFile { coalgebra: pc.base, point: Some(pc.point) }
    }
}

impl From<Coalgebra> for CoalgebraFile {
    fn from(coalgebra: Coalgebra) -> Self {
        CoalgebraFile { coalgebra, point: None }
    }
}

fn shift(e: Error, offset: usize) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Parse { pos: pos + offset, msg },
        other => other,
    }
}

/// Byte offset of a 1-based line and column.
fn json_offset(src: &str, line: usize, column: usize) -> usize {
    let line_start: usize = src.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(src.len())
}
