use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use crate::coalgebra::{wp, Coalgebra, PointedCoalgebra};
use crate::error::{Error, Result};
use crate::functor::{FunctorExpr, StateId, Symbol, Term};

/// A deterministic Moore automaton with input alphabet `I` and output set `J`,
/// i.e. a pointed coalgebra for `X^I × J`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MooreMachine {
    pub inputs: Vec<Symbol>,
    pub outputs: Vec<Symbol>,
    /// `next[q][i]` is the successor of `q` under input `i`.
    pub next: Vec<Vec<StateId>>,
    /// Output index of each state.
    pub out: Vec<usize>,
    pub initial: StateId,
}

impl MooreMachine {
    pub fn new(
        inputs: Vec<Symbol>,
        outputs: Vec<Symbol>,
        next: Vec<Vec<StateId>>,
        out: Vec<usize>,
        initial: StateId,
    ) -> Result<Self> {
        let m = MooreMachine { inputs, outputs, next, out, initial };
        m.functor().validate()?;
        let n = m.next.len();
        if n == 0 || m.initial >= n {
            return Err(Error::Invalid(format!("initial state {} out of range for {n} states", m.initial)));
        }
        if m.out.len() != n {
            return Err(Error::Invalid("one output per state required".into()));
        }
        for (q, row) in m.next.iter().enumerate() {
            if row.len() != m.inputs.len() {
                return Err(Error::Invalid(format!("state {q}: transition row must have one entry per input")));
            }
            if let Some(&t) = row.iter().find(|&&t| t >= n) {
                return Err(Error::Invalid(format!("state {q}: successor {t} out of range")));
            }
            if m.out[q] >= m.outputs.len() {
                return Err(Error::Invalid(format!("state {q}: output index out of range")));
            }
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.next.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next.is_empty()
    }

    /// `Id^{I}*{J}`.
    pub fn functor(&self) -> FunctorExpr {
        FunctorExpr::prod(
            FunctorExpr::Exp(Box::new(FunctorExpr::Id), self.inputs.clone()),
            FunctorExpr::Const(self.outputs.clone()),
        )
    }

    /// State reached from the initial state by reading `word`.
    pub fn run(&self, word: &[usize]) -> StateId {
        word.iter().fold(self.initial, |q, &i| self.next[q][i])
    }
}

/// `α(q) = ([i: @next(q, i), ...], out(q))`.
pub fn moore_to_coalgebra(m: &MooreMachine) -> PointedCoalgebra {
    let structure = (0..m.len())
        .map(|q| {
            Term::pair(
                Term::Tab(m.next[q].iter().map(|&t| Term::State(t)).collect()),
                Term::Const(m.out[q]),
            )
        })
        .collect();
    let c = Coalgebra::new(m.functor(), structure).expect("machine is well-formed");
    PointedCoalgebra::new(c, m.initial).expect("initial state in range")
}

pub fn coalgebra_to_moore(pc: &PointedCoalgebra) -> Result<MooreMachine> {
    let mismatch = || Error::FunctorMismatch {
        expected: "Id^{I}*{J}".into(),
        found: pc.functor().to_string(),
    };
    let FunctorExpr::Prod(left, right) = pc.functor() else { return Err(mismatch()) };
    let (FunctorExpr::Exp(base, inputs), FunctorExpr::Const(outputs)) = (&**left, &**right) else {
        return Err(mismatch());
    };
    if **base != FunctorExpr::Id {
        return Err(mismatch());
    }
    let mut next = Vec::with_capacity(pc.len());
    let mut out = Vec::with_capacity(pc.len());
    for t in pc.base.structure() {
        let Term::Pair(tab, o) = t else { unreachable!("type-checked") };
        let (Term::Tab(row), Term::Const(o)) = (&**tab, &**o) else { unreachable!("type-checked") };
        next.push(
            row.iter()
                .map(|e| match e {
                    Term::State(s) => *s,
                    _ => unreachable!("type-checked"),
                })
                .collect(),
        );
        out.push(*o);
    }
    MooreMachine::new(inputs.clone(), outputs.clone(), next, out, pc.point)
}

/// The output after every word of length at most `max_len`. Words are
/// sequences of input indices.
pub fn moore_behavior(m: &MooreMachine, max_len: usize) -> BTreeMap<Vec<usize>, Symbol> {
    let mut result = BTreeMap::new();
    let mut frontier = vec![(Vec::new(), m.initial)];
    for len in 0..=max_len {
        let mut next_frontier = Vec::new();
        for (word, q) in frontier {
            result.insert(word.clone(), m.outputs[m.out[q]].clone());
            if len < max_len {
                for (i, &t) in m.next[q].iter().enumerate() {
                    let mut w = word.clone();
                    w.push(i);
                    next_frontier.push((w, t));
                }
            }
        }
        frontier = next_frontier;
    }
    result
}

/// Decides whether two machines over the same inputs produce the same
/// output on every word of length at most `max_len`, by exploring pairs of
/// states level by level instead of enumerating words.
pub fn behaviors_agree(a: &MooreMachine, b: &MooreMachine, max_len: usize) -> bool {
    if a.inputs != b.inputs {
        return false;
    }
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([((a.initial, b.initial), 0usize)]);
    seen.insert((a.initial, b.initial));
    while let Some(((p, q), len)) = queue.pop_front() {
        if a.outputs[a.out[p]] != b.outputs[b.out[q]] {
            return false;
        }
        if len == max_len {
            continue;
        }
        for i in 0..a.inputs.len() {
            let pair = (a.next[p][i], b.next[q][i]);
            // breadth-first, so the first visit is at the shortest length
            if seen.insert(pair) {
                queue.push_back((pair, len + 1));
            }
        }
    }
    true
}

/// The reachable and simple machine with the same behavior.
pub fn minimize_moore(m: &MooreMachine) -> MooreMachine {
    coalgebra_to_moore(&wp(&moore_to_coalgebra(m))).expect("wp preserves the functor")
}

impl fmt::Display for MooreMachine {
    /// Transition-table format:
    ///
    /// ```text
    /// inputs: a, b
    /// outputs: 0, 1
    /// states: 2
    /// initial: 0
    /// 0: 1 | 1 0
    /// 1: 0 | 0 1
    /// ```
    ///
    /// Each row is `state: output | successor per input`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inputs: {}", self.inputs.join(", "))?;
        writeln!(f, "outputs: {}", self.outputs.join(", "))?;
        writeln!(f, "states: {}", self.len())?;
        writeln!(f, "initial: {}", self.initial)?;
        for q in 0..self.len() {
            let row: Vec<String> = self.next[q].iter().map(ToString::to_string).collect();
            writeln!(f, "{q}: {} | {}", self.outputs[self.out[q]], row.join(" "))?;
        }
        Ok(())
    }
}

/// Parses the transition-table format written by `Display`.
pub fn parse_moore(src: &str) -> Result<MooreMachine> {
    let mut inputs = None;
    let mut outputs: Option<Vec<Symbol>> = None;
    let mut states = None;
    let mut initial = None;
    let mut rows: BTreeMap<usize, (usize, Vec<StateId>)> = BTreeMap::new();
    let mut offset = 0;
    for line in src.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let text = line.split('#').next().unwrap().trim();
        if text.is_empty() {
            continue;
        }
        let (key, value) = text
            .split_once(':')
            .ok_or_else(|| Error::parse(start, "expected 'key: value'"))?;
        let key = key.trim();
        let value = value.trim();
        let symbols = |v: &str| -> Vec<Symbol> {
            v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
        };
        let number = |v: &str| v.parse::<usize>().map_err(|_| Error::parse(start, format!("bad number '{v}'")));
        match key {
            "inputs" => inputs = Some(symbols(value)),
            "outputs" => outputs = Some(symbols(value)),
            "states" => states = Some(number(value)?),
            "initial" => initial = Some(number(value)?),
            k => {
                let q = number(k)?;
                let outs = outputs.as_ref().ok_or_else(|| Error::parse(start, "'outputs' must precede rows"))?;
                let (o, succ) = value
                    .split_once('|')
                    .ok_or_else(|| Error::parse(start, "expected 'output | successors'"))?;
                let o = o.trim();
                let o = outs
                    .iter()
                    .position(|s| s == o)
                    .ok_or_else(|| Error::parse(start, format!("unknown output '{o}'")))?;
                let succ = succ.split_whitespace().map(number).collect::<Result<Vec<_>>>()?;
                if rows.insert(q, (o, succ)).is_some() {
                    return Err(Error::parse(start, format!("duplicate row for state {q}")));
                }
            }
        }
    }
    let missing = |k: &str| Error::parse(src.len(), format!("missing '{k}' header"));
    let inputs = inputs.ok_or_else(|| missing("inputs"))?;
    let outputs = outputs.ok_or_else(|| missing("outputs"))?;
    let n = states.unwrap_or(rows.len());
    if rows.len() != n || rows.keys().enumerate().any(|(i, &q)| i != q) {
        return Err(Error::parse(src.len(), format!("expected rows for states 0..{n}")));
    }
    let (out, next) = rows.into_values().unzip();
    MooreMachine::new(inputs, outputs, next, out, initial.unwrap_or(0))
}
