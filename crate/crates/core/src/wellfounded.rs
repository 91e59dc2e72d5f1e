//! Well-founded parts and recursion.
//!
//! The next-time operator sends a set of states `S` to the states all of
//! whose successors lie in `S`. Iterating it from the empty set reaches its
//! least fixpoint, the well-founded part, after at most `n` rounds. A
//! coalgebra whose well-founded part is everything admits a unique
//! coalgebra-to-algebra homomorphism into every algebra; [`fold`] computes
//! it in rank order.

use std::collections::BTreeSet;

use crate::coalgebra::Coalgebra;
use crate::error::{Error, Result};
use crate::functor::{FunctorExpr, StateId, Term};
use crate::instances::HfSet;

/// `{ x | support(α(x)) ⊆ s }`.
pub fn next_time(c: &Coalgebra, s: &BTreeSet<StateId>) -> BTreeSet<StateId> {
    (0..c.len())
        .filter(|&x| c.step(x).leaves().into_iter().all(|y| s.contains(y)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfReport {
    /// The least fixpoint of [`next_time`].
    pub part: BTreeSet<StateId>,
    /// Round in which each state of `part` entered; `None` outside it.
    pub rank: Vec<Option<usize>>,
    /// Number of rounds that added states.
    pub rounds: usize,
    pub is_well_founded: bool,
}

impl WfReport {
    /// The well-founded part as a subcoalgebra, states in ascending order.
    pub fn coreflection(&self, c: &Coalgebra) -> (Coalgebra, Vec<StateId>) {
        let states: Vec<StateId> = self.part.iter().copied().collect();
        let sub = c.restrict(&states).expect("the well-founded part is a subcoalgebra");
        (sub, states)
    }

    /// States of the part sorted by rank, ties by index.
    pub fn rank_order(&self) -> Vec<StateId> {
        let mut order: Vec<StateId> = self.part.iter().copied().collect();
        order.sort_by_key(|&x| (self.rank[x], x));
        order
    }
}

pub fn well_founded_part(c: &Coalgebra) -> WfReport {
    let n = c.len();
    let mut rank = vec![None; n];
    let mut part = BTreeSet::new();
    let mut rounds = 0;
    loop {
        let next = next_time(c, &part);
        if next.len() == part.len() {
            break;
        }
        for &x in next.difference(&part) {
            rank[x] = Some(rounds);
        }
        part = next;
        rounds += 1;
    }
    let is_well_founded = part.len() == n;
    WfReport { part, rank, rounds, is_well_founded }
}

/// An algebra `β: H(B) → B` for the functor of the coalgebras it is folded over.
pub trait Algebra {
    type Value: Clone + Ord;

    /// `β` applied to a term whose leaves are already values.
    fn eval(&self, t: &Term<Self::Value>) -> Self::Value;
}

/// The unique coalgebra-to-algebra homomorphism, computed in rank order.
pub fn fold<A: Algebra>(c: &Coalgebra, alg: &A) -> Result<Vec<A::Value>> {
    let report = well_founded_part(c);
    if let Some(x) = (0..c.len()).find(|x| !report.part.contains(x)) {
        return Err(Error::NotWellFounded { state: x });
    }
    let mut values: Vec<Option<A::Value>> = vec![None; c.len()];
    for x in report.rank_order() {
        let t = c.step(x).map(|&y| values[y].clone().expect("successors have smaller rank"));
        values[x] = Some(alg.eval(&t));
    }
    Ok(values.into_iter().map(Option::unwrap).collect())
}

/// The same homomorphism by demand-driven memoized recursion.
pub fn fold_on_demand<A: Algebra>(c: &Coalgebra, alg: &A) -> Result<Vec<A::Value>> {
    #[derive(Clone)]
    enum Slot<V> {
        Todo,
        Active,
        Done(V),
    }

    fn visit<A: Algebra>(c: &Coalgebra, alg: &A, x: StateId, memo: &mut [Slot<A::Value>]) -> Result<A::Value> {
        match &memo[x] {
            Slot::Done(v) => return Ok(v.clone()),
            Slot::Active => return Err(Error::NotWellFounded { state: x }),
            Slot::Todo => {}
        }
        memo[x] = Slot::Active;
        let mut mapped = Vec::new();
        for &y in c.step(x).leaves() {
            mapped.push((y, visit(c, alg, y, memo)?));
        }
        let t = c.step(x).map(|y| mapped.iter().find(|(z, _)| z == y).unwrap().1.clone());
        let v = alg.eval(&t);
        memo[x] = Slot::Done(v.clone());
        Ok(v)
    }

    let mut memo = vec![Slot::Todo; c.len()];
    (0..c.len()).map(|x| visit(c, alg, x, &mut memo)).collect()
}

/// Checks `h = β ∘ H(h) ∘ α` pointwise.
pub fn is_algebra_homomorphism<A: Algebra>(c: &Coalgebra, alg: &A, h: &[A::Value]) -> bool {
    h.len() == c.len() && (0..c.len()).all(|x| alg.eval(&c.step(x).map(|&y| h[y].clone())) == h[x])
}

/// Node count of the tree expansion for functors without a powerset. Under
/// a powerset the algebra receives a set of child sizes, so children of
/// equal size count once.
#[derive(Debug, Clone, Copy, Default)]
pub struct SizeAlgebra;

impl Algebra for SizeAlgebra {
    type Value = u64;

    fn eval(&self, t: &Term<u64>) -> u64 {
        1 + t.leaves().into_iter().sum::<u64>()
    }
}

/// Height of the tree expansion; 0 for states without successors.
#[derive(Debug, Clone, Copy, Default)]
pub struct DepthAlgebra;

impl Algebra for DepthAlgebra {
    type Value = u64;

    fn eval(&self, t: &Term<u64>) -> u64 {
        t.leaves().into_iter().max().map_or(0, |d| d + 1)
    }
}

/// Folds into the term algebra: the value of a state is the text of its
/// fully expanded term.
#[derive(Debug, Clone)]
pub struct ExpansionAlgebra {
    pub functor: FunctorExpr,
}

impl Algebra for ExpansionAlgebra {
    type Value = String;

    fn eval(&self, t: &Term<String>) -> String {
        self.functor.render_with(t, &mut |s, out| out.push_str(s))
    }
}

/// The three-valued algebra on `P(B)` with `B = {0, 1, 2}`: `0` for the
/// empty set and `{0}`, `1` if `1` occurs, `2` otherwise. Every coalgebra
/// for `P(Id)` that is not well-founded admits two distinct
/// coalgebra-to-algebra homomorphisms into it.
#[derive(Debug, Clone, Copy, Default)]
pub struct DetectorAlgebra;

impl Algebra for DetectorAlgebra {
    type Value = u8;

    fn eval(&self, t: &Term<u8>) -> u8 {
        let Term::Set(elems) = t else {
            panic!("the detector algebra is defined on P(Id) only")
        };
        let has = |v: u8| elems.contains(&Term::State(v));
        if has(1) {
            1
        } else if has(2) {
            2
        } else {
            0
        }
    }
}

impl DetectorAlgebra {
    /// `0` on the well-founded part, `marker` (1 or 2) elsewhere.
    pub fn homomorphism(report: &WfReport, n: usize, marker: u8) -> Vec<u8> {
        (0..n).map(|x| if report.part.contains(&x) { 0 } else { marker }).collect()
    }
}

/// Decoration of a `P(Id)` coalgebra: `d(x) = { d(y) | y ∈ α(x) }`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DecorationAlgebra;

impl Algebra for DecorationAlgebra {
    type Value = HfSet;

    fn eval(&self, t: &Term<HfSet>) -> HfSet {
        let Term::Set(elems) = t else {
            panic!("decorations are defined on P(Id) only")
        };
        HfSet::from_members(elems.iter().map(|e| match e {
            Term::State(s) => s.clone(),
            _ => panic!("decorations are defined on P(Id) only"),
        }))
    }
}
