use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::FunctorExpr;

pub type StateId = usize;

/// An element of `H(X)`, with leaves of type `L` standing for elements of `X`.
///
/// The derived ordering is the canonical term order: constructors compare
/// in declaration order (`Const < State < Pair < Inj < Tab < Set`), then
/// by their fields lexicographically. `Const` holds the position of the
/// symbol in its constant's declared order and `Tab` holds its entries in
/// index order, so no functor is needed to compare terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term<L = StateId> {
    Const(usize),
    State(L),
    Pair(Box<Term<L>>, Box<Term<L>>),
    Inj(usize, Box<Term<L>>),
    Tab(Vec<Term<L>>),
    /// Sorted and duplicate-free once canonicalized.
    Set(Vec<Term<L>>),
}

impl<L> Term<L> {
    pub fn pair(a: Term<L>, b: Term<L>) -> Self {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn inj(tag: usize, t: Term<L>) -> Self {
        Term::Inj(tag, Box::new(t))
    }

    /// Leaves in left-to-right occurrence order.
    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a L>) {
        match self {
            Term::Const(_) => {}
            Term::State(l) => out.push(l),
            Term::Pair(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            Term::Inj(_, t) => t.collect_leaves(out),
            Term::Tab(ts) | Term::Set(ts) => ts.iter().for_each(|t| t.collect_leaves(out)),
        }
    }

    /// Relabels leaves without touching set order. The result is not
    /// canonical in general; see [`Term::map`].
    pub fn map_raw<M>(&self, f: &mut impl FnMut(&L) -> M) -> Term<M> {
        match self {
            Term::Const(c) => Term::Const(*c),
            Term::State(l) => Term::State(f(l)),
            Term::Pair(a, b) => Term::pair(a.map_raw(f), b.map_raw(f)),
            Term::Inj(k, t) => Term::inj(*k, t.map_raw(f)),
            Term::Tab(ts) => Term::Tab(ts.iter().map(|t| t.map_raw(f)).collect()),
            Term::Set(ts) => Term::Set(ts.iter().map(|t| t.map_raw(f)).collect()),
        }
    }

    /// The action of `H` on the leaf map `f`: relabel leaves, then re-sort
    /// and de-duplicate every set. Non-injective maps may shrink sets.
    pub fn map<M: Ord>(&self, mut f: impl FnMut(&L) -> M) -> Term<M> {
        self.map_raw(&mut f).canonicalize()
    }
}

impl<L: Ord> Term<L> {
    /// Recursively sorts and de-duplicates every set.
    pub fn canonicalize(self) -> Self {
        match self {
            Term::Pair(a, b) => Term::pair(a.canonicalize(), b.canonicalize()),
            Term::Inj(k, t) => Term::inj(k, t.canonicalize()),
            Term::Tab(ts) => Term::Tab(ts.into_iter().map(Term::canonicalize).collect()),
            Term::Set(ts) => {
                let mut ts: Vec<_> = ts.into_iter().map(Term::canonicalize).collect();
                ts.sort();
                ts.dedup();
                Term::Set(ts)
            }
            t => t,
        }
    }

    pub fn is_canonical(&self) -> bool {
        match self {
            Term::Const(_) | Term::State(_) => true,
            Term::Pair(a, b) => a.is_canonical() && b.is_canonical(),
            Term::Inj(_, t) => t.is_canonical(),
            Term::Tab(ts) => ts.iter().all(Term::is_canonical),
            Term::Set(ts) => ts.windows(2).all(|w| w[0] < w[1]) && ts.iter().all(Term::is_canonical),
        }
    }
}

impl<L: Ord + Clone> Term<L> {
    /// The least set of leaves `M` with `t ∈ H(M)`.
    pub fn support(&self) -> BTreeSet<L> {
        self.leaves().into_iter().cloned().collect()
    }
}

/// `H(f)` on a term over a carrier of size `n_target`; `f[x]` is the image
/// of state `x`.
pub fn map_term(t: &Term, f: &[StateId], n_target: usize) -> Result<Term> {
    for &x in t.leaves() {
        let y = *f.get(x).ok_or(Error::IndexOutOfRange { index: x, size: f.len() })?;
        if y >= n_target {
            return Err(Error::IndexOutOfRange { index: y, size: n_target });
        }
    }
    Ok(t.map(|&x| f[x]))
}

impl FunctorExpr {
    /// Checks that `t` is an element of `H(X)` where `leaf_ok` decides
    /// membership in `X`. Set order is not checked.
    pub fn check_term_with<L>(&self, t: &Term<L>, leaf_ok: &mut impl FnMut(&L) -> Result<()>) -> Result<()> {
        let mismatch = || Error::Type(format!("term does not inhabit {self}"));
        match (self, t) {
            (FunctorExpr::Id, Term::State(l)) => leaf_ok(l),
            (FunctorExpr::Const(syms), Term::Const(c)) if *c < syms.len() => Ok(()),
            (FunctorExpr::Prod(fa, fb), Term::Pair(a, b)) => {
                fa.check_term_with(a, leaf_ok)?;
                fb.check_term_with(b, leaf_ok)
            }
            (FunctorExpr::Coprod(summands), Term::Inj(k, inner)) => match summands.get(*k) {
                Some(s) => s.check_term_with(inner, leaf_ok),
                None => Err(Error::Type(format!("injection tag {k} out of range for {self}"))),
            },
            (FunctorExpr::Exp(base, index), Term::Tab(entries)) if entries.len() == index.len() => {
                entries.iter().try_for_each(|e| base.check_term_with(e, leaf_ok))
            }
            (FunctorExpr::Pow(inner), Term::Set(elems)) => {
                elems.iter().try_for_each(|e| inner.check_term_with(e, leaf_ok))
            }
            _ => Err(mismatch()),
        }
    }

    /// Checks that `t` is a canonical element of `H({0..n})`.
    pub fn check_term(&self, t: &Term, n: usize) -> Result<()> {
        self.check_term_with(t, &mut |&x| {
            if x < n {
                Ok(())
            } else {
                Err(Error::IndexOutOfRange { index: x, size: n })
            }
        })?;
        if !t.is_canonical() {
            return Err(Error::Type("set elements are not sorted and duplicate-free".into()));
        }
        Ok(())
    }

    /// `|H(n)|` computed compositionally; `None` on overflow.
    pub fn cardinality(&self, n: usize) -> Option<u128> {
        match self {
            FunctorExpr::Id => Some(n as u128),
            FunctorExpr::Const(syms) => Some(syms.len() as u128),
            FunctorExpr::Prod(a, b) => a.cardinality(n)?.checked_mul(b.cardinality(n)?),
            FunctorExpr::Coprod(s) => s.iter().try_fold(0u128, |acc, f| acc.checked_add(f.cardinality(n)?)),
            FunctorExpr::Exp(base, index) => base.cardinality(n)?.checked_pow(u32::try_from(index.len()).ok()?),
            FunctorExpr::Pow(inner) => {
                let k = inner.cardinality(n)?;
                if k >= 127 {
                    None
                } else {
                    Some(1u128 << k)
                }
            }
        }
    }

    pub fn is_inhabited(&self, n: usize) -> bool {
        match self {
            FunctorExpr::Id => n > 0,
            FunctorExpr::Const(syms) => !syms.is_empty(),
            FunctorExpr::Prod(a, b) => a.is_inhabited(n) && b.is_inhabited(n),
            FunctorExpr::Coprod(s) => s.iter().any(|f| f.is_inhabited(n)),
            FunctorExpr::Exp(base, _) => base.is_inhabited(n),
            FunctorExpr::Pow(_) => true,
        }
    }

    /// All elements of `H({0..n})` in canonical term order.
    ///
    /// The caller is responsible for checking [`FunctorExpr::cardinality`]
    /// first; the list is materialized in full.
    pub fn elements(&self, n: usize) -> Vec<Term> {
        let mut out = self.elements_unsorted(n);
        out.sort();
        out
    }

    fn elements_unsorted(&self, n: usize) -> Vec<Term> {
        match self {
            FunctorExpr::Id => (0..n).map(Term::State).collect(),
            FunctorExpr::Const(syms) => (0..syms.len()).map(Term::Const).collect(),
            FunctorExpr::Prod(a, b) => {
                let left = a.elements_unsorted(n);
                let right = b.elements_unsorted(n);
                let mut out = Vec::with_capacity(left.len() * right.len());
                for l in &left {
                    for r in &right {
                        out.push(Term::pair(l.clone(), r.clone()));
                    }
                }
                out
            }
            FunctorExpr::Coprod(s) => s
                .iter()
                .enumerate()
                .flat_map(|(k, f)| f.elements_unsorted(n).into_iter().map(move |t| Term::inj(k, t)))
                .collect(),
            FunctorExpr::Exp(base, index) => {
                let values = base.elements_unsorted(n);
                let mut out: Vec<Vec<Term>> = vec![Vec::new()];
                for _ in index {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            values.iter().map(move |v| {
                                let mut row = prefix.clone();
                                row.push(v.clone());
                                row
                            })
                        })
                        .collect();
                }
                out.into_iter().map(Term::Tab).collect()
            }
            FunctorExpr::Pow(inner) => {
                let values = inner.elements(n);
                assert!(values.len() < 64, "powerset too large to enumerate");
                (0u64..1 << values.len())
                    .map(|mask| {
                        Term::Set(
                            values
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| mask >> i & 1 == 1)
                                .map(|(_, v)| v.clone())
                                .collect(),
                        )
                    })
                    .collect()
            }
        }
    }
}
