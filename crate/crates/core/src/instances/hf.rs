use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::coalgebra::{Coalgebra, PointedCoalgebra};
use crate::error::{Error, Result};
use crate::functor::{FunctorExpr, Term};
use crate::wellfounded::{fold, DecorationAlgebra};

/// A hereditarily finite set. Members are kept sorted and distinct, so the
/// derived equality is extensional equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HfSet(Vec<HfSet>);

impl HfSet {
    pub fn empty() -> Self {
        HfSet(Vec::new())
    }

    pub fn from_members(members: impl IntoIterator<Item = HfSet>) -> Self {
        let mut v: Vec<HfSet> = members.into_iter().collect();
        v.sort();
        v.dedup();
        HfSet(v)
    }

    pub fn members(&self) -> &[HfSet] {
        &self.0
    }

    pub fn contains(&self, s: &HfSet) -> bool {
        self.0.binary_search(s).is_ok()
    }

    /// `0 = ∅`, `n + 1 = n ∪ {n}`.
    pub fn von_neumann(n: usize) -> Self {
        let mut members = Vec::with_capacity(n);
        for _ in 0..n {
            let next = HfSet(members.clone());
            members.push(next);
        }
        HfSet(members)
    }

    /// Number of distinct sets in the transitive closure of `{self}`.
    pub fn closure_size(&self) -> usize {
        let mut seen = std::collections::BTreeSet::new();
        let mut stack = vec![self];
        while let Some(s) = stack.pop() {
            if seen.insert(s) {
                stack.extend(s.0.iter());
            }
        }
        seen.len()
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for HfSet {
    type Err = Error;

    /// Braces and commas; whitespace is ignored.
    fn from_str(src: &str) -> Result<Self> {
        let bytes = src.as_bytes();
        let mut pos = 0;
        let skip = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
        };

        fn set(bytes: &[u8], pos: &mut usize, skip: &dyn Fn(&mut usize)) -> Result<HfSet> {
            skip(pos);
            if bytes.get(*pos) != Some(&b'{') {
                return Err(Error::parse(*pos, "expected '{'"));
            }
            *pos += 1;
            skip(pos);
            let mut members = Vec::new();
            if bytes.get(*pos) == Some(&b'}') {
                *pos += 1;
                return Ok(HfSet::empty());
            }
            loop {
                members.push(set(bytes, pos, skip)?);
                skip(pos);
                match bytes.get(*pos) {
                    Some(b',') => *pos += 1,
                    Some(b'}') => {
                        *pos += 1;
                        return Ok(HfSet::from_members(members));
                    }
                    _ => return Err(Error::parse(*pos, "expected ',' or '}'")),
                }
            }
        }

        let s = set(bytes, &mut pos, &skip)?;
        skip(&mut pos);
        if pos != bytes.len() {
            return Err(Error::parse(pos, "trailing input"));
        }
        Ok(s)
    }
}

/// The canonical picture: one state per set in the transitive closure,
/// `y ∈ α(x)` iff `y` is a member of `x`, the set itself at state 0.
/// States are numbered in breadth-first order, members visited in order.
pub fn canonical_picture(s: &HfSet) -> PointedCoalgebra {
    let mut index: BTreeMap<&HfSet, usize> = BTreeMap::new();
    let mut order = vec![s];
    let mut queue = VecDeque::from([s]);
    index.insert(s, 0);
    while let Some(x) = queue.pop_front() {
        for m in &x.0 {
            if !index.contains_key(m) {
                index.insert(m, order.len());
                order.push(m);
                queue.push_back(m);
            }
        }
    }
    let structure = order
        .iter()
        .map(|x| Term::Set(x.0.iter().map(|m| Term::State(index[m])).collect()))
        .collect();
    let c = Coalgebra::new(FunctorExpr::pow(FunctorExpr::Id), structure).expect("well-typed by construction");
    PointedCoalgebra::new(c, 0).expect("point in range")
}

/// The decoration of the point, for a well-founded `P(Id)` coalgebra.
pub fn mostowski_collapse(pc: &PointedCoalgebra) -> Result<HfSet> {
    let expected = FunctorExpr::pow(FunctorExpr::Id);
    if *pc.functor() != expected {
        return Err(Error::FunctorMismatch { expected: expected.to_string(), found: pc.functor().to_string() });
    }
    let values = fold(&pc.base, &DecorationAlgebra)?;
    Ok(values[pc.point].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::wp;
    use crate::rational::in_mu;
    use crate::rational::RhoElement;

    #[test]
    fn numerals_print_compactly() {
        assert_eq!(HfSet::von_neumann(0).to_string(), "{}");
        assert_eq!(HfSet::von_neumann(1).to_string(), "{{}}");
        assert_eq!(HfSet::von_neumann(3).to_string(), "{{},{{}},{{},{{}}}}");
    }

    #[test]
    fn parse_is_extensional() {
        let a: HfSet = "{ {}, {{}}, {} }".parse().unwrap();
        assert_eq!(a, HfSet::von_neumann(2));
        assert!("{".parse::<HfSet>().is_err());
        assert!("{}}".parse::<HfSet>().is_err());
        assert!("{a}".parse::<HfSet>().is_err());
    }

    #[test]
    fn picture_sizes() {
        for (n, vertices, edges) in [(0, 1, 0), (1, 2, 1), (2, 3, 3), (3, 4, 6)] {
            let pc = canonical_picture(&HfSet::von_neumann(n));
            assert_eq!(pc.len(), vertices);
            let e: usize = pc.base.structure().iter().map(|t| t.leaves().len()).sum();
            assert_eq!(e, edges);
        }
    }

    #[test]
    fn collapse_inverts_picture() {
        for n in 0..6 {
            let s = HfSet::von_neumann(n);
            assert_eq!(mostowski_collapse(&canonical_picture(&s)).unwrap(), s);
        }
        let odd: HfSet = "{{{{}}},{}}".parse().unwrap();
        assert_eq!(mostowski_collapse(&canonical_picture(&odd)).unwrap(), odd);
    }

    #[test]
    fn picture_is_well_pointed_and_well_founded() {
        let pc = canonical_picture(&HfSet::von_neumann(4));
        let r = RhoElement::new(&pc).unwrap();
        assert!(in_mu(&r));
        assert_eq!(wp(&pc).len(), pc.len());
    }

    #[test]
    fn collapse_rejects_cycles_and_other_functors() {
        let omega = Coalgebra::new(FunctorExpr::pow(FunctorExpr::Id), vec![Term::Set(vec![Term::State(0)])]).unwrap();
        let pc = PointedCoalgebra::new(omega, 0).unwrap();
        assert!(matches!(mostowski_collapse(&pc), Err(Error::NotWellFounded { .. })));
        let c = Coalgebra::new(FunctorExpr::Id, vec![Term::State(0)]).unwrap();
        let pc = PointedCoalgebra::new(c, 0).unwrap();
        assert!(matches!(mostowski_collapse(&pc), Err(Error::FunctorMismatch { .. })));
    }

    #[test]
    fn closure_size_counts_distinct_sets() {
        assert_eq!(HfSet::von_neumann(3).closure_size(), 4);
    }
}
