//! Canonical forms of well-pointed coalgebras and the rational fixed point.
//!
//! A well-pointed coalgebra is simple and reachable from its point. Since
//! all its states are behaviorally distinct, iterated signature codes order
//! them totally, and a breadth-first walk from the point in code order
//! yields a numbering that depends only on the isomorphism class. The text
//! of the renumbered coalgebra is its digest.
//!
//! Finite well-pointed coalgebras up to isomorphism form the rational fixed
//! point; the well-founded ones form the initial algebra. Each element
//! carries the structure `ψ*(A, a, x) = H(a⁺)(a(x))` where `a⁺` sends a
//! state to its own well-pointed modification.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::coalgebra::{reachable_part, reachable_states, simple_quotient, Coalgebra, PointedCoalgebra};
use crate::error::{Error, Result, Witness};
use crate::functor::{FunctorExpr, StateId, Term};
use crate::wellfounded::well_founded_part;

/// A well-pointed coalgebra in canonical numbering (point = 0) and its digest.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub coalgebra: PointedCoalgebra,
    digest: String,
}

impl CanonicalForm {
    pub fn digest(&self) -> &str {
        &self.digest
    }
}

impl PartialEq for CanonicalForm {
    fn eq(&self, other: &Self) -> bool {
        self.digest == other.digest
    }
}

impl Eq for CanonicalForm {}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digest)
    }
}

/// One-line text of `(functor, n, structure)`: `F | n | t0; t1; ...`.
pub fn digest_of(c: &Coalgebra) -> String {
    let f = c.functor();
    let terms: Vec<String> = c.structure().iter().map(|t| f.render(t)).collect();
    format!("{f} | {} | {}", c.len(), terms.join("; "))
}

/// Iterated behavioral codes: states get equal codes iff they are
/// behaviorally equivalent. Codes are numbered by the sorted order of their
/// signatures, so they do not depend on the input numbering.
pub fn behavior_codes(c: &Coalgebra) -> Vec<u32> {
    let n = c.len();
    let mut code = vec![0u32; n];
    let mut classes = usize::from(n > 0);
    loop {
        let sigs: Vec<(u32, Term<u32>)> = (0..n).map(|x| (code[x], c.step(x).map(|&y| code[y]))).collect();
        let mut distinct: Vec<&(u32, Term<u32>)> = sigs.iter().collect();
        distinct.sort();
        distinct.dedup();
        let next: Vec<u32> = sigs
            .iter()
            .map(|s| distinct.binary_search(&s).expect("signature present") as u32)
            .collect();
        code = next;
        if distinct.len() == classes {
            return code;
        }
        classes = distinct.len();
    }
}

/// `perm[old] = new` for the canonical numbering of a well-pointed coalgebra.
fn canonical_numbering(pc: &PointedCoalgebra) -> Result<Vec<StateId>> {
    let c = &pc.base;
    let reachable = reachable_states(c, &[pc.point]);
    if reachable.len() < c.len() {
        let mut reachable = reachable;
        reachable.sort_unstable();
        return Err(Error::NotWellPointed(Witness::Unreachable { reachable }));
    }
    let code = behavior_codes(c);
    let mut by_code: HashMap<u32, StateId> = HashMap::new();
    for (x, &k) in code.iter().enumerate() {
        if let Some(&y) = by_code.get(&k) {
            return Err(Error::NotWellPointed(Witness::Mergeable(y, x)));
        }
        by_code.insert(k, x);
    }

    let mut perm = vec![usize::MAX; c.len()];
    let mut next = 0;
    let mut queue = VecDeque::from([pc.point]);
    perm[pc.point] = 0;
    next += 1;
    while let Some(x) = queue.pop_front() {
        let mut succ: Vec<StateId> = c.step(x).support().into_iter().collect();
        succ.sort_by_key(|&y| code[y]);
        for y in succ {
            if perm[y] == usize::MAX {
                perm[y] = next;
                next += 1;
                queue.push_back(y);
            }
        }
    }
    Ok(perm)
}

/// Canonical numbering and digest of a well-pointed coalgebra.
pub fn canonical_form(pc: &PointedCoalgebra) -> Result<CanonicalForm> {
    let perm = canonical_numbering(pc)?;
    let base = pc.base.permute(&perm);
    let digest = digest_of(&base);
    Ok(CanonicalForm { coalgebra: PointedCoalgebra { base, point: 0 }, digest })
}

pub fn is_isomorphic(a: &PointedCoalgebra, b: &PointedCoalgebra) -> Result<bool> {
    Ok(canonical_form(a)? == canonical_form(b)?)
}

/// The unique isomorphism `a → b` (as `map[state of a] = state of b`), if any.
pub fn isomorphism(a: &PointedCoalgebra, b: &PointedCoalgebra) -> Result<Option<Vec<StateId>>> {
    if !is_isomorphic(a, b)? {
        return Ok(None);
    }
    let pa = canonical_numbering(a)?;
    let pb = canonical_numbering(b)?;
    let mut inv_b = vec![0; pb.len()];
    for (x, &k) in pb.iter().enumerate() {
        inv_b[k] = x;
    }
    Ok(Some(pa.iter().map(|&k| inv_b[k]).collect()))
}

/// An element of the rational fixed point.
#[derive(Debug, Clone)]
pub struct RhoElement {
    pub form: CanonicalForm,
    pub size: usize,
    pub well_founded: bool,
}

impl RhoElement {
    /// Wraps a well-pointed coalgebra.
    pub fn new(pc: &PointedCoalgebra) -> Result<Self> {
        Ok(Self::from_form(canonical_form(pc)?))
    }

    fn from_form(form: CanonicalForm) -> Self {
        let size = form.coalgebra.len();
        let well_founded = well_founded_part(&form.coalgebra.base).is_well_founded;
        RhoElement { form, size, well_founded }
    }

    pub fn digest(&self) -> &str {
        self.form.digest()
    }

    pub fn coalgebra(&self) -> &PointedCoalgebra {
        &self.form.coalgebra
    }

    pub fn functor(&self) -> &FunctorExpr {
        self.form.coalgebra.functor()
    }
}

impl PartialEq for RhoElement {
    fn eq(&self, other: &Self) -> bool {
        self.digest() == other.digest()
    }
}

impl Eq for RhoElement {}

impl PartialOrd for RhoElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RhoElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.digest().cmp(other.digest())
    }
}

impl fmt::Display for RhoElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.digest())
    }
}

/// `a⁺(x) = wp(c, x)` for every state.
pub fn a_plus(c: &Coalgebra) -> Vec<RhoElement> {
    let q = simple_quotient(c);
    let per_block: Vec<RhoElement> = (0..q.coalgebra.len())
        .map(|b| {
            let pc = PointedCoalgebra { base: q.coalgebra.clone(), point: b };
            let reach = reachable_part(&pc);
            RhoElement::new(&reach.coalgebra).expect("reachable part of a simple coalgebra is well-pointed")
        })
        .collect();
    (0..c.len()).map(|x| per_block[q.partition.block_of(x)].clone()).collect()
}

/// `ψ*(r)`: the point's structure term with each successor replaced by the
/// digest of its own well-pointed modification.
pub fn rho_structure(r: &RhoElement) -> Term<String> {
    let pc = r.coalgebra();
    let plus = a_plus(&pc.base);
    pc.base.step(pc.point).map(|&y| plus[y].digest().to_string())
}

/// Renders a digest-labelled term, each digest as `<...>`.
pub fn render_rho_term(f: &FunctorExpr, t: &Term<String>) -> String {
    f.render_with(t, &mut |d, out| {
        out.push('<');
        out.push_str(d);
        out.push('>');
    })
}

/// Membership in the initial algebra.
pub fn in_mu(r: &RhoElement) -> bool {
    r.well_founded
}

/// Default bound on the number of raw structure maps [`enumerate_wp`] visits.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 20_000_000;

/// All well-pointed coalgebras with at most `max_states` states, up to
/// isomorphism, sorted by digest.
pub fn enumerate_wp(f: &FunctorExpr, max_states: usize, only_well_founded: bool) -> Result<Vec<RhoElement>> {
    enumerate_wp_with_limit(f, max_states, only_well_founded, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_wp_with_limit(
    f: &FunctorExpr,
    max_states: usize,
    only_well_founded: bool,
    limit: u128,
) -> Result<Vec<RhoElement>> {
    let mut total: u128 = 0;
    for n in 1..=max_states {
        let maps = f
            .cardinality(n)
            .and_then(|k| k.checked_pow(n as u32))
            .and_then(|m| total.checked_add(m));
        match maps {
            Some(t) if t <= limit => total = t,
            _ => {
                return Err(Error::ResourceLimit {
                    needed: maps.map_or_else(|| "too many".to_string(), |t| t.to_string()),
                    limit,
                })
            }
        }
    }

    let functor = Arc::new(f.clone());
    let mut found: BTreeMap<String, RhoElement> = BTreeMap::new();
    for n in 1..=max_states {
        let elems = f.elements(n);
        let k = elems.len() as u64;
        if k == 0 {
            continue;
        }
        let count = k.pow(n as u32);
        let batch: BTreeMap<String, RhoElement> = (0..count)
            .into_par_iter()
            .fold(BTreeMap::new, |mut acc, idx| {
                let mut rest = idx;
                let structure = (0..n)
                    .map(|_| {
                        let t = elems[(rest % k) as usize].clone();
                        rest /= k;
                        t
                    })
                    .collect();
                let c = Coalgebra::from_parts_unchecked(functor.clone(), structure);
                for r in a_plus(&c) {
                    if (!only_well_founded || r.well_founded) && !acc.contains_key(r.digest()) {
                        acc.insert(r.digest().to_string(), r);
                    }
                }
                acc
            })
            .reduce(BTreeMap::new, |mut a, b| {
                for (d, r) in b {
                    a.entry(d).or_insert(r);
                }
                a
            });
        for (d, r) in batch {
            found.entry(d).or_insert(r);
        }
    }
    Ok(found.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::{check_homomorphism, wp};
    use crate::functor::parse_functor;
    use crate::random::{random_coalgebra, random_pointed};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pointed(f: &str, terms: &[&str], point: StateId) -> PointedCoalgebra {
        let f = parse_functor(f).unwrap();
        let n = terms.len();
        let c = Coalgebra::new(f.clone(), terms.iter().map(|t| f.parse_term(t, n).unwrap()).collect()).unwrap();
        PointedCoalgebra::new(c, point).unwrap()
    }

    fn omega() -> PointedCoalgebra {
        pointed("P(Id)", &["{@0}"], 0)
    }

    #[test]
    fn omega_digest() {
        let form = canonical_form(&omega()).unwrap();
        assert_eq!(form.digest(), "P(Id) | 1 | {@0}");
    }

    #[test]
    fn permutations_share_a_digest() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for src in ["Id*Id+{leaf}", "Id^{a,b}*{0,1}", "P(Id)", "P({a,b}*Id)"] {
            let f = parse_functor(src).unwrap();
            for _ in 0..100 {
                let w = wp(&random_pointed(&f, 7, &mut rng));
                let mut perm: Vec<StateId> = (0..w.len()).collect();
                perm.shuffle(&mut rng);
                let moved = PointedCoalgebra::new(w.base.permute(&perm), perm[w.point]).unwrap();
                assert!(is_isomorphic(&w, &moved).unwrap());
                let iso = isomorphism(&w, &moved).unwrap().unwrap();
                assert_eq!(iso, perm);
                assert!(check_homomorphism(&w.base, &moved.base, &iso).unwrap());
            }
        }
    }

    #[test]
    fn four_state_binary_system() {
        // root -> (full tree, right spine); full -> (full, full); spine -> (leaf, spine)
        let pc = pointed(
            "Id*Id+{leaf}",
            &["inj 0 (@1, @2)", "inj 0 (@1, @1)", "inj 0 (@3, @2)", "inj 1 leaf"],
            0,
        );
        let form = canonical_form(&pc).unwrap();
        assert_eq!(form.coalgebra.len(), 4);
        assert!(!RhoElement::new(&pc).unwrap().well_founded);
    }

    #[test]
    fn two_cycle_collapses_to_omega() {
        let cycle = pointed("P(Id)", &["{@1}", "{@0}"], 0);
        assert!(matches!(canonical_form(&cycle), Err(Error::NotWellPointed(Witness::Mergeable(0, 1)))));
        assert!(is_isomorphic(&wp(&cycle), &omega()).unwrap());
        let deadlock = pointed("P(Id)", &["{}"], 0);
        assert!(!is_isomorphic(&omega(), &deadlock).unwrap());
    }

    #[test]
    fn unreachable_witness() {
        let pc = pointed("P(Id)", &["{}", "{@0}"], 0);
        assert_eq!(
            canonical_form(&pc).unwrap_err(),
            Error::NotWellPointed(Witness::Unreachable { reachable: vec![0] })
        );
    }

    #[test]
    fn a_plus_examples() {
        let pc = pointed("P(Id)", &["{}", "{@0}", "{@0, @1}"], 2);
        let plus = a_plus(&pc.base);
        assert_eq!(plus[2].form, canonical_form(&pc).unwrap());
        // simple coalgebra: a_plus injective
        let mut digests: Vec<&str> = plus.iter().map(RhoElement::digest).collect();
        digests.sort();
        digests.dedup();
        assert_eq!(digests.len(), 3);
    }

    #[test]
    fn rho_structure_examples() {
        let om = RhoElement::new(&omega()).unwrap();
        let t = rho_structure(&om);
        assert_eq!(t, Term::Set(vec![Term::State(om.digest().to_string())]));

        let stream = pointed("Id*{a,b}+{end}", &["inj 0 (@1, a)", "inj 0 (@2, b)", "inj 1 end"], 0);
        let r = RhoElement::new(&stream).unwrap();
        let tail = RhoElement::new(&pointed("Id*{a,b}+{end}", &["inj 0 (@1, b)", "inj 1 end"], 0)).unwrap();
        assert_eq!(
            rho_structure(&r),
            Term::inj(0, Term::pair(Term::State(tail.digest().to_string()), Term::Const(0)))
        );
        let empty = RhoElement::new(&pointed("Id*{a,b}+{end}", &["inj 1 end"], 0)).unwrap();
        assert_eq!(rho_structure(&empty), Term::inj(1, Term::Const(0)));
    }

    #[test]
    fn in_mu_examples() {
        assert!(!in_mu(&RhoElement::new(&omega()).unwrap()));
        let tree = pointed("Id*Id+{leaf}", &["inj 0 (@1, @1)", "inj 1 leaf"], 0);
        assert!(in_mu(&RhoElement::new(&tree).unwrap()));
        let lasso = pointed("Id*{a}+{end}", &["inj 0 (@0, a)"], 0);
        assert!(!in_mu(&RhoElement::new(&lasso).unwrap()));
    }

    #[test]
    fn enumerate_constants() {
        let one = parse_functor("{*}").unwrap();
        assert_eq!(enumerate_wp(&one, 3, false).unwrap().len(), 1);
        let two = parse_functor("{0,1}").unwrap();
        assert_eq!(enumerate_wp(&two, 3, false).unwrap().len(), 2);
    }

    #[test]
    fn enumeration_guard() {
        let f = parse_functor("P(Id)").unwrap();
        assert!(matches!(enumerate_wp_with_limit(&f, 4, false, 1000), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn mu_is_contained_in_rho() {
        for src in ["Id*Id+{leaf}", "P(Id)", "Id*{a,b}+{end}"] {
            let f = parse_functor(src).unwrap();
            let all = enumerate_wp(&f, 3, false).unwrap();
            let mu = enumerate_wp(&f, 3, true).unwrap();
            assert!(mu.iter().all(|r| r.well_founded && all.binary_search(r).is_ok()));
            assert!(all.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn finality_and_naturality_on_random_coalgebras() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for src in ["Id*Id+{leaf}", "Id^{a,b}*{0,1}", "P(Id)", "P({a,b}*Id)", "Id*{a,b}+{end}"] {
            let f = parse_functor(src).unwrap();
            for _ in 0..100 {
                let c = random_coalgebra(&f, rng.random_range(1..7), &mut rng);
                let plus = a_plus(&c);
                for x in 0..c.len() {
                    let expected = c.step(x).map(|&y| plus[y].digest().to_string());
                    assert_eq!(rho_structure(&plus[x]), expected);
                }
                let q = simple_quotient(&c);
                let qplus = a_plus(&q.coalgebra);
                for x in 0..c.len() {
                    assert_eq!(plus[x], qplus[q.partition.block_of(x)]);
                }
            }
        }
    }

    /// Exhaustive search for maps into the enumerated elements that satisfy
    /// the finality law; the only one is `a⁺`.
    #[test]
    fn a_plus_is_the_unique_coalgebra_map() {
        let f = parse_functor("Id*{a,b}+{end}").unwrap();
        let universe = enumerate_wp(&f, 3, false).unwrap();
        let psi: Vec<Term<String>> = universe.iter().map(rho_structure).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut checked = 0;
        while checked < 30 {
            let c = random_coalgebra(&f, rng.random_range(1..=3), &mut rng);
            if !simple_quotient(&c).partition.is_discrete() {
                continue;
            }
            let mut solutions = Vec::new();
            let mut assign = vec![0usize; c.len()];
            search(&c, &universe, &psi, 0, &mut assign, &mut solutions);
            let expected: Vec<String> = a_plus(&c).iter().map(|r| r.digest().to_string()).collect();
            assert_eq!(solutions, vec![expected]);
            checked += 1;
        }
    }

    fn search(
        c: &Coalgebra,
        universe: &[RhoElement],
        psi: &[Term<String>],
        x: usize,
        assign: &mut Vec<usize>,
        out: &mut Vec<Vec<String>>,
    ) {
        if x == c.len() {
            let ok = (0..c.len())
                .all(|z| psi[assign[z]] == c.step(z).map(|&y| universe[assign[y]].digest().to_string()));
            if ok {
                out.push(assign.iter().map(|&i| universe[i].digest().to_string()).collect());
            }
            return;
        }
        for i in 0..universe.len() {
            assign[x] = i;
            search(c, universe, psi, x + 1, assign, out);
        }
    }
}
