//! Finite coalgebras and the well-pointed pipeline: reachable part, simple
//! quotient and their composite `wp`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functor::{FunctorExpr, StateId, Term};
use crate::rational;

/// A structure map `α: {0..n} → H{0..n}`, one canonical term per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coalgebra {
    functor: Arc<FunctorExpr>,
    structure: Vec<Term>,
}

impl Coalgebra {
    /// Canonicalizes and type-checks every term.
    pub fn new(functor: impl Into<Arc<FunctorExpr>>, structure: Vec<Term>) -> Result<Self> {
        let functor = functor.into();
        let n = structure.len();
        let structure: Vec<Term> = structure.into_iter().map(Term::canonicalize).collect();
        for (x, t) in structure.iter().enumerate() {
            functor
                .check_term(t, n)
                .map_err(|e| Error::Invalid(format!("state {x}: {e}")))?;
        }
        Ok(Coalgebra { functor, structure })
    }

    pub(crate) fn from_parts_unchecked(functor: Arc<FunctorExpr>, structure: Vec<Term>) -> Self {
        debug_assert!(structure.iter().all(|t| functor.check_term(t, structure.len()).is_ok()));
        Coalgebra { functor, structure }
    }

    pub fn functor(&self) -> &FunctorExpr {
        &self.functor
    }

    pub fn functor_arc(&self) -> &Arc<FunctorExpr> {
        &self.functor
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.structure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structure.is_empty()
    }

    pub fn structure(&self) -> &[Term] {
        &self.structure
    }

    /// `α(x)`.
    pub fn step(&self, x: StateId) -> &Term {
        &self.structure[x]
    }

    /// The subcoalgebra induced on `states`, renumbered in the given order.
    /// Fails if some successor of a listed state is missing.
    pub fn restrict(&self, states: &[StateId]) -> Result<Coalgebra> {
        let mut index = vec![usize::MAX; self.len()];
        for (i, &x) in states.iter().enumerate() {
            index[x] = i;
        }
        let mut structure = Vec::with_capacity(states.len());
        for &x in states {
            if let Some(&y) = self.structure[x].leaves().into_iter().find(|&&y| index[y] == usize::MAX) {
                return Err(Error::Invalid(format!("state {x} has successor {y} outside the subset")));
            }
            structure.push(self.structure[x].map(|&y| index[y]));
        }
        Ok(Coalgebra::from_parts_unchecked(self.functor.clone(), structure))
    }

    /// Renumbers states along the permutation `perm` (`perm[old] = new`).
    pub fn permute(&self, perm: &[StateId]) -> Coalgebra {
        let mut structure = vec![Term::Const(0); self.len()];
        for (x, t) in self.structure.iter().enumerate() {
            structure[perm[x]] = t.map(|&y| perm[y]);
        }
        Coalgebra::from_parts_unchecked(self.functor.clone(), structure)
    }

    /// The behavioral signature of `x` relative to `p`: `H(block)(α(x))`.
    pub fn signature(&self, x: StateId, p: &Partition) -> Term {
        self.structure[x].map(|&y| p.block_of(y))
    }
}

/// A coalgebra with a distinguished state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointedCoalgebra {
    pub base: Coalgebra,
    pub point: StateId,
}

impl PointedCoalgebra {
    pub fn new(base: Coalgebra, point: StateId) -> Result<Self> {
        if point >= base.len() {
            return Err(Error::IndexOutOfRange { index: point, size: base.len() });
        }
        Ok(PointedCoalgebra { base, point })
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn functor(&self) -> &FunctorExpr {
        self.base.functor()
    }
}

/// An equivalence on states, stored as a block index per state. Block
/// indices are numbered by first occurrence in state order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    block: Vec<usize>,
    blocks: usize,
}

impl Partition {
    pub fn single_block(n: usize) -> Self {
        Partition { block: vec![0; n], blocks: usize::from(n > 0) }
    }

    pub fn discrete(n: usize) -> Self {
        Partition { block: (0..n).collect(), blocks: n }
    }

    /// The kernel of an arbitrary labelling.
    pub fn from_labels<K: std::hash::Hash + Eq>(labels: impl IntoIterator<Item = K>) -> Self {
        let mut ids: HashMap<K, usize> = HashMap::new();
        let block: Vec<usize> = labels
            .into_iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k).or_insert(next)
            })
            .collect();
        Partition { block, blocks: ids.len() }
    }

    pub fn block_of(&self, x: StateId) -> usize {
        self.block[x]
    }

    /// The quotient map, state to block.
    pub fn as_map(&self) -> &[usize] {
        &self.block
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    pub fn len(&self) -> usize {
        self.block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block.is_empty()
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks == self.block.len()
    }

    /// True if every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let mut image = vec![None; self.blocks];
        self.block.iter().zip(&coarser.block).all(|(&b, &c)| match image[b] {
            None => {
                image[b] = Some(c);
                true
            }
            Some(prev) => prev == c,
        })
    }

    /// States grouped by block.
    pub fn classes(&self) -> Vec<Vec<StateId>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (x, &b) in self.block.iter().enumerate() {
            out[b].push(x);
        }
        out
    }
}

/// Checks `H(h) ∘ α = β ∘ h`.
pub fn check_homomorphism(source: &Coalgebra, target: &Coalgebra, map: &[StateId]) -> Result<bool> {
    if source.functor() != target.functor() {
        return Err(Error::FunctorMismatch {
            expected: source.functor().to_string(),
            found: target.functor().to_string(),
        });
    }
    if map.len() != source.len() {
        return Err(Error::Invalid(format!(
            "map has {} entries for a source with {} states",
            map.len(),
            source.len()
        )));
    }
    if let Some(&y) = map.iter().find(|&&y| y >= target.len()) {
        return Err(Error::IndexOutOfRange { index: y, size: target.len() });
    }
    Ok((0..source.len()).all(|x| source.step(x).map(|&y| map[y]) == *target.step(map[x])))
}

/// Neighbors of each state: the support of its structure term.
pub fn canonical_graph(c: &Coalgebra) -> Vec<BTreeSet<StateId>> {
    c.structure().iter().map(Term::support).collect()
}

/// Breadth-first closure of `roots` in the canonical graph, neighbors in
/// ascending order. Returns states in discovery order.
pub fn reachable_states(c: &Coalgebra, roots: &[StateId]) -> Vec<StateId> {
    let mut seen = vec![false; c.len()];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for &r in roots {
        if !seen[r] {
            seen[r] = true;
            queue.push_back(r);
        }
    }
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for y in c.step(x).support() {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    order
}

/// The subcoalgebra generated by the point.
#[derive(Debug, Clone)]
pub struct Reachable {
    /// Renumbered in discovery order; the point is state 0.
    pub coalgebra: PointedCoalgebra,
    /// New state index to old state index.
    pub embedding: Vec<StateId>,
}

pub fn reachable_part(pc: &PointedCoalgebra) -> Reachable {
    let order = reachable_states(&pc.base, &[pc.point]);
    let base = pc.base.restrict(&order).expect("reachable set is closed under successors");
    Reachable { coalgebra: PointedCoalgebra { base, point: 0 }, embedding: order }
}

/// A quotient coalgebra together with the kernel of its quotient map.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub coalgebra: Coalgebra,
    /// `partition.as_map()` is the quotient homomorphism.
    pub partition: Partition,
}

/// Refines `start` by behavioral signatures until stable. The result is the
/// coarsest stable partition finer than `start`.
pub fn refine(c: &Coalgebra, start: Partition) -> Partition {
    let mut p = start;
    loop {
        let next = Partition::from_labels((0..c.len()).map(|x| (p.block_of(x), c.signature(x, &p))));
        if next.num_blocks() == p.num_blocks() {
            return next;
        }
        p = next;
    }
}

/// True if states in a common block always have equal signatures.
pub fn is_stable(c: &Coalgebra, p: &Partition) -> bool {
    let mut sig: Vec<Option<Term>> = vec![None; p.num_blocks()];
    (0..c.len()).all(|x| {
        let s = c.signature(x, p);
        match &sig[p.block_of(x)] {
            None => {
                sig[p.block_of(x)] = Some(s);
                true
            }
            Some(prev) => *prev == s,
        }
    })
}

/// The quotient coalgebra on the blocks of a stable partition.
pub fn quotient_by(c: &Coalgebra, p: &Partition) -> Result<Coalgebra> {
    let mut structure: Vec<Option<Term>> = vec![None; p.num_blocks()];
    for x in 0..c.len() {
        let s = c.signature(x, p);
        match &structure[p.block_of(x)] {
            None => structure[p.block_of(x)] = Some(s),
            Some(prev) if *prev == s => {}
            Some(_) => return Err(Error::Invalid(format!("partition is not stable at state {x}"))),
        }
    }
    Ok(Coalgebra::from_parts_unchecked(
        c.functor_arc().clone(),
        structure.into_iter().map(Option::unwrap).collect(),
    ))
}

/// The unique simple quotient, via signature refinement from one block.
pub fn simple_quotient(c: &Coalgebra) -> Quotient {
    let partition = refine(c, Partition::single_block(c.len()));
    let coalgebra = quotient_by(c, &partition).expect("refinement fixpoint is stable");
    Quotient { coalgebra, partition }
}

/// The well-pointed modification: simple quotient, then the part reachable
/// from the image of the point, in canonical numbering.
pub fn wp(pc: &PointedCoalgebra) -> PointedCoalgebra {
    let q = simple_quotient(&pc.base);
    let point = q.partition.block_of(pc.point);
    let reach = reachable_part(&PointedCoalgebra { base: q.coalgebra, point });
    canonical(&reach.coalgebra)
}

/// `wp` with the steps swapped: reachable part first, then the simple quotient.
pub fn wp_reachable_first(pc: &PointedCoalgebra) -> PointedCoalgebra {
    let reach = reachable_part(pc);
    let q = simple_quotient(&reach.coalgebra.base);
    let point = q.partition.block_of(reach.coalgebra.point);
    canonical(&PointedCoalgebra { base: q.coalgebra, point })
}

fn canonical(pc: &PointedCoalgebra) -> PointedCoalgebra {
    rational::canonical_form(pc)
        .expect("simple and reachable coalgebras are well-pointed")
        .coalgebra
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functor::parse_functor;
    use crate::random::{random_coalgebra, random_pointed};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coalg(f: &str, terms: &[&str]) -> Coalgebra {
        let f = parse_functor(f).unwrap();
        let n = terms.len();
        let structure = terms.iter().map(|t| f.parse_term(t, n).unwrap()).collect();
        Coalgebra::new(f, structure).unwrap()
    }

    #[test]
    fn identity_is_homomorphism() {
        let c = coalg("P(Id)", &["{@1}", "{}", "{@0, @1}"]);
        assert!(check_homomorphism(&c, &c, &[0, 1, 2]).unwrap());
    }

    #[test]
    fn deadlock_cannot_map_to_live_state() {
        let c = coalg("Id*{a}+{end}", &["inj 0 (@1, a)", "inj 1 end"]);
        assert!(!check_homomorphism(&c, &c, &[0, 0]).unwrap());
        let other = coalg("P(Id)", &["{}", "{}"]);
        assert!(matches!(check_homomorphism(&c, &other, &[0, 1]), Err(Error::FunctorMismatch { .. })));
    }

    #[test]
    fn canonical_graph_examples() {
        let t = coalg("Id*Id+{leaf}", &["inj 0 (@1, @2)", "inj 1 leaf", "inj 1 leaf"]);
        let g = canonical_graph(&t);
        assert_eq!(g[0], BTreeSet::from([1, 2]));
        assert!(g[1].is_empty());

        let m = coalg("Id^{a,b}*{0,1}", &["([a: @1, b: @2], 0)", "([a: @1, b: @1], 1)", "([a: @0, b: @0], 0)"]);
        assert_eq!(canonical_graph(&m)[0], BTreeSet::from([1, 2]));
        assert_eq!(canonical_graph(&m)[1], BTreeSet::from([1]));
    }

    #[test]
    fn reachable_drops_isolated_vertex() {
        let c = coalg("P(Id)", &["{@1}", "{}", "{}"]);
        let r = reachable_part(&PointedCoalgebra::new(c, 0).unwrap());
        assert_eq!(r.coalgebra.len(), 2);
        assert_eq!(r.embedding, vec![0, 1]);
        assert_eq!(r.coalgebra.base.functor().render(r.coalgebra.base.step(0)), "{@1}");
    }

    #[test]
    fn reachable_keeps_von_neumann_two() {
        // 0 = {}, 1 = {0}, 2 = {0, 1}
        let c = coalg("P(Id)", &["{}", "{@0}", "{@0, @1}"]);
        let r = reachable_part(&PointedCoalgebra::new(c, 2).unwrap());
        assert_eq!(r.coalgebra.len(), 3);
        assert_eq!(r.embedding, vec![2, 0, 1]);
    }

    #[test]
    fn two_self_loops_merge() {
        let c = coalg("P(Id)", &["{@0}", "{@1}"]);
        let q = simple_quotient(&c);
        assert_eq!(q.coalgebra.len(), 1);
        assert_eq!(q.coalgebra.functor().render(q.coalgebra.step(0)), "{@0}");
        assert!(check_homomorphism(&c, &q.coalgebra, q.partition.as_map()).unwrap());
    }

    #[test]
    fn moore_duplicates_merge() {
        // Hand-run Moore refinement: outputs split {0,2} | {1,3}; rows of 0 and 2
        // agree on blocks ([a: {1,3}, b: {0,2}]), so do 1 and 3.
        let c = coalg(
            "Id^{a,b}*{0,1}",
            &["([a: @1, b: @2], 0)", "([a: @0, b: @1], 1)", "([a: @3, b: @0], 0)", "([a: @2, b: @3], 1)"],
        );
        let q = simple_quotient(&c);
        assert_eq!(q.partition.num_blocks(), 2);
        assert_eq!(q.partition.as_map(), &[0, 1, 0, 1]);
    }

    #[test]
    fn simple_input_is_bijective() {
        let c = coalg("Id*{a,b}+{end}", &["inj 0 (@1, a)", "inj 0 (@2, b)", "inj 1 end"]);
        let q = simple_quotient(&c);
        assert!(q.partition.is_discrete());
    }

    #[test]
    fn omega_is_its_own_wp() {
        let c = coalg("P(Id)", &["{@0}"]);
        let pc = PointedCoalgebra::new(c.clone(), 0).unwrap();
        assert_eq!(wp(&pc).base, c);
    }

    #[test]
    fn restrict_rejects_open_subsets() {
        let c = coalg("P(Id)", &["{@1}", "{}"]);
        assert!(c.restrict(&[0]).is_err());
        assert!(c.restrict(&[1]).is_ok());
    }

    const FUNCTORS: [&str; 5] = ["Id*Id+{leaf}", "Id^{a,b}*{0,1}", "P(Id)", "P({a,b}*Id)", "Id*{a,b}+{end}"];

    #[test]
    fn quotient_laws_on_random_coalgebras() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for src in FUNCTORS {
            let f = parse_functor(src).unwrap();
            for _ in 0..200 {
                let n = rng.random_range(1..=8);
                let c = random_coalgebra(&f, n, &mut rng);
                let q = simple_quotient(&c);
                assert!(check_homomorphism(&c, &q.coalgebra, q.partition.as_map()).unwrap());
                assert!(is_stable(&c, &q.partition));
                assert!(simple_quotient(&q.coalgebra).partition.is_discrete());

                // kernel of any quotient along a stable partition refines ours
                let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
                let stable = refine(&c, Partition::from_labels(labels));
                let h = quotient_by(&c, &stable).unwrap();
                assert!(check_homomorphism(&c, &h, stable.as_map()).unwrap());
                assert!(stable.refines(&q.partition));
            }
        }
    }

    /// Splits one randomly chosen block at a time.
    fn refine_by_schedule(c: &Coalgebra, rng: &mut impl Rng) -> Partition {
        let mut p = Partition::single_block(c.len());
        loop {
            let mut blocks: Vec<usize> = (0..p.num_blocks()).collect();
            blocks.shuffle(rng);
            let splittable = blocks.into_iter().find(|&b| {
                let members: Vec<StateId> = (0..c.len()).filter(|&x| p.block_of(x) == b).collect();
                members.iter().any(|&x| c.signature(x, &p) != c.signature(members[0], &p))
            });
            let Some(b) = splittable else { return p };
            let labels: Vec<(usize, Option<Term>)> = (0..c.len())
                .map(|x| (p.block_of(x), (p.block_of(x) == b).then(|| c.signature(x, &p))))
                .collect();
            p = Partition::from_labels(labels);
        }
    }

    #[test]
    fn refinement_is_schedule_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for src in FUNCTORS {
            let f = parse_functor(src).unwrap();
            for _ in 0..20 {
                let c = random_coalgebra(&f, rng.random_range(1..=10), &mut rng);
                let expected = simple_quotient(&c).partition;
                for _ in 0..5 {
                    assert_eq!(refine_by_schedule(&c, &mut rng), expected);
                }
            }
        }
    }

    #[test]
    fn reachable_part_is_a_subcoalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for src in FUNCTORS {
            let f = parse_functor(src).unwrap();
            for _ in 0..200 {
                let pc = random_pointed(&f, 8, &mut rng);
                let r = reachable_part(&pc);
                let kept: BTreeSet<StateId> = r.embedding.iter().copied().collect();
                for &x in &r.embedding {
                    assert!(pc.base.step(x).support().is_subset(&kept));
                }
                assert!(check_homomorphism(&r.coalgebra.base, &pc.base, &r.embedding).unwrap());
            }
        }
    }

    #[test]
    fn wp_is_idempotent_and_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for src in FUNCTORS {
            let f = parse_functor(src).unwrap();
            for _ in 0..200 {
                let pc = random_pointed(&f, 7, &mut rng);
                let w = wp(&pc);
                assert_eq!(wp(&w), w);
                assert_eq!(wp_reachable_first(&pc), w);
            }
        }
    }
}
