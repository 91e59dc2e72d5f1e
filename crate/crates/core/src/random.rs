//! Random terms and coalgebras for property tests and benchmarks.

use rand::Rng;

use crate::coalgebra::{Coalgebra, PointedCoalgebra};
use crate::functor::{FunctorExpr, Term};

/// Largest powerset element drawn by [`random_term`].
const MAX_SET: usize = 3;

/// A uniformly-shaped random element of `H({0..n})`, canonicalized.
///
/// Panics if `H(n)` is empty.
pub fn random_term<R: Rng + ?Sized>(f: &FunctorExpr, n: usize, rng: &mut R) -> Term {
    assert!(f.is_inhabited(n), "{f} has no elements over {n} states");
    draw(f, n, rng).canonicalize()
}

fn draw<R: Rng + ?Sized>(f: &FunctorExpr, n: usize, rng: &mut R) -> Term {
    match f {
        FunctorExpr::Id => Term::State(rng.random_range(0..n)),
        FunctorExpr::Const(syms) => Term::Const(rng.random_range(0..syms.len())),
        FunctorExpr::Prod(a, b) => Term::pair(draw(a, n, rng), draw(b, n, rng)),
        FunctorExpr::Coprod(summands) => {
            let live: Vec<usize> = (0..summands.len()).filter(|&k| summands[k].is_inhabited(n)).collect();
            let k = live[rng.random_range(0..live.len())];
            Term::inj(k, draw(&summands[k], n, rng))
        }
        FunctorExpr::Exp(base, index) => Term::Tab(index.iter().map(|_| draw(base, n, rng)).collect()),
        FunctorExpr::Pow(inner) => {
            if !inner.is_inhabited(n) {
                return Term::Set(Vec::new());
            }
            let k = rng.random_range(0..=MAX_SET);
            Term::Set((0..k).map(|_| draw(inner, n, rng)).collect())
        }
    }
}

/// A random coalgebra on `n` states.
pub fn random_coalgebra<R: Rng + ?Sized>(f: &FunctorExpr, n: usize, rng: &mut R) -> Coalgebra {
    let structure = (0..n).map(|_| random_term(f, n, rng)).collect();
    Coalgebra::new(f.clone(), structure).expect("random terms are well-typed")
}

/// A random pointed coalgebra with between 1 and `max_states` states.
pub fn random_pointed<R: Rng + ?Sized>(f: &FunctorExpr, max_states: usize, rng: &mut R) -> PointedCoalgebra {
    let n = rng.random_range(1..=max_states.max(1));
    let c = random_coalgebra(f, n, rng);
    let point = rng.random_range(0..n);
    PointedCoalgebra::new(c, point).expect("point is in range")
}
