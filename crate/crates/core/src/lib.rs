//! Finite coalgebras for polynomial functors with finite powerset.
//!
//! A functor is described by a [`FunctorExpr`]; a [`Coalgebra`] assigns
//! each of its `n` states a term of the functor applied to `{0..n}`. On top
//! of that the crate offers the well-founded part and recursion into
//! algebras ([`wellfounded`]), simple quotients and the well-pointed
//! modification ([`coalgebra`]), canonical forms and enumeration of the
//! rational fixed point ([`rational`]), and adapters for Moore machines,
//! streams, trees and hereditarily finite sets ([`instances`]).

pub mod coalgebra;
pub mod dot;
pub mod error;
pub mod functor;
pub mod instances;
pub mod io;
pub mod random;
pub mod rational;
pub mod wellfounded;

pub use coalgebra::{
    check_homomorphism, reachable_part, simple_quotient, wp, wp_reachable_first, Coalgebra, Partition,
    PointedCoalgebra,
};
pub use error::{Error, Result, Witness};
pub use functor::{map_term, parse_functor, FunctorExpr, StateId, Symbol, Term};
pub use io::CoalgebraFile;
pub use rational::{a_plus, canonical_form, enumerate_wp, in_mu, is_isomorphic, CanonicalForm, RhoElement};
pub use wellfounded::{fold, well_founded_part, Algebra, WfReport};
