//! Functor expressions and their elements.

mod expr;
mod syntax;
mod term;

pub use expr::{parse_functor, FunctorExpr, Symbol};
pub use term::{map_term, StateId, Term};
