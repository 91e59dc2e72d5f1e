//! Adapters between familiar structures and coalgebras: Moore machines,
//! streams, tree expansions and hereditarily finite sets.

mod hf;
mod moore;
mod stream;
mod tree;

pub use hf::{canonical_picture, mostowski_collapse, HfSet};
pub use moore::{
    behaviors_agree, coalgebra_to_moore, minimize_moore, moore_behavior, moore_to_coalgebra, parse_moore, MooreMachine,
};
pub use stream::{
    coalgebra_to_stream, stream_functor, stream_normalize, stream_to_coalgebra, stream_to_coalgebra_over, StreamSpec,
};
pub use tree::{
    greatest_tree_bisimulation, is_strongly_extensional, tree_expansion, Tree, TreeNode, MAX_TREE_NODES,
};
