//! Graphviz export.

use std::fmt::Write;

use crate::coalgebra::{canonical_graph, Coalgebra};
use crate::functor::StateId;
use crate::instances::Tree;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// The canonical graph: one node per state labeled with its term, one edge
/// per successor. The point, if any, is drawn with a double border.
pub fn coalgebra_to_dot(c: &Coalgebra, point: Option<StateId>) -> String {
    let mut out = String::from("digraph coalgebra {\n  node [shape=box];\n");
    for (x, t) in c.structure().iter().enumerate() {
        let label = quote(&format!("{x}: {}", c.functor().render(t)));
        let extra = if point == Some(x) { ", peripheries=2" } else { "" };
        writeln!(out, "  s{x} [label={label}{extra}];").unwrap();
    }
    for (x, succ) in canonical_graph(c).iter().enumerate() {
        for y in succ {
            writeln!(out, "  s{x} -> s{y};").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// One node per tree node; cut nodes are dashed.
pub fn tree_to_dot(t: &Tree) -> String {
    let mut out = String::from("digraph tree {\n  node [shape=box];\n");
    for (i, n) in t.nodes().iter().enumerate() {
        let style = if n.is_cut() { ", style=dashed" } else { "" };
        writeln!(out, "  n{i} [label={}{style}];", quote(&n.label)).unwrap();
    }
    for (i, n) in t.nodes().iter().enumerate() {
        for c in n.children() {
            writeln!(out, "  n{i} -> n{c};").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::PointedCoalgebra;
    use crate::functor::{parse_functor, Term};
    use crate::instances::tree_expansion;

    fn omega() -> Coalgebra {
        Coalgebra::new(parse_functor("P(Id)").unwrap(), vec![Term::Set(vec![Term::State(0)])]).unwrap()
    }

    #[test]
    fn graph_export() {
        let dot = coalgebra_to_dot(&omega(), Some(0));
        assert_eq!(
            dot,
            "digraph coalgebra {\n  node [shape=box];\n  s0 [label=\"0: {@0}\", peripheries=2];\n  s0 -> s0;\n}\n"
        );
    }

    #[test]
    fn tree_export() {
        let pc = PointedCoalgebra::new(omega(), 0).unwrap();
        let dot = tree_to_dot(&tree_expansion(&pc, Some(1)).unwrap());
        assert!(dot.contains("n1 [label=\"{_}\", style=dashed];"));
        assert!(dot.contains("n0 -> n1;"));
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("a\"b\\"), "\"a\\\"b\\\\\"");
    }
}
