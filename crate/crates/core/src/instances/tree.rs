use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::coalgebra::{reachable_states, PointedCoalgebra};
use crate::error::{Error, Result};
use crate::functor::{FunctorExpr, StateId, Term};
use crate::wellfounded::well_founded_part;

/// Expansions larger than this are refused.
pub const MAX_TREE_NODES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// The coalgebra state this node unfolds.
    pub state: StateId,
    pub depth: usize,
    pub parent: Option<usize>,
    /// Shape of the node's term with `_` for every child.
    pub label: String,
    /// The term with child node ids as leaves; `None` for a node cut off by
    /// the depth bound before its children were unfolded.
    pub content: Option<Term<usize>>,
    /// Nodes at the same depth have equal codes iff their subtrees are equal.
    pub code: u32,
}

impl TreeNode {
    pub fn children(&self) -> Vec<usize> {
        self.content.as_ref().map_or_else(Vec::new, |t| t.leaves().into_iter().copied().collect())
    }

    pub fn is_cut(&self) -> bool {
        self.content.is_none()
    }
}

/// A rooted tree of terms. Node 0 is the root; nodes are numbered
/// breadth-first, and inside every set the elements are sorted by the codes
/// of their subtrees, so equal unordered trees have equal node lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    functor: Arc<FunctorExpr>,
    nodes: Vec<TreeNode>,
    ordered: bool,
}

impl Tree {
    pub fn functor(&self) -> &FunctorExpr {
        &self.functor
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// False when the functor has a powerset, whose children have no order.
    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn has_cuts(&self) -> bool {
        self.nodes.iter().any(TreeNode::is_cut)
    }

    pub fn num_edges(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// Number of pairwise distinct subtrees rooted at the given depth.
    pub fn distinct_subtrees_at(&self, depth: usize) -> usize {
        self.nodes.iter().filter(|n| n.depth == depth).map(|n| n.code).collect::<BTreeSet<_>>().len()
    }

    /// The term rendered with every child expanded in place; cut nodes show as `...`.
    pub fn render(&self) -> String {
        self.render_node(0)
    }

    fn render_node(&self, i: usize) -> String {
        match &self.nodes[i].content {
            None => "...".to_string(),
            Some(t) => self.functor.render_with(t, &mut |&c, out| out.push_str(&self.render_node(c))),
        }
    }

    /// A copy in which the subtree at `node` occurs a second time as a sibling
    /// inside the nearest enclosing set. `None` for the root or when no set
    /// encloses the node.
    pub fn with_duplicated_subtree(&self, node: usize) -> Option<Tree> {
        let parent = self.nodes.get(node)?.parent?;
        let mut nodes = self.nodes.clone();
        let mut content = nodes[parent].content.clone()?;
        if !duplicate_in_set(&mut content, node, &mut |src| copy_subtree(&mut nodes, src, parent)) {
            return None;
        }
        nodes[parent].content = Some(content);
        Some(finalize(self.functor.clone(), nodes, self.ordered))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "functor": self.functor.to_string(),
            "ordered": self.ordered,
            "nodes": self.nodes.iter().map(|n| json!({
                "state": n.state,
                "depth": n.depth,
                "parent": n.parent,
                "label": n.label,
                "children": n.children(),
                "cut": n.is_cut(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for Tree {
    /// One node per line, indented by depth.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            write!(f, "{:indent$}{}", "", n.label, indent = 2 * n.depth)?;
            if n.is_cut() {
                f.write_str(" ...")?;
            }
            writeln!(f, "  @{}", n.state)?;
            stack.extend(n.children().into_iter().rev());
        }
        Ok(())
    }
}

/// Unfolds the coalgebra from its point. With `Some(d)` nodes deeper than
/// `d` are not created and nodes at depth `d` with children are cut; with
/// `None` the expansion is complete, which requires every reachable state
/// to be well-founded.
pub fn tree_expansion(pc: &PointedCoalgebra, depth: Option<usize>) -> Result<Tree> {
    let c = &pc.base;
    if depth.is_none() {
        let report = well_founded_part(c);
        if let Some(&x) = reachable_states(c, &[pc.point]).iter().find(|x| !report.part.contains(x)) {
            return Err(Error::FullExpansionDiverges { state: x });
        }
    }
    let mut nodes = vec![raw_node(pc.point, 0, None)];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (x, d) = (nodes[i].state, nodes[i].depth);
        let t = c.step(x);
        if depth == Some(d) && !t.leaves().is_empty() {
            nodes[i].label = c.functor().render_with(t, &mut |_, out| out.push('_'));
            continue;
        }
        let mut overflow = false;
        let content = t.map_raw(&mut |&y| {
            let id = nodes.len();
            overflow |= id >= MAX_TREE_NODES;
            nodes.push(raw_node(y, d + 1, Some(i)));
            queue.push_back(id);
            id
        });
        if overflow {
            return Err(Error::ResourceLimit { needed: format!("more than {MAX_TREE_NODES} tree nodes"), limit: MAX_TREE_NODES as u128 });
        }
        nodes[i].content = Some(content);
    }
    Ok(finalize(c.functor_arc().clone(), nodes, !c.functor().has_powerset()))
}

fn raw_node(state: StateId, depth: usize, parent: Option<usize>) -> TreeNode {
    TreeNode { state, depth, parent, label: String::new(), content: None, code: 0 }
}

/// Sorts set elements by subtree codes, assigns codes and labels, and
/// renumbers breadth-first.
fn finalize(functor: Arc<FunctorExpr>, mut nodes: Vec<TreeNode>, ordered: bool) -> Tree {
    let height = nodes.iter().map(|n| n.depth).max().unwrap_or(0);
    let mut levels = vec![Vec::new(); height + 1];
    for (i, n) in nodes.iter().enumerate() {
        levels[n.depth].push(i);
    }
    for level in levels.iter().rev() {
        let mut keys: BTreeMap<(Option<Term<u32>>, String), Vec<usize>> = BTreeMap::new();
        for &i in level {
            let key = match nodes[i].content.take() {
                None => (None, nodes[i].label.clone()),
                Some(mut t) => {
                    sort_sets(&mut t, &nodes);
                    let key = t.map_raw(&mut |&c| nodes[c].code);
                    nodes[i].label = functor.render_with(&t, &mut |_, out| out.push('_'));
                    nodes[i].content = Some(t);
                    (Some(key), String::new())
                }
            };
            keys.entry(key).or_default().push(i);
        }
        for (code, members) in keys.into_values().enumerate() {
            for i in members {
                nodes[i].code = code as u32;
            }
        }
    }

    let mut order = Vec::with_capacity(nodes.len());
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        order.push(i);
        queue.extend(nodes[i].children());
    }
    let mut new_id = vec![usize::MAX; nodes.len()];
    for (k, &i) in order.iter().enumerate() {
        new_id[i] = k;
    }
    let renumbered = order
        .iter()
        .map(|&i| {
            let n = &nodes[i];
            TreeNode {
                state: n.state,
                depth: n.depth,
                parent: n.parent.map(|p| new_id[p]),
                label: n.label.clone(),
                content: n.content.as_ref().map(|t| t.map_raw(&mut |&c| new_id[c])),
                code: n.code,
            }
        })
        .collect();
    Tree { functor, nodes: renumbered, ordered }
}

fn sort_sets(t: &mut Term<usize>, nodes: &[TreeNode]) {
    match t {
        Term::Const(_) | Term::State(_) => {}
        Term::Pair(a, b) => {
            sort_sets(a, nodes);
            sort_sets(b, nodes);
        }
        Term::Inj(_, s) => sort_sets(s, nodes),
        Term::Tab(ts) => ts.iter_mut().for_each(|s| sort_sets(s, nodes)),
        Term::Set(ts) => {
            ts.iter_mut().for_each(|s| sort_sets(s, nodes));
            ts.sort_by_cached_key(|s| s.map_raw(&mut |&c| nodes[c].code));
        }
    }
}

fn copy_subtree(nodes: &mut Vec<TreeNode>, src: usize, parent: usize) -> usize {
    let id = nodes.len();
    let mut copy = nodes[src].clone();
    copy.parent = Some(parent);
    copy.content = None;
    nodes.push(copy);
    if let Some(t) = nodes[src].content.clone() {
        let content = t.map_raw(&mut |&c| copy_subtree(nodes, c, id));
        nodes[id].content = Some(content);
    }
    id
}

/// Finds the innermost set with an element mentioning `node` and appends a
/// copy of that element whose children are fresh copies.
fn duplicate_in_set(t: &mut Term<usize>, node: usize, copy: &mut impl FnMut(usize) -> usize) -> bool {
    match t {
        Term::Const(_) | Term::State(_) => false,
        Term::Pair(a, b) => duplicate_in_set(a, node, copy) || duplicate_in_set(b, node, copy),
        Term::Inj(_, s) => duplicate_in_set(s, node, copy),
        Term::Tab(ts) => ts.iter_mut().any(|s| duplicate_in_set(s, node, copy)),
        Term::Set(ts) => {
            if ts.iter_mut().any(|s| duplicate_in_set(s, node, copy)) {
                return true;
            }
            match ts.iter().find(|s| s.leaves().contains(&&node)) {
                Some(e) => {
                    let dup = e.map_raw(&mut |&c| copy(c));
                    ts.push(dup);
                    true
                }
                None => false,
            }
        }
    }
}

/// True iff the greatest tree-bisimulation of `t` with itself is the
/// identity. Related nodes have equal depth, are both the root or have
/// related parents and the same edge into them, and their terms are related
/// by the relation lifting of the functor. A cut node is related only to
/// itself.
pub fn is_strongly_extensional(t: &Tree) -> bool {
    let greatest = greatest_tree_bisimulation(t);
    greatest.iter().all(|(a, b)| a == b)
}

/// All pairs of the greatest tree-bisimulation, sorted.
pub fn greatest_tree_bisimulation(t: &Tree) -> Vec<(usize, usize)> {
    let nodes = &t.nodes;
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); t.height() + 1];
    let mut slot = vec![0; nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        slot[i] = levels[n.depth].len();
        levels[n.depth].push(i);
    }
    let edges = edge_contexts(t);
    let mut rel: Vec<Vec<bool>> = levels.iter().map(|l| vec![true; l.len() * l.len()]).collect();
    let related = |rel: &Vec<Vec<bool>>, a: usize, b: usize| {
        let d = nodes[a].depth;
        d == nodes[b].depth && rel[d][slot[a] * levels[d].len() + slot[b]]
    };
    loop {
        let mut changed = false;
        for (d, level) in levels.iter().enumerate() {
            for &a in level {
                for &b in level {
                    if !related(&rel, a, b) {
                        continue;
                    }
                    let parents_ok = match (nodes[a].parent, nodes[b].parent) {
                        (None, None) => true,
                        (Some(p), Some(q)) => edges[a] == edges[b] && related(&rel, p, q),
                        _ => false,
                    };
                    let terms_ok = match (&nodes[a].content, &nodes[b].content) {
                        (None, None) => a == b,
                        (Some(x), Some(y)) => lift(x, y, &|u, v| related(&rel, u, v)),
                        _ => false,
                    };
                    if !(parents_ok && terms_ok) {
                        rel[d][slot[a] * level.len() + slot[b]] = false;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut pairs = Vec::new();
    for level in &levels {
        for &a in level {
            for &b in level {
                if related(&rel, a, b) {
                    pairs.push((a, b));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// For every node, where it sits in its parent's term: the path of set
/// memberships leading to it, each step showing the enclosing set element
/// with the hole marked. For labelled sets this is the edge label; for
/// ordered positions it is the position. Sibling positions in one set
/// element stay apart, elements of one set share the same context.
fn edge_contexts(t: &Tree) -> Vec<String> {
    fn shape(t: &Term<usize>, hole: *const Term<usize>, out: &mut String) {
        if std::ptr::eq(t, hole) {
            out.push('*');
            return;
        }
        match t {
            Term::Const(c) => out.push_str(&format!("c{c}")),
            Term::State(_) => out.push('_'),
            Term::Pair(a, b) => {
                out.push('(');
                shape(a, hole, out);
                out.push(',');
                shape(b, hole, out);
                out.push(')');
            }
            Term::Inj(k, s) => {
                out.push_str(&format!("i{k} "));
                shape(s, hole, out);
            }
            Term::Tab(ts) | Term::Set(ts) => {
                out.push(if matches!(t, Term::Tab(_)) { '[' } else { '{' });
                for s in ts {
                    shape(s, hole, out);
                    out.push(',');
                }
                out.push(if matches!(t, Term::Tab(_)) { ']' } else { '}' });
            }
        }
    }

    fn walk(t: &Term<usize>, base: &Term<usize>, prefix: &str, out: &mut [String]) {
        let context = |hole: &Term<usize>| {
            let mut s = prefix.to_string();
            shape(base, hole, &mut s);
            s
        };
        match t {
            Term::Const(_) => {}
            Term::State(c) => out[*c] = context(t),
            Term::Pair(a, b) => {
                walk(a, base, prefix, out);
                walk(b, base, prefix, out);
            }
            Term::Inj(_, s) => walk(s, base, prefix, out),
            Term::Tab(ts) => ts.iter().for_each(|s| walk(s, base, prefix, out)),
            Term::Set(ts) => {
                let inner = context(t) + " > ";
                ts.iter().for_each(|s| walk(s, s, &inner, out));
            }
        }
    }

    let mut out = vec![String::new(); t.nodes.len()];
    for n in &t.nodes {
        if let Some(c) = &n.content {
            walk(c, c, "", &mut out);
        }
    }
    out
}

/// Relation lifting: constants equal, leaves related, products and
/// exponents componentwise, injections with equal tags, and sets related in
/// both directions.
fn lift(a: &Term<usize>, b: &Term<usize>, r: &impl Fn(usize, usize) -> bool) -> bool {
    match (a, b) {
        (Term::Const(x), Term::Const(y)) => x == y,
        (Term::State(x), Term::State(y)) => r(*x, *y),
        (Term::Pair(a1, a2), Term::Pair(b1, b2)) => lift(a1, b1, r) && lift(a2, b2, r),
        (Term::Inj(i, x), Term::Inj(j, y)) => i == j && lift(x, y, r),
        (Term::Tab(xs), Term::Tab(ys)) => xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| lift(x, y, r)),
        (Term::Set(xs), Term::Set(ys)) => {
            xs.iter().all(|x| ys.iter().any(|y| lift(x, y, r))) && ys.iter().all(|y| xs.iter().any(|x| lift(x, y, r)))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalgebra::Coalgebra;
    use crate::functor::parse_functor;
    use crate::instances::{canonical_picture, HfSet};

    fn pointed(f: &str, terms: &[&str], point: StateId) -> PointedCoalgebra {
        let f = parse_functor(f).unwrap();
        let structure = terms.iter().map(|s| f.parse_term(s, terms.len()).unwrap()).collect();
        PointedCoalgebra::new(Coalgebra::new(f, structure).unwrap(), point).unwrap()
    }

    fn four_state() -> PointedCoalgebra {
        pointed(
            "Id*Id+{leaf}",
            &["inj 0 (@1, @2)", "inj 0 (@1, @1)", "inj 0 (@3, @2)", "inj 1 leaf"],
            0,
        )
    }

    #[test]
    fn omega_chain() {
        let omega = pointed("P(Id)", &["{@0}"], 0);
        let t = tree_expansion(&omega, Some(3)).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.nodes().iter().all(|n| n.label == "{_}"));
        assert!(t.node(3).is_cut());
        assert_eq!(t.nodes().iter().filter(|n| n.is_cut()).count(), 1);
        assert!(matches!(tree_expansion(&omega, None), Err(Error::FullExpansionDiverges { state: 0 })));
    }

    #[test]
    fn four_state_prefix() {
        let t = tree_expansion(&four_state(), Some(4)).unwrap();
        assert_eq!(t.node(0).label, "inj 0 (_, _)");
        assert!(t.is_ordered());
        for d in 0..=4 {
            assert!(t.distinct_subtrees_at(d) <= 4);
        }
        // Depth 1: the full tree and the right spine.
        let states: Vec<_> = t.node(0).children().iter().map(|&c| t.node(c).state).collect();
        assert_eq!(states, vec![1, 2]);
        assert!(matches!(tree_expansion(&four_state(), None), Err(Error::FullExpansionDiverges { .. })));
    }

    #[test]
    fn finite_binary_tree_full_expansion() {
        let pc = pointed("Id*Id+{leaf}", &["inj 0 (@1, @1)", "inj 1 leaf"], 0);
        let t = tree_expansion(&pc, None).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.render(), "inj 0 (inj 1 leaf, inj 1 leaf)");
        assert_eq!(t.height(), 1);
    }

    #[test]
    fn von_neumann_two() {
        let t = tree_expansion(&canonical_picture(&HfSet::von_neumann(2)), None).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.num_edges(), 3);
        assert!(!t.is_ordered());
        assert_eq!(t.render(), "{{}, {{}}}");
        assert!(is_strongly_extensional(&t));
    }

    #[test]
    fn numerals_are_strongly_extensional() {
        for n in 0..=3 {
            let t = tree_expansion(&canonical_picture(&HfSet::von_neumann(n)), None).unwrap();
            assert!(is_strongly_extensional(&t), "numeral {n}");
        }
    }

    #[test]
    fn duplicated_sibling_breaks_extensionality() {
        let t = tree_expansion(&canonical_picture(&HfSet::von_neumann(2)), None).unwrap();
        let child = t.node(0).children()[0];
        let dup = t.with_duplicated_subtree(child).unwrap();
        assert_eq!(dup.len(), t.len() + 1);
        assert!(!is_strongly_extensional(&dup));
        assert!(t.with_duplicated_subtree(0).is_none());
    }

    #[test]
    fn two_equal_children() {
        // {a, b} with a and b both empty: not extensional.
        let pc = pointed("P(Id)", &["{@1, @2}", "{}", "{}"], 0);
        let t = tree_expansion(&pc, None).unwrap();
        assert_eq!(t.distinct_subtrees_at(1), 1);
        assert!(!is_strongly_extensional(&t));
    }

    #[test]
    fn cut_nodes_count_as_distinct() {
        let pc = pointed("P(Id)", &["{@1, @2}", "{@1}", "{@2}"], 0);
        let t = tree_expansion(&pc, Some(1)).unwrap();
        assert!(t.has_cuts());
        assert!(is_strongly_extensional(&t));
    }

    #[test]
    fn sets_are_sorted_by_subtree() {
        let a = pointed("P(Id)", &["{@1, @2}", "{}", "{@1}"], 0);
        let b = pointed("P(Id)", &["{@1, @2}", "{@2}", "{}"], 0);
        let ta = tree_expansion(&a, None).unwrap();
        let tb = tree_expansion(&b, None).unwrap();
        let strip = |t: &Tree| t.nodes().iter().map(|n| (n.depth, n.parent, n.label.clone(), n.content.clone())).collect::<Vec<_>>();
        assert_eq!(strip(&ta), strip(&tb));
    }

    #[test]
    fn labelled_sets_lift_pointwise() {
        let pc = pointed("P({a,b}*Id)", &["{(a, @1), (b, @1)}", "{}"], 0);
        let t = tree_expansion(&pc, None).unwrap();
        assert!(is_strongly_extensional(&t));
        // Same tree as above, from a graph that is not simple.
        let unmerged = pointed("P({a,b}*Id)", &["{(a, @1), (b, @2)}", "{}", "{}"], 0);
        assert_eq!(tree_expansion(&unmerged, None).unwrap().render(), t.render());
        assert!(is_strongly_extensional(&tree_expansion(&unmerged, None).unwrap()));
        let dup = t.with_duplicated_subtree(1).unwrap();
        assert!(!is_strongly_extensional(&dup));
    }

    #[test]
    fn ordered_positions_are_never_confused() {
        let pc = pointed("Id*Id+{leaf}", &["inj 0 (@1, @1)", "inj 1 leaf"], 0);
        assert!(is_strongly_extensional(&tree_expansion(&pc, None).unwrap()));
    }
}
