use std::path::PathBuf;

use coalg::coalgebra::{simple_quotient, wp};
use coalg::instances::{
    coalgebra_to_moore, minimize_moore, moore_behavior, mostowski_collapse, parse_moore, tree_expansion, HfSet,
};
use coalg::rational::{canonical_form, in_mu, is_isomorphic, RhoElement};
use coalg::wellfounded::{fold, well_founded_part, ExpansionAlgebra, SizeAlgebra};
use coalg::{CoalgebraFile, Error, PointedCoalgebra, Witness};

fn sample(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "samples", name].iter().collect();
    std::fs::read_to_string(path).unwrap()
}

fn pointed(name: &str) -> PointedCoalgebra {
    CoalgebraFile::parse(&sample(name)).unwrap().pointed().unwrap()
}

#[test]
fn binary_system_is_already_well_pointed() {
    let pc = pointed("binary4.coalg");
    let form = canonical_form(&pc).unwrap();
    assert_eq!(form.coalgebra.len(), 4);
    assert!(is_isomorphic(&wp(&pc), &pc).unwrap());
    assert!(!well_founded_part(&pc.base).is_well_founded);
    let t = tree_expansion(&pc, Some(4)).unwrap();
    assert!((0..=4).all(|d| t.distinct_subtrees_at(d) <= 4));
}

#[test]
fn two_cycle_is_a_single_loop() {
    let pc = pointed("cycle.coalg");
    assert_eq!(wp(&pc).len(), 1);
    assert!(matches!(canonical_form(&pc), Err(Error::NotWellPointed(Witness::Mergeable(0, 1)))));
}

#[test]
fn lts_minimization_merges_bisimilar_states() {
    let pc = pointed("lts.coalg");
    let q = simple_quotient(&pc.base);
    assert_eq!(q.partition.block_of(1), q.partition.block_of(2));
    assert_ne!(q.partition.block_of(0), q.partition.block_of(1));
    let w = wp(&pc);
    assert_eq!(w.len(), 3);
    assert!(in_mu(&RhoElement::new(&w).unwrap()));
}

#[test]
fn shared_tree_folds() {
    let pc = pointed("tree.coalg");
    let sizes = fold(&pc.base, &SizeAlgebra).unwrap();
    assert_eq!(sizes, vec![9, 3, 5, 1]);
    let text = fold(&pc.base, &ExpansionAlgebra { functor: pc.functor().clone() }).unwrap();
    assert_eq!(text[1], "inj 0 (inj 1 leaf, inj 1 leaf)");
    assert_eq!(tree_expansion(&pc, None).unwrap().len(), 9);
}

#[test]
fn lasso_sample_normalizes() {
    let pc = pointed("lasso.coalg");
    assert_eq!(wp(&pc).len(), 2);
}

#[test]
fn parity_machine_minimizes_to_two_states() {
    let m = parse_moore(&sample("parity.moore")).unwrap();
    let min = minimize_moore(&m);
    assert_eq!(min.len(), 2);
    let beh = moore_behavior(&min, 2);
    assert_eq!(beh[&vec![0]], "odd");
    assert_eq!(beh[&vec![0, 0]], "even");
    assert_eq!(beh[&vec![1, 0]], "odd");
    assert_eq!(moore_behavior(&m, 6), moore_behavior(&min, 6));
    assert_eq!(parse_moore(&m.to_string()).unwrap(), m);
}

#[test]
fn json_numeral_collapses() {
    let pc = pointed("numeral2.json");
    assert_eq!(mostowski_collapse(&pc).unwrap(), HfSet::von_neumann(2));
    let file = CoalgebraFile::parse(&sample("numeral2.json")).unwrap();
    assert_eq!(CoalgebraFile::parse(&file.to_text()).unwrap(), file);
}

#[test]
fn moore_decoding_rejects_other_functors() {
    assert!(matches!(coalgebra_to_moore(&pointed("cycle.coalg")), Err(Error::FunctorMismatch { .. })));
}
