//! Python bindings: coalgebras, their well-pointed and canonical forms,
//! folds, enumeration, and the Moore, stream and hereditarily finite set
//! adapters.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use coalg::coalgebra::{reachable_part, simple_quotient, wp};
use coalg::dot::{coalgebra_to_dot, tree_to_dot};
use coalg::instances::{
    canonical_picture, is_strongly_extensional, minimize_moore, mostowski_collapse, parse_moore, stream_normalize,
    tree_expansion, HfSet, StreamSpec,
};
use coalg::rational::{a_plus, canonical_form, enumerate_wp as enumerate, is_isomorphic, render_rho_term, rho_structure, RhoElement};
use coalg::wellfounded::{
    fold as fold_into, well_founded_part, Algebra, DepthAlgebra, DetectorAlgebra, ExpansionAlgebra, SizeAlgebra,
};
use coalg::{parse_functor, Coalgebra as Structure, CoalgebraFile, FunctorExpr, PointedCoalgebra};

create_exception!(coalg_py, DomainError, PyException, "A mathematical precondition does not hold.");

fn py_err(e: coalg::Error) -> PyErr {
    if e.is_domain() {
        DomainError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// A finite coalgebra with a point (state 0 unless given).
#[pyclass(name = "Coalgebra", module = "coalg_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCoalgebra {
    inner: PointedCoalgebra,
}

impl PyCoalgebra {
    fn wrap(inner: PointedCoalgebra) -> Self {
        PyCoalgebra { inner }
    }

    fn file(&self) -> CoalgebraFile {
        CoalgebraFile::from(self.inner.clone())
    }

    fn folded<A: Algebra>(&self, alg: &A) -> PyResult<Vec<String>>
    where
        A::Value: ToString,
    {
        let values = fold_into(&self.inner.base, alg).map_err(py_err)?;
        Ok(values.iter().map(ToString::to_string).collect())
    }
}

#[pymethods]
impl PyCoalgebra {
    /// Builds a coalgebra from a functor expression and one term per state,
    /// e.g. `Coalgebra("P(Id)", ["{@1}", "{}"])`.
    #[new]
    #[pyo3(signature = (functor, structure, point = 0))]
    fn new(functor: &str, structure: Vec<String>, point: usize) -> PyResult<Self> {
        let f = parse_functor(functor).map_err(py_err)?;
        let n = structure.len();
        let terms = structure.iter().map(|s| f.parse_term(s, n)).collect::<Result<Vec<_>, _>>().map_err(py_err)?;
        let c = Structure::new(f, terms).map_err(py_err)?;
        Ok(Self::wrap(PointedCoalgebra::new(c, point).map_err(py_err)?))
    }

    /// Parses a coalgebra file in text or JSON form.
    #[staticmethod]
    fn parse(src: &str) -> PyResult<Self> {
        let file = CoalgebraFile::parse(src).map_err(py_err)?;
        Ok(Self::wrap(file.pointed().map_err(py_err)?))
    }

    #[getter]
    fn functor(&self) -> String {
        self.inner.functor().to_string()
    }

    #[getter]
    fn point(&self) -> usize {
        self.inner.point
    }

    /// The structure terms in text form.
    #[getter]
    fn structure(&self) -> Vec<String> {
        let f = self.inner.functor();
        self.inner.base.structure().iter().map(|t| f.render(t)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Coalgebra({:?}, {:?}, point={})", self.functor(), self.structure(), self.inner.point)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn to_text(&self) -> String {
        self.file().to_text()
    }

    fn to_json(&self) -> String {
        self.file().to_json().to_string()
    }

    fn to_dot(&self) -> String {
        coalgebra_to_dot(&self.inner.base, Some(self.inner.point))
    }

    /// The well-pointed modification, in canonical numbering.
    fn wp(&self) -> Self {
        Self::wrap(wp(&self.inner))
    }

    /// The simple quotient and the block of every state.
    fn simple_quotient(&self) -> (Self, Vec<usize>) {
        let q = simple_quotient(&self.inner.base);
        let blocks = q.partition.as_map().to_vec();
        let point = blocks[self.inner.point];
        (Self::wrap(PointedCoalgebra { base: q.coalgebra, point }), blocks)
    }

    /// The part reachable from the point and the original index of each state.
    fn reachable(&self) -> (Self, Vec<usize>) {
        let r = reachable_part(&self.inner);
        (Self::wrap(r.coalgebra), r.embedding)
    }

    /// `(is_well_founded, rank per state or None, rounds)`.
    fn well_founded_part(&self) -> (bool, Vec<Option<usize>>, usize) {
        let r = well_founded_part(&self.inner.base);
        (r.is_well_founded, r.rank, r.rounds)
    }

    /// Folds into a built-in algebra: `size`, `depth`, `expansion` or `detector`.
    fn fold(&self, algebra: &str) -> PyResult<Vec<String>> {
        match algebra {
            "size" => self.folded(&SizeAlgebra),
            "depth" => self.folded(&DepthAlgebra),
            "expansion" => self.folded(&ExpansionAlgebra { functor: self.inner.functor().clone() }),
            "detector" => {
                if *self.inner.functor() != FunctorExpr::pow(FunctorExpr::Id) {
                    return Err(DomainError::new_err("the detector algebra needs the functor P(Id)"));
                }
                self.folded(&DetectorAlgebra)
            }
            other => Err(PyValueError::new_err(format!("unknown algebra '{other}'"))),
        }
    }

    /// Canonical digest; raises `DomainError` unless well-pointed.
    fn digest(&self) -> PyResult<String> {
        Ok(canonical_form(&self.inner).map_err(py_err)?.digest().to_string())
    }

    fn canonical_form(&self) -> PyResult<Self> {
        Ok(Self::wrap(canonical_form(&self.inner).map_err(py_err)?.coalgebra))
    }

    fn is_isomorphic(&self, other: &Self) -> PyResult<bool> {
        is_isomorphic(&self.inner, &other.inner).map_err(py_err)
    }

    /// Digest of the well-pointed modification of every state.
    fn a_plus(&self) -> Vec<String> {
        a_plus(&self.inner.base).iter().map(|r| r.digest().to_string()).collect()
    }

    /// The point's term with successors replaced by their digests.
    fn rho_step(&self) -> PyResult<String> {
        let r = RhoElement::new(&wp(&self.inner)).map_err(py_err)?;
        Ok(render_rho_term(r.functor(), &rho_structure(&r)))
    }

    /// Tree expansion as an indented outline; `depth=None` expands fully.
    #[pyo3(signature = (depth = None))]
    fn tree_expansion(&self, depth: Option<usize>) -> PyResult<String> {
        Ok(tree_expansion(&self.inner, depth).map_err(py_err)?.to_string())
    }

    #[pyo3(signature = (depth = None))]
    fn tree_dot(&self, depth: Option<usize>) -> PyResult<String> {
        Ok(tree_to_dot(&tree_expansion(&self.inner, depth).map_err(py_err)?))
    }

    /// Whether the full tree expansion admits only the trivial tree-bisimulation.
    fn is_strongly_extensional(&self) -> PyResult<bool> {
        Ok(is_strongly_extensional(&tree_expansion(&self.inner, None).map_err(py_err)?))
    }
}

/// Digests of all well-pointed coalgebras with at most `max_states` states.
#[pyfunction]
#[pyo3(signature = (functor, max_states, only_well_founded = false))]
fn enumerate_wp(py: Python<'_>, functor: &str, max_states: usize, only_well_founded: bool) -> PyResult<Vec<String>> {
    let f = parse_functor(functor).map_err(py_err)?;
    let elems = py.detach(|| enumerate(&f, max_states, only_well_founded)).map_err(py_err)?;
    Ok(elems.iter().map(|r| r.digest().to_string()).collect())
}

/// Shortest representation of a finite or eventually periodic stream, e.g. `ab(ab)^w`.
#[pyfunction]
fn normalize_stream(spec: &str) -> PyResult<String> {
    let s: StreamSpec = spec.parse().map_err(py_err)?;
    Ok(stream_normalize(&s).to_string())
}

/// Minimizes a Moore machine given in transition-table text form.
#[pyfunction]
fn minimize_moore_text(src: &str) -> PyResult<String> {
    Ok(minimize_moore(&parse_moore(src).map_err(py_err)?).to_string())
}

/// Canonical picture of a set literal such as `{{},{{}}}`.
#[pyfunction]
fn hf_picture(set: &str) -> PyResult<PyCoalgebra> {
    let s: HfSet = set.parse().map_err(py_err)?;
    Ok(PyCoalgebra::wrap(canonical_picture(&s)))
}

/// Canonical picture of the von Neumann numeral `n`.
#[pyfunction]
fn numeral_picture(n: usize) -> PyCoalgebra {
    PyCoalgebra::wrap(canonical_picture(&HfSet::von_neumann(n)))
}

/// The set decorating the point of a well-founded graph.
#[pyfunction]
fn hf_collapse(c: &PyCoalgebra) -> PyResult<String> {
    Ok(mostowski_collapse(&c.inner).map_err(py_err)?.to_string())
}

#[pymodule]
fn coalg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCoalgebra>()?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add_function(wrap_pyfunction!(enumerate_wp, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_stream, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_moore_text, m)?)?;
    m.add_function(wrap_pyfunction!(hf_picture, m)?)?;
    m.add_function(wrap_pyfunction!(numeral_picture, m)?)?;
    m.add_function(wrap_pyfunction!(hf_collapse, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_core_operations() {
        let c = PyCoalgebra::new("P(Id)", vec!["{@1}".into(), "{@0}".into()], 0).unwrap();
        assert_eq!(c.wp().__len__(), 1);
        assert_eq!(c.structure(), vec!["{@1}", "{@0}"]);
        let (q, blocks) = c.simple_quotient();
        assert_eq!(blocks, vec![0, 0]);
        assert_eq!(q.__len__(), 1);
        assert_eq!(c.well_founded_part(), (false, vec![None, None], 0));
        assert_eq!(c.rho_step().unwrap(), "{<P(Id) | 1 | {@0}>}");
    }

    #[test]
    fn text_round_trip() {
        let c = PyCoalgebra::new("Id*Id+{leaf}", vec!["inj 0 (@1, @1)".into(), "inj 1 leaf".into()], 0).unwrap();
        let back = PyCoalgebra::parse(&c.to_text()).unwrap();
        assert!(back.__eq__(&c));
        assert_eq!(c.folded(&SizeAlgebra).unwrap(), vec!["3", "1"]);
    }
}
