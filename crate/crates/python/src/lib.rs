//! Python bindings: `Graph`, `Factor` and `Result` classes plus the
//! decision procedures as `Graph` methods.

use gbs_core::factors::{self, FactorSystem, Outcome};
use gbs_core::moves;
use gbs_core::whitehead;
use gbs_core::words::{self, BassWord};
use gbs_core::{parse_graph, serialize_graph, AllowedFamily, Error, MarkedGraph};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(gbs_whitehead, GbsError, PyException, "Domain error raised by the algorithm.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Parse { .. } | Error::InvalidPath(_) | Error::NotALoop | Error::InvalidInput(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => GbsError::new_err(other.to_string()),
    }
}

/// A labelled graph of cyclic groups with its allowed family.
#[pyclass(name = "Graph", module = "gbs_whitehead", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    graph: MarkedGraph,
    allowed: AllowedFamily,
}

impl PyGraph {
    fn word(&self, text: &str) -> PyResult<BassWord> {
        words::parse_word(&self.graph, text).map_err(to_py)
    }

    fn loops(&self, texts: Vec<String>) -> PyResult<Vec<BassWord>> {
        let b = self.graph.basepoint();
        texts
            .iter()
            .map(|t| {
                let w = self.word(t)?;
                if w.is_loop_at(&self.graph, b) {
                    Ok(w)
                } else {
                    Err(PyValueError::new_err(format!("{t:?} is not a loop at the basepoint")))
                }
            })
            .collect()
    }

    fn wrap(graph: MarkedGraph, allowed: AllowedFamily) -> Self {
        PyGraph { graph, allowed }
    }
}

#[pymethods]
impl PyGraph {
    /// Parses a `gbs v1` document.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let (graph, allowed) = parse_graph(text).map_err(to_py)?;
        Ok(PyGraph { graph, allowed })
    }

    /// Replaces the allowed family by the minimal one; the graph must be reduced.
    fn with_amin(&self) -> PyResult<Self> {
        Ok(Self::wrap(self.graph.clone(), self.graph.amin_sets().map_err(to_py)?))
    }

    /// Every vertex allows all cyclic subgroups.
    fn with_default_allowed(&self) -> Self {
        Self::wrap(self.graph.clone(), AllowedFamily::all_cyclic(self.graph.vertex_count()))
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    #[getter]
    fn betti_number(&self) -> usize {
        self.graph.betti_number()
    }

    #[getter]
    fn vertices(&self) -> Vec<String> {
        self.graph.vertex_names().to_vec()
    }

    /// `"Cyclic"`, `"Klein"`, `"SolvableBs"` or `"NonElementarySolvableFree"`.
    #[getter]
    fn elementary(&self) -> String {
        format!("{:?}", self.graph.classify_elementary())
    }

    fn to_text(&self) -> String {
        serialize_graph(&self.graph, &self.allowed)
    }

    fn reduce(&self) -> PyResult<Self> {
        let (g, a, _) = moves::reduce_graph(&self.graph, &self.allowed).map_err(to_py)?;
        Ok(Self::wrap(g, a))
    }

    fn subdivide(&self) -> PyResult<Self> {
        let (g, a, _) = moves::subdivide_loops(&self.graph, &self.allowed).map_err(to_py)?;
        Ok(Self::wrap(g, a))
    }

    /// `(b1, m, sigma)`.
    fn complexity(&self) -> (u64, u64, u64) {
        let c = factors::complexity(&self.graph);
        (c.b1, c.m, c.sigma)
    }

    /// Normal form of a path.
    fn normal_form(&self, word: &str) -> PyResult<String> {
        let w = words::reduce_path(&self.graph, &self.word(word)?).map_err(to_py)?;
        Ok(words::format_word(&self.graph, &w))
    }

    /// `(core, conjugator)` with `word = conjugator^-1 core conjugator`.
    fn cyclically_reduce(&self, word: &str) -> PyResult<(String, String)> {
        let (core, conj) = words::cyclically_reduce(&self.graph, &self.word(word)?).map_err(to_py)?;
        Ok((words::format_word(&self.graph, &core), words::format_word(&self.graph, &conj)))
    }

    fn translation_length(&self, word: &str) -> PyResult<usize> {
        words::translation_length(&self.graph, &self.word(word)?).map_err(to_py)
    }

    fn is_loxodromic(&self, word: &str) -> PyResult<bool> {
        words::is_loxodromic(&self.graph, &self.word(word)?).map_err(to_py)
    }

    fn equal(&self, a: &str, b: &str) -> PyResult<bool> {
        words::elements_equal(&self.graph, &self.word(a)?, &self.word(b)?).map_err(to_py)
    }

    /// Some admissible cut for the words anywhere in the graph, as text.
    fn find_cut(&self, words: Vec<String>) -> PyResult<Option<String>> {
        let ws = self.loops(words)?;
        let cut = whitehead::find_cut_anywhere(&self.graph, &self.allowed, &ws).map_err(to_py)?;
        Ok(cut.map(|c| format!("{c:?}")))
    }

    /// The Whitehead graph at `vertex` in DOT format.
    fn whitehead_dot(&self, words: Vec<String>, vertex: &str) -> PyResult<String> {
        let ws = self.loops(words)?;
        let v = self
            .graph
            .vertex_by_name(vertex)
            .ok_or_else(|| PyValueError::new_err(format!("unknown vertex {vertex}")))?;
        let wg = whitehead::whitehead_graph(&self.graph, &ws, v).map_err(to_py)?;
        let cut = whitehead::find_admissible_cut(&wg, &self.allowed);
        Ok(whitehead::to_dot(&self.graph, &wg, cut.as_ref()))
    }

    /// Decides whether the loops form a simple collection.
    fn check_simple(&self, words: Vec<String>) -> PyResult<PyResultObj> {
        let ws = self.loops(words)?;
        let run = factors::check_simple(&self.graph, &self.allowed, &ws).map_err(to_py)?;
        let log = moves::write_log(&run.moves);
        let text = factors::write_outcome(&run.outcome);
        Ok(match run.outcome {
            Outcome::Simple(system) => PyResultObj::from_system(&system, text, log),
            Outcome::NotSimple(cert) => PyResultObj {
                simple: false,
                text,
                log,
                factors: Vec::new(),
                members: Vec::new(),
                certificate: Some(PyGraph::wrap(cert.graph, cert.allowed)),
            },
        })
    }

    /// The smallest system of special factors carrying the loops.
    fn minimal_factors(&self, words: Vec<String>) -> PyResult<PyResultObj> {
        let ws = self.loops(words)?;
        let run = factors::minimal_factor_system(&self.graph, &self.allowed, &ws).map_err(to_py)?;
        let text = factors::write_system(&run.system);
        Ok(PyResultObj::from_system(&run.system, text, String::new()))
    }

    fn __repr__(&self) -> String {
        format!("Graph({} vertices, {} edges)", self.graph.vertex_count(), self.graph.edge_count())
    }
}

/// One special factor with its embedding into the parent.
#[pyclass(name = "Factor", module = "gbs_whitehead", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFactor {
    graph: PyGraph,
    /// `(generator, parent word)` pairs.
    #[pyo3(get)]
    embedding: Vec<(String, String)>,
}

/// Outcome of `check_simple` or `minimal_factors`.
#[pyclass(name = "Result", module = "gbs_whitehead", frozen)]
struct PyResultObj {
    #[pyo3(get)]
    simple: bool,
    /// Serialized result.
    #[pyo3(get)]
    text: String,
    /// Move log; empty for `minimal_factors`.
    #[pyo3(get)]
    log: String,
    factors: Vec<PyFactor>,
    /// `(element, factor, word in the factor, conjugator)`.
    #[pyo3(get)]
    members: Vec<(usize, usize, String, String)>,
    certificate: Option<PyGraph>,
}

impl PyResultObj {
    fn from_system(system: &FactorSystem, text: String, log: String) -> Self {
        let factors = system
            .factors
            .iter()
            .map(|f| (PyGraph::wrap(f.graph.clone(), f.allowed.clone()), f))
            .map(|(g, f)| {
                let embedding = f
                    .embedding
                    .iter()
                    .map(|(n, w)| (n.clone(), words::format_word(&system.parent, w)))
                    .collect();
                PyFactor { graph: g, embedding }
            })
            .collect();
        let members = system
            .members
            .iter()
            .map(|m| {
                let fg = &system.factors[m.factor].graph;
                (m.element, m.factor, words::format_word(fg, &m.word), words::format_word(&system.parent, &m.conjugator))
            })
            .collect();
        PyResultObj { simple: system.is_proper, text, log, factors, members, certificate: None }
    }
}

#[pymethods]
impl PyFactor {
    #[getter]
    fn graph(&self) -> PyGraph {
        self.graph.clone()
    }

    fn __repr__(&self) -> String {
        format!("Factor({} generators)", self.embedding.len())
    }
}

#[pymethods]
impl PyResultObj {
    #[getter]
    fn factors(&self) -> Vec<PyFactor> {
        self.factors.clone()
    }

    /// Final graph of a `NOTSIMPLE` run.
    #[getter]
    fn certificate(&self) -> Option<PyGraph> {
        self.certificate.clone()
    }

    fn __repr__(&self) -> String {
        let head = if self.simple { "SIMPLE" } else { "NOTSIMPLE" };
        format!("Result({head}, {} factors)", self.factors.len())
    }
}

/// Parses a words document: one word per line, `#` comments.
#[pyfunction]
fn parse_words(graph: &PyGraph, text: &str) -> PyResult<Vec<String>> {
    let ws = words::parse_words(&graph.graph, text).map_err(to_py)?;
    Ok(ws.iter().map(|w| words::format_word(&graph.graph, w)).collect())
}

#[pymodule]
fn gbs_whitehead(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyFactor>()?;
    m.add_class::<PyResultObj>()?;
    m.add_function(wrap_pyfunction!(parse_words, m)?)?;
    m.add("GbsError", m.py().get_type::<GbsError>())?;
    Ok(())
}
