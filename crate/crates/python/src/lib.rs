//! Python bindings: graph construction, QUBO encoding, solving, decoding,
//! evaluation and whole pipeline runs.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qtangle::assembly::{decode as decode_bits, extract_sequence, render_path_string, DecodeMode};
use qtangle::evaluate::evaluate as evaluate_contigs;
use qtangle::gfa::{parse_gfa, write_gfa};
use qtangle::graph::AnnotatedGraph;
use qtangle::pangraph::build_pangenome;
use qtangle::pipeline::{cmd_pipeline, solve as run_solver, summary_tsv, PipelineConfig, SolverChoice, SolverSection};
use qtangle::qubo::{build_qubo as encode, QuboModel, VariableLayout};
use qtangle::tangle::ProblemKind;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn graph_from_text(gfa: &str, k: usize) -> PyResult<AnnotatedGraph> {
    let doc = parse_gfa(gfa).map_err(value_err)?;
    AnnotatedGraph::from_gfa(&doc, k).map_err(value_err)
}

fn model_from_text(qubo: &str, layout: &str) -> PyResult<QuboModel> {
    let layout = VariableLayout::from_json(layout).map_err(value_err)?;
    QuboModel::from_text(qubo, Some(layout)).map_err(value_err)
}

/// A QUBO model with its variable layout.
#[pyclass(module = "qtangle_py")]
struct Qubo {
    model: QuboModel,
}

#[pymethods]
impl Qubo {
    #[new]
    fn new(text: &str, layout: &str) -> PyResult<Self> {
        Ok(Qubo {
            model: model_from_text(text, layout)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.model.n
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.model.offset
    }

    fn energy(&self, bits: Vec<u8>) -> PyResult<f64> {
        self.model.energy(&bits).map_err(value_err)
    }

    fn to_text(&self) -> String {
        self.model.to_text()
    }

    fn layout_json(&self) -> Option<String> {
        self.model.layout.as_ref().map(|l| l.to_json())
    }
}

/// Builds the pangenome of `(id, sequence)` pairs; returns GFA text with
/// one path line per genome.
#[pyfunction]
#[pyo3(signature = (genomes, k = 31))]
fn pangenome(genomes: Vec<(String, String)>, k: usize) -> PyResult<String> {
    let input: Vec<(&str, &str)> = genomes.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let pg = build_pangenome(&input, k).map_err(value_err)?;
    Ok(write_gfa(&pg.to_gfa()))
}

/// Encodes an annotated GFA (copy numbers in `cn:f`) as a QUBO.
#[pyfunction]
#[pyo3(signature = (gfa, kind = "oriented", alpha = 1.2, lambda1 = 10.0, lambda2 = 5.0))]
fn build_qubo(gfa: &str, kind: &str, alpha: f64, lambda1: f64, lambda2: f64) -> PyResult<Qubo> {
    let g = graph_from_text(gfa, 31)?;
    let kind: ProblemKind = kind.parse().map_err(value_err)?;
    Ok(Qubo {
        model: encode(&g, kind, alpha, lambda1, lambda2).map_err(value_err)?,
    })
}

/// Minimises a QUBO. Returns `{"energy": float, "bits": list[int]}`.
#[pyfunction]
#[pyo3(signature = (qubo, solver = "tabu", seed = 0, max_flips = None, time_limit = 5.0, gfa = None))]
fn solve<'py>(
    py: Python<'py>,
    qubo: &Qubo,
    solver: &str,
    seed: u64,
    max_flips: Option<u64>,
    time_limit: f64,
    gfa: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let name: SolverChoice = solver.parse().map_err(value_err)?;
    let g = match gfa {
        Some(text) => graph_from_text(text, 31)?,
        None if name == SolverChoice::OracleWalk => return Err(PyValueError::new_err("oracle-walk needs gfa")),
        None => AnnotatedGraph::new(31),
    };
    let mut section = SolverSection {
        name,
        ..SolverSection::default()
    };
    section.params.max_flips = max_flips;
    section.params.time_limit = time_limit;
    let sol = run_solver(&g, &qubo.model, &section, seed).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let d = PyDict::new(py);
    d.set_item("energy", sol.result.best_energy)?;
    d.set_item("bits", sol.result.best_x)?;
    Ok(d)
}

/// Decodes an assignment into `(path_string, sequence)` pairs, one per
/// walk segment.
#[pyfunction]
#[pyo3(signature = (gfa, qubo, bits, mode = "repair"))]
fn decode(gfa: &str, qubo: &Qubo, bits: Vec<u8>, mode: &str) -> PyResult<Vec<(String, String)>> {
    let g = graph_from_text(gfa, 31)?;
    let mode: DecodeMode = mode.parse().map_err(value_err)?;
    let layout = qubo
        .model
        .layout
        .as_ref()
        .ok_or_else(|| PyValueError::new_err("model has no layout"))?;
    let report = decode_bits(&g, layout, &bits, mode).map_err(value_err)?;
    report
        .segments()
        .filter(|w| !w.is_empty())
        .map(|w| Ok((render_path_string(&g, w), extract_sequence(&g, w).map_err(value_err)?)))
        .collect()
}

/// The seven assembly metrics of `contigs` against `truth`.
#[pyfunction]
#[pyo3(signature = (truth, contigs, seed_k = 31))]
fn evaluate<'py>(py: Python<'py>, truth: &str, contigs: Vec<String>, seed_k: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = evaluate_contigs(truth, &contigs, seed_k);
    let d = PyDict::new(py);
    d.set_item("pct_covered", r.pct_covered)?;
    d.set_item("pct_used", r.pct_used)?;
    d.set_item("contigs", r.contigs)?;
    d.set_item("breaks", r.breaks)?;
    d.set_item("indels_ge10", r.indels_ge10)?;
    d.set_item("diff_regions", r.diff_regions)?;
    d.set_item("pct_identity", r.pct_identity)?;
    Ok(d)
}

/// Runs the whole pipeline from TOML text; returns the summary table.
#[pyfunction]
#[pyo3(signature = (config, overrides = Vec::new()))]
fn run_pipeline(config: &str, overrides: Vec<String>) -> PyResult<String> {
    let cfg = PipelineConfig::from_toml(config, &overrides).map_err(value_err)?;
    let out = cmd_pipeline(&cfg).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(summary_tsv(&out.results))
}

#[pymodule]
fn qtangle_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Qubo>()?;
    m.add_function(wrap_pyfunction!(pangenome, m)?)?;
    m.add_function(wrap_pyfunction!(build_qubo, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
