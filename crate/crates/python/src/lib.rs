//! Python bindings for the name parser, the generation pipeline helpers and the
//! validation task store.

use std::sync::Arc;

use forge_core::annotation_pipeline::mock::MockClient;
use forge_core::annotation_pipeline::{
    assemble_prompt as core_assemble_prompt, filter_candidate as core_filter,
    parse_llm_output as core_parse_output, read_candidates, run_pipeline, CandidateRecord, DirSink,
    GenerationPolicy,
};
use forge_core::metadata_serializer::serialize;
use forge_core::molgraph::{self, Difficulty};
use forge_core::validation_service::mock::{NameEchoValidator, QueuedValidator};
use forge_core::validation_service::{
    default_validator_route, TaskState, TaskStore, DEFAULT_PASS_K,
};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(value_err)
}

/// A parsed name: tokens, metadata tree and structure.
#[pyclass(frozen, module = "forge")]
struct ParsedName {
    inner: forge_core::ParsedName,
}

#[pymethods]
impl ParsedName {
    /// `(text, class)` pairs in order.
    #[getter]
    fn tokens(&self) -> Vec<(String, String)> {
        self.inner
            .tokens
            .iter()
            .map(|t| (t.text.clone(), format!("{:?}", t.kind)))
            .collect()
    }

    #[getter]
    fn metadata_xml(&self) -> String {
        serialize(&self.inner.tree)
    }

    #[getter]
    fn notation(&self) -> PyResult<String> {
        molgraph::emit_linear(&self.inner.graph).map_err(value_err)
    }

    #[getter]
    fn canonical(&self) -> PyResult<String> {
        molgraph::canonical_form(&self.inner.graph).map_err(value_err)
    }

    #[getter]
    fn heavy_atoms(&self) -> usize {
        self.inner.graph.heavy_atom_count()
    }

    #[getter]
    fn difficulty(&self) -> &'static str {
        molgraph::classify_difficulty(&self.inner.graph).as_str()
    }

    fn __repr__(&self) -> String {
        format!(
            "ParsedName(heavy_atoms={}, difficulty={})",
            self.heavy_atoms(),
            self.difficulty()
        )
    }
}

#[pyfunction]
fn parse_name(name: &str) -> PyResult<ParsedName> {
    forge_core::parse_name(name)
        .map(|inner| ParsedName { inner })
        .map_err(value_err)
}

#[pyfunction]
fn metadata_xml(name: &str) -> PyResult<String> {
    Ok(serialize(
        &forge_core::parse_name(name).map_err(value_err)?.tree,
    ))
}

#[pyfunction]
fn classify_difficulty(notation: &str) -> PyResult<&'static str> {
    molgraph::classify_difficulty_notation(notation)
        .map(Difficulty::as_str)
        .map_err(value_err)
}

#[pyfunction]
fn canonical_form(notation: &str) -> PyResult<String> {
    molgraph::canonical_form(&molgraph::parse_linear(notation).map_err(value_err)?)
        .map_err(value_err)
}

#[pyfunction]
fn graphs_equivalent(a: &str, b: &str) -> PyResult<bool> {
    let ga = molgraph::parse_linear(a).map_err(value_err)?;
    let gb = molgraph::parse_linear(b).map_err(value_err)?;
    molgraph::graphs_equivalent(&ga, &gb).map_err(value_err)
}

#[pyfunction]
fn count_heavy_atoms(notation: &str) -> PyResult<usize> {
    molgraph::count_heavy_atoms(notation).map_err(value_err)
}

/// The first exclusion rule a candidate fails, or `None` if it is accepted.
#[pyfunction]
#[pyo3(signature = (name, notation))]
fn filter_candidate(name: Option<String>, notation: &str) -> Option<String> {
    let c = CandidateRecord {
        id: String::new(),
        iupac_name: name,
        reference_notation: notation.into(),
        source: String::new(),
    };
    core_filter(&c).reason.map(|r| format!("{r:?}"))
}

#[pyfunction]
fn assemble_prompt(name: &str, notation: &str) -> PyResult<String> {
    let parsed = forge_core::parse_name(name).map_err(value_err)?;
    Ok(core_assemble_prompt(name, notation, &parsed.tree))
}

/// `(description, heavy_atom_count)` from raw generator output.
#[pyfunction]
fn parse_llm_output(raw: &str) -> PyResult<(String, usize)> {
    core_parse_output(raw).map_err(value_err)
}

/// Runs the pipeline over a candidates file with the scripted generator and returns
/// the run report as JSON.
#[pyfunction]
#[pyo3(signature = (input, out_dir, script = None, policy = None))]
fn run_mock_pipeline(
    input: &str,
    out_dir: &str,
    script: Option<&str>,
    policy: Option<&str>,
) -> PyResult<String> {
    let policy = match policy {
        Some(text) => text.parse::<GenerationPolicy>().map_err(value_err)?,
        None => GenerationPolicy::default(),
    };
    let client = match script {
        Some(s) => MockClient::from_script(s).map_err(value_err)?,
        None => MockClient::default(),
    };
    let candidates = read_candidates(input).map_err(|e| PyIOError::new_err(e.to_string()))?;
    let mut sink = DirSink::create(out_dir).map_err(|e| PyIOError::new_err(e.to_string()))?;
    json(&run_pipeline(candidates, &policy, &client, &mut sink))
}

/// Validation task store, in memory or backed by a directory.
#[pyclass(frozen, module = "forge")]
struct ValidationStore {
    inner: Arc<TaskStore>,
}

#[pymethods]
impl ValidationStore {
    #[new]
    #[pyo3(signature = (path = None))]
    fn new(path: Option<&str>) -> PyResult<Self> {
        let store = match path {
            Some(p) => TaskStore::open(p).map_err(value_err)?,
            None => TaskStore::in_memory(),
        };
        Ok(ValidationStore {
            inner: Arc::new(store),
        })
    }

    fn add_task(
        &self,
        sample_id: &str,
        description: &str,
        difficulty: &str,
        notation: &str,
    ) -> PyResult<()> {
        let d: Difficulty = difficulty.parse().map_err(value_err)?;
        self.inner
            .add_task(sample_id, description, d, notation)
            .map_err(value_err)
    }

    /// Model validation with scripted answers taken in order, or by reading the
    /// compound name out of mock descriptions when `answers` is omitted.
    #[pyo3(signature = (answers = None, k = DEFAULT_PASS_K))]
    fn run_mock_llm_validation(&self, answers: Option<Vec<String>>, k: usize) -> PyResult<usize> {
        let route = default_validator_route();
        match answers {
            Some(a) => self.inner.run_llm_validation(
                &QueuedValidator::answers(a.iter().map(String::as_str)),
                k,
                &route,
                1,
            ),
            None => self
                .inner
                .run_llm_validation(&NameEchoValidator, k, &route, 1),
        }
        .map_err(value_err)
    }

    #[pyo3(signature = (state = None, validator = None))]
    fn list(&self, state: Option<&str>, validator: Option<&str>) -> PyResult<String> {
        let state = state
            .map(str::parse::<TaskState>)
            .transpose()
            .map_err(value_err)?;
        json(&self.inner.list(state, validator))
    }

    fn claim(&self, sample_id: &str, validator: &str) -> PyResult<String> {
        json(&self.inner.claim(sample_id, validator).map_err(value_err)?)
    }

    fn view(&self, sample_id: &str, validator: &str) -> PyResult<String> {
        json(&self.inner.view(sample_id, validator).map_err(value_err)?)
    }

    /// `(matched, remaining, task_state)`.
    fn submit_attempt(
        &self,
        sample_id: &str,
        validator: &str,
        notation: &str,
    ) -> PyResult<(bool, usize, String)> {
        let o = self
            .inner
            .submit_attempt(sample_id, validator, notation)
            .map_err(value_err)?;
        Ok((o.matched, o.remaining, o.task_state.to_string()))
    }

    fn state(&self, sample_id: &str) -> PyResult<String> {
        Ok(self
            .inner
            .get(sample_id)
            .map_err(value_err)?
            .state
            .to_string())
    }

    fn report(&self) -> PyResult<String> {
        json(&self.inner.report())
    }

    fn snapshot(&self) -> PyResult<()> {
        self.inner.snapshot().map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pymodule]
fn forge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ParsedName>()?;
    m.add_class::<ValidationStore>()?;
    m.add_function(wrap_pyfunction!(parse_name, m)?)?;
    m.add_function(wrap_pyfunction!(metadata_xml, m)?)?;
    m.add_function(wrap_pyfunction!(classify_difficulty, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_form, m)?)?;
    m.add_function(wrap_pyfunction!(graphs_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(count_heavy_atoms, m)?)?;
    m.add_function(wrap_pyfunction!(filter_candidate, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(parse_llm_output, m)?)?;
    m.add_function(wrap_pyfunction!(run_mock_pipeline, m)?)?;
    Ok(())
}
