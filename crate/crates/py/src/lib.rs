//! Python bindings for `wittmod`.
//!
//! Modules, vectors and configurations use the same JSON shapes as the CLI
//! configuration files; they are passed as plain Python dicts and lists.
//! Rationals are strings such as `"1/2"` (ints are accepted on input).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::{json, Map, Value};

use wittmod::exactlinalg::{LatticeVector, QVector};
use wittmod::glmodules::{verify_gl_bracket, GlModuleSpec};
use wittmod::structure::{derham_map, derham_target, iso_criterion, IsoOutcome, NotIsomorphicReason};
use wittmod::wittaction::{act, verify_representation, FSpaceConfig, WittOperator};
use wittmod_cli::config::{fvector_json, module_json, parse_space, parse_vector, qvector_json};
use wittmod_cli::{Command, RunConfig, TOOL_VERSION};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_value(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    if let Ok(text) = obj.extract::<String>() {
        if let Ok(v) = serde_json::from_str(&text) {
            return Ok(v);
        }
    }
    let dumped: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&dumped).map_err(value_error)
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn parse_command(name: &str) -> PyResult<Command> {
    let all = [
        Command::VerifyRep,
        Command::VerifyGl,
        Command::Classify,
        Command::Closure,
        Command::Cyclic,
        Command::CertifyReducible,
        Command::IsoCheck,
        Command::ReplayClaims,
    ];
    all.into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown command {name:?}")))
}

/// A validated run configuration.
#[pyclass(name = "Config", module = "wittmod", frozen)]
struct PyConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyConfig {
    /// Accepts a dict or a JSON string.
    #[new]
    fn new(source: &Bound<'_, PyAny>) -> PyResult<Self> {
        let v = to_value(source)?;
        let inner = RunConfig::from_json(&v).map_err(value_error)?;
        Ok(PyConfig { inner })
    }

    /// Canonical form, as echoed in reports.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_json())
    }

    fn space(&self) -> PySpace {
        PySpace {
            inner: self.inner.space.clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!("Config({})", self.inner.to_json())
    }
}

/// Finished run of one command.
#[pyclass(name = "Report", module = "wittmod", frozen, get_all)]
struct PyReport {
    command: String,
    outcome: String,
    exit_code: i32,
    elapsed_ms: u64,
    text: String,
}

#[pymethods]
impl PyReport {
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        py.import("json")?.call_method1("loads", (self.text.as_str(),))
    }

    fn __repr__(&self) -> String {
        format!("Report(command={:?}, outcome={:?}, exit_code={})", self.command, self.outcome, self.exit_code)
    }
}

/// Runs a CLI command such as `"verify-rep"` without touching the cache.
#[pyfunction]
#[pyo3(signature = (command, config, threads=None))]
fn run(py: Python<'_>, command: &str, config: &Bound<'_, PyAny>, threads: Option<usize>) -> PyResult<PyReport> {
    let command = parse_command(command)?;
    let cfg = match config.cast::<PyConfig>() {
        Ok(c) => c.get().inner.clone(),
        Err(_) => PyConfig::new(config)?.inner,
    };
    let report = py.detach(|| wittmod_cli::run(command, &cfg, threads)).map_err(value_error)?;
    Ok(PyReport {
        command: command.name().to_string(),
        outcome: report.outcome.outcome.to_string(),
        exit_code: report.exit_code(),
        elapsed_ms: report.elapsed_ms as u64,
        text: report.render(),
    })
}

/// `F^alpha_b(V)` for a given `alpha` and module.
#[pyclass(name = "Space", module = "wittmod", frozen)]
struct PySpace {
    inner: FSpaceConfig,
}

impl PySpace {
    fn vector(&self, v: &Bound<'_, PyAny>) -> PyResult<wittmod::wittaction::FVector> {
        parse_vector(&to_value(v)?, "vector", &self.inner).map_err(value_error)
    }
}

#[pymethods]
impl PySpace {
    /// `alpha` is a list of rationals, `module` a module dict such as
    /// `{"variant": "exterior", "k": 1, "b": "1"}`.
    #[new]
    fn new(alpha: &Bound<'_, PyAny>, module: &Bound<'_, PyAny>) -> PyResult<Self> {
        let alpha = to_value(alpha)?;
        let d = alpha.as_array().map_or(0, Vec::len);
        if d < 2 {
            return Err(PyValueError::new_err("alpha needs at least two entries"));
        }
        let mut m = Map::new();
        m.insert("alpha".into(), alpha);
        m.insert("module".into(), to_value(module)?);
        let inner = parse_space(&m, "", d).map_err(value_error)?;
        if let GlModuleSpec::Explicit(m) = &inner.module {
            GlModuleSpec::explicit(m.d, m.b.clone(), m.units.clone()).map_err(value_error)?;
        }
        Ok(PySpace { inner })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn alpha<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &qvector_json(&self.inner.alpha))
    }

    #[getter]
    fn module<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &module_json(&self.inner.module))
    }

    /// Dimension of `V`, or `None` for Nilsson modules.
    #[getter]
    fn dimension(&self) -> Option<usize> {
        self.inner.module.dimension()
    }

    /// `D(u, r)` applied to a vector given as a list of
    /// `{"n": [...], "key": [...], "coeff": "p/q"}` terms.
    fn act<'py>(
        &self,
        py: Python<'py>,
        u: &Bound<'py, PyAny>,
        r: Vec<i64>,
        vector: &Bound<'py, PyAny>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let u = wittmod_cli::config::rationals(&to_value(u)?, "u").map_err(value_error)?;
        let op = WittOperator::new(QVector(u), LatticeVector(r)).map_err(value_error)?;
        let x = self.vector(vector)?;
        if op.dim() != self.inner.d() {
            return Err(PyValueError::new_err(format!("operator has dimension {}, expected {}", op.dim(), self.inner.d())));
        }
        to_py(py, &fvector_json(&act(&self.inner, &op, &x)))
    }

    /// Image under the de Rham map; the module must be `Exterior(k)` with `b = k`.
    fn derham<'py>(&self, py: Python<'py>, vector: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let x = self.vector(vector)?;
        let y = derham_map(&self.inner, &x).map_err(value_error)?;
        to_py(py, &fvector_json(&y))
    }

    /// Target space of the de Rham map.
    fn derham_target(&self) -> PyResult<PySpace> {
        Ok(PySpace {
            inner: derham_target(&self.inner).map_err(value_error)?,
        })
    }

    /// Commutator identity on `D(e_i, r)`, `|r| <= radius`, and degrees
    /// `|n| <= lattice`. Returns `None` on success, otherwise the first
    /// failing site.
    #[pyo3(signature = (radius=1, lattice=1, degree_bound=None))]
    fn verify_representation<'py>(
        &self,
        py: Python<'py>,
        radius: i64,
        lattice: i64,
        degree_bound: Option<u32>,
    ) -> PyResult<Option<Bound<'py, PyAny>>> {
        let ops = WittOperator::generating_set(self.inner.d(), radius);
        let degrees = LatticeVector::cube(self.inner.d(), lattice);
        let check = py
            .detach(|| verify_representation(&self.inner, &ops, &degrees, degree_bound))
            .map_err(value_error)?;
        match check {
            wittmod::wittaction::RepresentationCheck::Pass { .. } => Ok(None),
            wittmod::wittaction::RepresentationCheck::Counterexample(c) => {
                let v = json!({
                    "first": format!("{:?}", ops[c.first]),
                    "second": format!("{:?}", ops[c.second]),
                    "n": c.degree.0,
                    "key": c.key.to_list(),
                });
                Ok(Some(to_py(py, &v)?))
            }
        }
    }

    /// gl_d bracket relations on the module.
    #[pyo3(signature = (degree_bound=None))]
    fn verify_gl(&self, degree_bound: Option<u32>) -> PyResult<bool> {
        Ok(verify_gl_bracket(&self.inner.module, degree_bound).map_err(value_error)?.passed())
    }

    /// `(isomorphic, reason)`; `reason` is `None` when isomorphic.
    fn is_isomorphic(&self, other: &PySpace) -> PyResult<(bool, Option<String>)> {
        Ok(match iso_criterion(&self.inner, &other.inner).map_err(value_error)? {
            IsoOutcome::Isomorphic => (true, None),
            IsoOutcome::NotIsomorphic(NotIsomorphicReason::BMismatch { .. }) => (false, Some("b_mismatch".into())),
            IsoOutcome::NotIsomorphic(NotIsomorphicReason::WeightCoset { .. }) => (false, Some("weight_coset".into())),
            IsoOutcome::NotIsomorphic(NotIsomorphicReason::ModuleMismatch(_)) => {
                (false, Some("module_mismatch".into()))
            }
        })
    }

    fn __repr__(&self) -> String {
        format!("Space(alpha={}, module={})", qvector_json(&self.inner.alpha), self.inner.module.describe())
    }
}

#[pymodule]
#[pyo3(name = "wittmod")]
fn wittmod_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", TOOL_VERSION)?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PySpace>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
