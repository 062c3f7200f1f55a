//! Python bindings. Structured results cross the boundary as the same JSON
//! the command-line tool prints, decoded into plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::Value;

use wpshms::export::{category_json, info_json};
use wpshms::homs::{exceptional_max_r, hilbert_dim_oracle, weighted_compositions, LatticeK};
use wpshms::lattice::{chart_polytope, Weights};
use wpshms::mirror::{mirror_structure_constant, verify_functor};
use wpshms::morse::{build_category_with, check_associativity, compose, intersection_point, unit_vector, CategoryData, MorphismGen};
use wpshms::verify::{all_pass, parse_suites, run_suites, VerifyOptions};

fn err(e: wpshms::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn ser<T: serde::Serialize>(v: &T) -> PyResult<Value> {
    serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Weights `(q_0, ..., q_n)` of a weighted projective space, gcd 1.
#[pyclass(name = "Weights", frozen, module = "wpshms")]
struct PyWeights {
    inner: Weights,
}

#[pymethods]
impl PyWeights {
    #[new]
    fn new(q: Vec<i64>) -> PyResult<Self> {
        Weights::new(&q).map(|inner| PyWeights { inner }).map_err(err)
    }

    #[getter]
    fn q(&self) -> Vec<i64> {
        self.inner.q().to_vec()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn lcm(&self) -> i64 {
        self.inner.lcm()
    }

    #[getter]
    fn scale(&self) -> i64 {
        self.inner.scale()
    }

    fn info<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &info_json(&self.inner).map_err(err)?)
    }

    /// Exact vertices of the polytope in chart `i`, as fraction strings.
    fn chart_polytope(&self, i: usize) -> PyResult<Vec<Vec<String>>> {
        let chart = chart_polytope(&self.inner, i).map_err(err)?;
        Ok(chart.vertices.iter().map(|v| v.iter().map(|r| r.to_string()).collect()).collect())
    }

    /// All `K >= 0` with `Σ q_j k_j = d`, in lexicographic order.
    fn compositions(&self, d: i64) -> Vec<Vec<i64>> {
        weighted_compositions(&self.inner, d).into_iter().map(|k| k.k().to_vec()).collect()
    }

    fn hilbert_dim(&self, d: i64) -> u64 {
        hilbert_dim_oracle(&self.inner, d)
    }

    fn exceptional_max_r(&self) -> i64 {
        exceptional_max_r(&self.inner)
    }

    #[pyo3(signature = (a, b, k, chart = 0))]
    fn intersection_point(&self, a: i64, b: i64, k: Vec<i64>, chart: usize) -> PyResult<Vec<String>> {
        let k = LatticeK::new(&self.inner, k).map_err(err)?;
        let v = intersection_point(&self.inner, a, b, &k, chart).map_err(err)?;
        Ok(v.iter().map(|r| r.to_string()).collect())
    }

    /// Exact weight of `m_2(V_{ab;K_ab}, V_{bc;K_bc})` next to the mirror
    /// constant `c_ab c_bc / c_ac`.
    fn structure_constant<'py>(
        &self,
        py: Python<'py>,
        a: i64,
        b: i64,
        c: i64,
        k_ab: Vec<i64>,
        k_bc: Vec<i64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let w = &self.inner;
        let g_ab = MorphismGen::forward(w, a, b, k_ab, 0).map_err(err)?;
        let g_bc = MorphismGen::forward(w, b, c, k_bc, 0).map_err(err)?;
        let (dst, weight) = compose(w, &g_ab, &g_bc).map_err(err)?;
        let mirror = mirror_structure_constant(w, a, b, c, &g_ab.k, &g_bc.k).map_err(err)?;
        let v = serde_json::json!({
            "dst": ser(&dst.id())?,
            "weight": ser(&weight)?,
            "approx": weight.to_float(),
            "mirror": ser(&mirror)?,
            "equal": weight == mirror,
        });
        to_py(py, &v)
    }

    #[pyo3(signature = (base = 0, chart = 0))]
    fn category(&self, base: i64, chart: usize) -> PyResult<PyCategory> {
        let inner = build_category_with(&self.inner, base, chart, &unit_vector(&self.inner)).map_err(err)?;
        Ok(PyCategory { inner })
    }

    /// Runs verification suites and returns the report as a dict.
    #[pyo3(signature = (suite = "all", base = 0, chart = 0, seed = 0, grid = None))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        suite: &str,
        base: i64,
        chart: usize,
        seed: u64,
        grid: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let suites = parse_suites(suite).map_err(err)?;
        let opts = VerifyOptions { base, chart, grid, seed, ..Default::default() };
        let reports = py.detach(|| run_suites(&self.inner, &suites, &opts)).map_err(err)?;
        let v = serde_json::json!({ "pass": all_pass(&reports), "suites": ser(&reports)? });
        to_py(py, &v)
    }

    fn __repr__(&self) -> String {
        let q: Vec<String> = self.inner.q().iter().map(|x| x.to_string()).collect();
        format!("Weights({})", q.join(", "))
    }
}

/// The Morse category on the exceptional collection.
#[pyclass(name = "Category", frozen, module = "wpshms")]
struct PyCategory {
    inner: CategoryData,
}

#[pymethods]
impl PyCategory {
    #[getter]
    fn objects(&self) -> Vec<i64> {
        self.inner.object_labels()
    }

    fn hom_dim(&self, a: i64, b: i64) -> PyResult<usize> {
        self.inner
            .homs
            .get(&(a, b))
            .map(|h| h.dim)
            .ok_or_else(|| PyValueError::new_err(format!("no objects {a}, {b} in the collection")))
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &category_json(&self.inner))
    }

    fn is_associative(&self) -> bool {
        check_associativity(&self.inner)
    }

    #[pyo3(signature = (seed = 0, samples = 5))]
    fn verify_functor<'py>(&self, py: Python<'py>, seed: u64, samples: usize) -> PyResult<Bound<'py, PyAny>> {
        let report = verify_functor(&self.inner, seed, samples).map_err(err)?;
        to_py(py, &ser(&report)?)
    }

    fn __len__(&self) -> usize {
        self.inner.objects.len()
    }
}

#[pymodule]
#[pyo3(name = "wpshms")]
fn wpshms_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWeights>()?;
    m.add_class::<PyCategory>()?;
    Ok(())
}
