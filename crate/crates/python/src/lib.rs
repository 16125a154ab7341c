use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use repday::clustering::{kmeans_points, KMeansConfig};
use repday::extremes::ModificationMode;
use repday::lp::{self, verify_optimality, LpStatus, Sense, VarId};
use repday::pipeline::{run_aggregated, sweep_grid_limits, GridSpec, Method, PipelineError, RunConfig, RunReport, SweepResult};
use repday::plot::{design_bar_chart, sweep_line_chart};
use repday::resys::DesignVariables;
use repday::synthgen::{self, SynthConfig};
use repday::timeseries::{self, CsvSchema};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pipeline_err(e: PipelineError) -> PyErr {
    match e {
        PipelineError::InvalidConfig(_) => value_err(e),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn design_dict(dv: &DesignVariables) -> BTreeMap<&'static str, f64> {
    DesignVariables::NAMES.iter().copied().zip(dv.as_array()).collect()
}

/// Hourly multi-attribute profiles over whole days.
#[pyclass(name = "Dataset", frozen)]
struct PyDataset {
    inner: timeseries::Dataset,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn load_csv(path: PathBuf) -> PyResult<Self> {
        let inner = timeseries::load_csv(&path, &CsvSchema::default()).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_csv(&path).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn n_days(&self) -> usize {
        self.inner.n_days()
    }

    #[getter]
    fn attribute_names(&self) -> Vec<String> {
        self.inner.attribute_names()
    }

    /// Mean of each attribute over all hours.
    fn means(&self) -> Vec<f64> {
        self.inner.means()
    }

    /// Hourly values of one attribute.
    fn values(&self, name: &str) -> PyResult<Vec<f64>> {
        self.inner
            .attribute(name)
            .map(|a| a.values.clone())
            .ok_or_else(|| value_err(format!("no attribute `{name}`")))
    }

    fn __len__(&self) -> usize {
        self.inner.n_days()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n_days={}, attributes={:?})", self.inner.n_days(), self.inner.attribute_names())
    }
}

/// Synthetic winter dataset; `planted` keeps the built-in cold spell.
#[pyfunction]
#[pyo3(signature = (n_days = 90, seed = 7, planted = true))]
fn generate(n_days: usize, seed: u64, planted: bool) -> PyResult<PyDataset> {
    let mut config = SynthConfig {
        n_days,
        seed,
        ..SynthConfig::default()
    };
    if !planted {
        config.planted_extremes.clear();
    }
    let inner = synthgen::generate(&config).map_err(value_err)?;
    Ok(PyDataset { inner })
}

/// Dataset with one day at or beyond every extreme; returns it with that
/// day's index.
#[pyfunction]
#[pyo3(signature = (n_days = 90, seed = 7))]
fn dominance_dataset(n_days: usize, seed: u64) -> PyResult<(PyDataset, usize)> {
    let config = SynthConfig {
        n_days,
        seed,
        ..SynthConfig::default()
    };
    let (inner, day) = synthgen::dominance_dataset(&config).map_err(value_err)?;
    Ok((PyDataset { inner }, day))
}

#[pyclass(name = "RunConfig", from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[new]
    #[pyo3(signature = (k = 5, n_init = 10_000, seed = 0, method = "feasibility", modification = "steps", grid_fraction = 1.0, virtual_days = false))]
    fn new(
        k: usize,
        n_init: usize,
        seed: u64,
        method: &str,
        modification: &str,
        grid_fraction: f64,
        virtual_days: bool,
    ) -> PyResult<Self> {
        let method: Method = method.parse().map_err(value_err)?;
        let modification = match modification {
            "steps" => ModificationMode::FeasibilitySteps,
            "append" => ModificationMode::Append,
            other => return Err(value_err(format!("unknown modification `{other}` (steps, append)"))),
        };
        Ok(Self {
            inner: RunConfig {
                k,
                n_init,
                seed,
                method,
                modification,
                grid: GridSpec::Fraction(grid_fraction),
                virtual_days,
                ..RunConfig::default()
            },
        })
    }

    /// Full configuration, including technology parameters, as JSON.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(value_err)
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __repr__(&self) -> String {
        format!(
            "RunConfig(k={}, method={:?}, grid={:?})",
            self.inner.k, self.inner.method, self.inner.grid
        )
    }
}

#[pyclass(name = "RunReport", frozen)]
struct PyRunReport {
    inner: RunReport,
}

#[pymethods]
impl PyRunReport {
    #[getter]
    fn total_cost(&self) -> f64 {
        self.inner.total_cost()
    }

    #[getter]
    fn f_ref(&self) -> Option<f64> {
        self.inner.f_ref
    }

    #[getter]
    fn f_operations(&self) -> Option<f64> {
        self.inner.f_operations
    }

    #[getter]
    fn accuracy(&self) -> Option<f64> {
        self.inner.accuracy
    }

    #[getter]
    fn c_lim(&self) -> f64 {
        self.inner.c_lim
    }

    #[getter]
    fn feasible_full_year(&self) -> bool {
        self.inner.feasible_full_year
    }

    #[getter]
    fn max_slack(&self) -> f64 {
        self.inner.max_slack
    }

    #[getter]
    fn n_extremes(&self) -> usize {
        self.inner.n_extremes
    }

    /// Day indices of the extreme periods; `None` marks a virtual day.
    #[getter]
    fn extreme_days(&self) -> Vec<Option<usize>> {
        self.inner.extreme_days.iter().map(|d| d.day_index).collect()
    }

    #[getter]
    fn design(&self) -> BTreeMap<&'static str, f64> {
        design_dict(&self.inner.dv_repr)
    }

    #[getter]
    fn reference_design(&self) -> Option<BTreeMap<&'static str, f64>> {
        self.inner.dv_ref.as_ref().map(design_dict)
    }

    #[getter]
    fn capex_share(&self) -> Option<f64> {
        self.inner.costs.map(|c| c.capex_share)
    }

    #[getter]
    fn opex_share(&self) -> Option<f64> {
        self.inner.costs.map(|c| c.opex_share)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(pipeline_err)
    }

    fn design_csv(&self) -> String {
        self.inner.design_csv()
    }

    fn design_svg(&self) -> String {
        design_bar_chart(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "RunReport(total_cost={:.2}, n_extremes={}, feasible_full_year={})",
            self.inner.total_cost(),
            self.inner.n_extremes,
            self.inner.feasible_full_year
        )
    }
}

/// Cluster, select extreme days, design and operate over the full data.
#[pyfunction]
#[pyo3(signature = (dataset, config = None))]
fn run(py: Python<'_>, dataset: &PyDataset, config: Option<PyRunConfig>) -> PyResult<PyRunReport> {
    let config = config.map(|c| c.inner).unwrap_or_default();
    let data = &dataset.inner;
    let inner = py
        .detach(|| run_aggregated(data, &config, None, &lp::BundledSimplex::default()))
        .map_err(pipeline_err)?;
    Ok(PyRunReport { inner })
}

#[pyclass(name = "SweepResult", frozen)]
struct PySweepResult {
    inner: SweepResult,
}

#[pymethods]
impl PySweepResult {
    #[getter]
    fn c_lim_full(&self) -> f64 {
        self.inner.c_lim_full
    }

    /// One `(fraction, report or None, status)` per point.
    #[getter]
    fn rows(&self) -> Vec<(f64, Option<PyRunReport>, String)> {
        self.inner
            .rows
            .iter()
            .map(|r| {
                let report = r.report.clone().map(|inner| PyRunReport { inner });
                (r.fraction, report, r.status.clone())
            })
            .collect()
    }

    fn all_ok(&self) -> bool {
        self.inner.all_ok()
    }

    fn cost_monotone(&self) -> bool {
        self.inner.cost_monotone()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_svg(&self) -> String {
        sweep_line_chart(&self.inner)
    }
}

/// Run `config` at each grid fraction.
#[pyfunction]
#[pyo3(signature = (dataset, fractions, config = None))]
fn sweep(py: Python<'_>, dataset: &PyDataset, fractions: Vec<f64>, config: Option<PyRunConfig>) -> PyResult<PySweepResult> {
    let config = config.map(|c| c.inner).unwrap_or_default();
    let data = &dataset.inner;
    let inner = py
        .detach(|| sweep_grid_limits(data, &config, &fractions, &lp::BundledSimplex::default()))
        .map_err(pipeline_err)?;
    Ok(PySweepResult { inner })
}

/// Multi-start k-means; returns centroids, assignments and SSD.
#[pyfunction]
#[pyo3(signature = (points, k, n_init = 100, seed = 0))]
fn kmeans(py: Python<'_>, points: Vec<Vec<f64>>, k: usize, n_init: usize, seed: u64) -> PyResult<(Vec<Vec<f64>>, Vec<usize>, f64)> {
    let config = KMeansConfig::new(k, seed).with_n_init(n_init);
    let res = py.detach(|| kmeans_points(&points, &config)).map_err(value_err)?;
    Ok((res.centroids, res.assignments, res.ssd))
}

/// Minimization LP with bounded variables, solved by the bundled simplex.
#[pyclass(name = "LinearProgram")]
#[derive(Default)]
struct PyLinearProgram {
    inner: lp::LinearProgram,
}

#[pymethods]
impl PyLinearProgram {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    #[pyo3(signature = (name, lower = 0.0, upper = f64::INFINITY, cost = 0.0))]
    fn add_variable(&mut self, name: String, lower: f64, upper: f64, cost: f64) -> usize {
        let v = self.inner.add_variable(name, lower, upper);
        if cost != 0.0 {
            self.inner.add_objective(v, cost);
        }
        v.0
    }

    /// `sense` is one of `<=`, `>=`, `==`.
    fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, sense: &str, rhs: f64) -> PyResult<usize> {
        let sense = match sense {
            "<=" => Sense::Le,
            ">=" => Sense::Ge,
            "==" | "=" => Sense::Eq,
            other => return Err(value_err(format!("unknown sense `{other}`"))),
        };
        let n = self.inner.variables.len();
        if let Some(&(j, _)) = coeffs.iter().find(|(j, _)| *j >= n) {
            return Err(value_err(format!("no variable {j}")));
        }
        let coeffs = coeffs.into_iter().map(|(j, a)| (VarId(j), a)).collect();
        Ok(self.inner.add_constraint(coeffs, sense, rhs).0)
    }

    /// Returns a dict with status, objective, x, duals and duality_gap.
    fn solve<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let sol = lp::solve(&self.inner).map_err(value_err)?;
        let out = pyo3::types::PyDict::new(py);
        let status = match sol.status {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        };
        out.set_item("status", status)?;
        out.set_item("objective", sol.objective)?;
        if sol.is_optimal() {
            out.set_item("duality_gap", verify_optimality(&self.inner, &sol).duality_gap)?;
        }
        out.set_item("x", sol.primal)?;
        out.set_item("duals", sol.duals)?;
        Ok(out)
    }
}

#[pymodule]
#[pyo3(name = "repday")]
fn repday_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyRunReport>()?;
    m.add_class::<PySweepResult>()?;
    m.add_class::<PyLinearProgram>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(dominance_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    Ok(())
}
