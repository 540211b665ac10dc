//! Python bindings for the edge-cache redundancy model.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use edgecache::experiments::{self, ExperimentSpec};
use edgecache::{cost, layout, optimizer, simulator};

fn to_py(e: edgecache::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<edgecache::AccountingMode> {
    mode.parse().map_err(to_py)
}

/// Zipf-distributed file catalog.
type CurveRow = (usize, Option<f64>, Option<f64>, Option<f64>);

#[pyclass(name = "Catalog", frozen, from_py_object)]
#[derive(Clone)]
struct PyCatalog {
    inner: edgecache::Catalog,
}

#[pymethods]
impl PyCatalog {
    #[new]
    fn new(file_count: usize, exponent: f64) -> PyResult<Self> {
        Ok(PyCatalog {
            inner: edgecache::Catalog::new(file_count, exponent).map_err(to_py)?,
        })
    }

    #[getter]
    fn file_count(&self) -> usize {
        self.inner.file_count()
    }

    #[getter]
    fn exponent(&self) -> f64 {
        self.inner.exponent()
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn pmf(&self, rank: usize) -> PyResult<f64> {
        self.inner.pmf(rank).map_err(to_py)
    }

    fn tail_mass(&self, first: usize) -> PyResult<f64> {
        self.inner.tail_mass(first).map_err(to_py)
    }

    fn sample_rank(&self, u: f64) -> PyResult<usize> {
        self.inner.sample_rank(u).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Catalog(file_count={}, exponent={})",
            self.inner.file_count(),
            self.inner.exponent()
        )
    }
}

/// Station count, cache size and unit costs; everything except `R`.
#[pyclass(name = "Instance", frozen)]
struct PyInstance {
    inner: cost::Instance,
}

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (bs_count, cache_size, catalog, alpha=1.0, mu_br=4.0, mode="per-request"))]
    fn new(
        bs_count: usize,
        cache_size: usize,
        catalog: PyCatalog,
        alpha: f64,
        mu_br: f64,
        mode: &str,
    ) -> PyResult<Self> {
        let cost = edgecache::CostParams::new(alpha, mu_br, parse_mode(mode)?).map_err(to_py)?;
        Ok(PyInstance {
            inner: cost::Instance::new(bs_count, cache_size, catalog.inner, cost).map_err(to_py)?,
        })
    }

    #[getter]
    fn bs_count(&self) -> usize {
        self.inner.bs_count
    }

    #[getter]
    fn cache_size(&self) -> usize {
        self.inner.cache_size
    }

    /// `(c_ran, c_bh, c_total)` at redundant count `r`.
    fn evaluate(&self, r: usize) -> PyResult<(f64, f64, f64)> {
        let c = self.inner.evaluate(r).map_err(to_py)?;
        Ok((c.ran, c.backhaul, c.total))
    }

    fn total_cost(&self, r: usize) -> PyResult<f64> {
        self.inner.total_cost(r).map_err(to_py)
    }

    fn objective(&self, eta: f64) -> PyResult<f64> {
        optimizer::objective(eta, &self.inner).map_err(to_py)
    }

    /// List of `(r, c_ran, c_bh, c_total)`; infeasible points carry `None` costs.
    fn cost_curve(&self) -> Vec<CurveRow> {
        cost::cost_curve(&self.inner)
            .into_iter()
            .map(|p| match p.costs {
                Some(c) => (
                    p.redundant_count,
                    Some(c.ran),
                    Some(c.backhaul),
                    Some(c.total),
                ),
                None => (p.redundant_count, None, None, None),
            })
            .collect()
    }

    fn exhaustive_oracle(&self) -> PyResult<PyOptimResult> {
        optimizer::exhaustive_oracle(&self.inner)
            .map(PyOptimResult::from)
            .map_err(to_py)
    }

    /// Particle swarm search. `preset` is `"literal"` or `"practical"`.
    #[pyo3(signature = (preset="literal", seed=0, swarm_size=None, max_iters=None))]
    fn pso_optimize(
        &self,
        preset: &str,
        seed: u64,
        swarm_size: Option<usize>,
        max_iters: Option<usize>,
    ) -> PyResult<PyOptimResult> {
        let mut cfg = match preset {
            "literal" => edgecache::PsoConfig::literal(),
            "practical" => edgecache::PsoConfig::practical(),
            other => {
                return Err(PyValueError::new_err(format!(
                    "preset must be `literal` or `practical`, got `{other}`"
                )))
            }
        }
        .with_seed(seed);
        if let Some(m) = swarm_size {
            cfg.swarm_size = m;
        }
        if let Some(t) = max_iters {
            cfg.max_iters = t;
        }
        optimizer::pso_optimize(&self.inner, &cfg)
            .map(PyOptimResult::from)
            .map_err(to_py)
    }

    /// Simulates `requests` requests at redundant count `r`.
    #[pyo3(signature = (r, requests=1_000_000, seed=0))]
    fn run_trial(&self, r: usize, requests: usize, seed: u64) -> PyResult<PyTrialResult> {
        let params = self.inner.layout(r).map_err(to_py)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        simulator::run_trial(
            &params,
            &self.inner.catalog,
            &self.inner.cost,
            requests,
            &mut rng,
        )
        .map(|t| PyTrialResult { inner: t })
        .map_err(to_py)
    }
}

#[pyclass(name = "OptimResult", frozen, get_all)]
struct PyOptimResult {
    eta_opt: f64,
    r_opt: usize,
    cost_opt: f64,
    iterations_run: usize,
    evaluations: usize,
    trace: Option<Vec<f64>>,
}

impl From<edgecache::OptimResult> for PyOptimResult {
    fn from(r: edgecache::OptimResult) -> Self {
        PyOptimResult {
            eta_opt: r.eta_opt,
            r_opt: r.r_opt,
            cost_opt: r.cost_opt,
            iterations_run: r.iterations_run,
            evaluations: r.evaluations,
            trace: r.trace,
        }
    }
}

#[pymethods]
impl PyOptimResult {
    fn __repr__(&self) -> String {
        format!(
            "OptimResult(eta_opt={}, r_opt={}, cost_opt={})",
            self.eta_opt, self.r_opt, self.cost_opt
        )
    }
}

#[pyclass(name = "TrialResult", frozen)]
struct PyTrialResult {
    inner: edgecache::TrialResult,
}

#[pymethods]
impl PyTrialResult {
    #[getter]
    fn n_bs(&self) -> usize {
        self.inner.n_bs
    }

    #[getter]
    fn requests(&self) -> usize {
        self.inner.requests
    }

    #[getter]
    fn empirical_cost_per_request(&self) -> f64 {
        self.inner.empirical_cost_per_request
    }

    #[getter]
    fn analytic_cost_per_request(&self) -> f64 {
        self.inner.analytic_cost_per_request
    }

    #[getter]
    fn std_error(&self) -> f64 {
        self.inner.std_error
    }

    #[getter]
    fn local_hit_fraction(&self) -> f64 {
        self.inner.local_hit_fraction
    }

    #[getter]
    fn empirical_ran_fraction(&self) -> f64 {
        self.inner.empirical_ran_fraction
    }

    #[getter]
    fn empirical_backhaul_fraction(&self) -> f64 {
        self.inner.empirical_backhaul_fraction
    }

    fn z_score(&self) -> f64 {
        self.inner.z_score()
    }
}

/// Serpentine rank of BS-specific slot `slot` at station `bs` (1-based).
#[pyfunction]
fn slot_rank(
    bs_count: usize,
    cache_size: usize,
    redundant_count: usize,
    slot: usize,
    bs: usize,
) -> PyResult<usize> {
    layout::LayoutParams::new(bs_count, cache_size, redundant_count)
        .and_then(|p| p.slot_rank(slot, bs))
        .map_err(to_py)
}

/// Per-station lists of BS-specific ranks.
#[pyfunction]
fn build_layout(
    bs_count: usize,
    cache_size: usize,
    redundant_count: usize,
) -> PyResult<Vec<Vec<usize>>> {
    let p = layout::LayoutParams::new(bs_count, cache_size, redundant_count).map_err(to_py)?;
    Ok(layout::CacheLayout::build(p).per_bs_specific().to_vec())
}

#[pyfunction]
fn specific_mass(
    bs: usize,
    bs_count: usize,
    cache_size: usize,
    redundant_count: usize,
    catalog: PyCatalog,
) -> PyResult<f64> {
    let p = layout::LayoutParams::new(bs_count, cache_size, redundant_count).map_err(to_py)?;
    layout::specific_mass(bs, &p, &catalog.inner).map_err(to_py)
}

#[pyfunction]
fn backhaul_mass(
    bs_count: usize,
    cache_size: usize,
    redundant_count: usize,
    catalog: PyCatalog,
) -> PyResult<f64> {
    let p = layout::LayoutParams::new(bs_count, cache_size, redundant_count).map_err(to_py)?;
    layout::backhaul_mass(&p, &catalog.inner).map_err(to_py)
}

/// Runs a sweep described by a JSON object and returns the rendered document
/// (CSV unless the spec asks for JSON). The spec's `output` path is ignored.
#[pyfunction]
fn run_sweep(spec_json: &str) -> PyResult<String> {
    let spec = ExperimentSpec::from_json(spec_json).map_err(to_py)?;
    let result = experiments::run_sweep(&spec).map_err(to_py)?;
    Ok(experiments::emit(&result.rows, spec.format))
}

#[pymodule]
fn edgecache_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCatalog>()?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PyOptimResult>()?;
    m.add_class::<PyTrialResult>()?;
    m.add_function(wrap_pyfunction!(slot_rank, m)?)?;
    m.add_function(wrap_pyfunction!(build_layout, m)?)?;
    m.add_function(wrap_pyfunction!(specific_mass, m)?)?;
    m.add_function(wrap_pyfunction!(backhaul_mass, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
