//! Python extension module exposing the core types and operations.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use normforge_core as core;

fn to_py_err(error: core::Error) -> PyErr {
    match error {
        core::Error::OutOfRange { .. }
        | core::Error::BenefitNotAboveCost
        | core::Error::DimensionMismatch { .. } => PyValueError::new_err(error.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

trait IntoPyResult<T> {
    fn into_py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for core::Result<T> {
    fn into_py(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

/// Economic and environment parameters of the community.
#[pyclass(name = "CommunityParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyCommunityParams {
    inner: core::CommunityParams,
}

#[pymethods]
impl PyCommunityParams {
    #[new]
    #[pyo3(signature = (benefit, cost, discount, turnover, report_error, whitewash_cost=None))]
    fn new(
        benefit: f64,
        cost: f64,
        discount: f64,
        turnover: f64,
        report_error: f64,
        whitewash_cost: Option<f64>,
    ) -> PyResult<Self> {
        let mut inner = core::CommunityParams::new(benefit, cost, discount, turnover, report_error)
            .into_py()?;
        if let Some(value) = whitewash_cost {
            inner = inner.with_whitewash_cost(value).into_py()?;
        }
        Ok(Self { inner })
    }

    #[getter]
    fn benefit(&self) -> f64 {
        self.inner.benefit
    }

    #[getter]
    fn cost(&self) -> f64 {
        self.inner.cost
    }

    #[getter]
    fn discount(&self) -> f64 {
        self.inner.discount
    }

    #[getter]
    fn turnover(&self) -> f64 {
        self.inner.turnover
    }

    #[getter]
    fn report_error(&self) -> f64 {
        self.inner.report_error
    }

    #[getter]
    fn whitewash_cost(&self) -> Option<f64> {
        self.inner.whitewash_cost
    }

    /// Weight on future payoffs: discount * (1 - turnover).
    fn delta(&self) -> f64 {
        self.inner.delta()
    }

    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    fn __repr__(&self) -> String {
        format!(
            "CommunityParams(benefit={}, cost={}, discount={}, turnover={}, report_error={}, whitewash_cost={:?})",
            self.inner.benefit,
            self.inner.cost,
            self.inner.discount,
            self.inner.turnover,
            self.inner.report_error,
            self.inner.whitewash_cost,
        )
    }
}

/// Reputation labels, punishment drop, and entry label.
#[pyclass(name = "ReputationScheme", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyReputationScheme {
    inner: core::ReputationScheme,
}

#[pymethods]
impl PyReputationScheme {
    #[new]
    #[pyo3(signature = (max_reputation, punishment_length=None, entry_reputation=None))]
    fn new(
        max_reputation: usize,
        punishment_length: Option<usize>,
        entry_reputation: Option<usize>,
    ) -> PyResult<Self> {
        let inner = core::ReputationScheme::new(
            max_reputation,
            punishment_length.unwrap_or(max_reputation),
            entry_reputation.unwrap_or(max_reputation),
        )
        .into_py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn max_reputation(&self) -> usize {
        self.inner.max_reputation()
    }

    #[getter]
    fn punishment_length(&self) -> usize {
        self.inner.punishment_length()
    }

    #[getter]
    fn entry_reputation(&self) -> usize {
        self.inner.entry_reputation()
    }

    fn __repr__(&self) -> String {
        format!(
            "ReputationScheme(max_reputation={}, punishment_length={}, entry_reputation={})",
            self.inner.max_reputation(),
            self.inner.punishment_length(),
            self.inner.entry_reputation(),
        )
    }
}

/// Server action matrix over (server reputation, client reputation).
#[pyclass(name = "SocialStrategy", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PySocialStrategy {
    inner: core::SocialStrategy,
}

#[pymethods]
impl PySocialStrategy {
    /// Parses a row-major F/D matrix such as "DF/FF" or "DFFF".
    #[new]
    fn new(matrix: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core::SocialStrategy::parse(matrix).into_py()?,
        })
    }

    /// Looks up a named strategy from the catalog.
    #[staticmethod]
    fn named(name: &str, max_reputation: usize) -> PyResult<Self> {
        core::catalog::by_name(name, max_reputation)
            .map(|inner| Self { inner })
            .ok_or_else(|| {
                PyValueError::new_err(format!(
                    "unknown strategy {name:?}; expected one of {}",
                    core::catalog::STRATEGY_NAMES.join(", ")
                ))
            })
    }

    /// Decodes a canonical index for the given matrix side.
    #[staticmethod]
    fn from_index(index: u128, side: usize) -> PyResult<Self> {
        Ok(Self {
            inner: core::SocialStrategy::from_index(index, side).into_py()?,
        })
    }

    #[getter]
    fn matrix(&self) -> String {
        self.inner.matrix_string()
    }

    #[getter]
    fn index(&self) -> u128 {
        self.inner.canonical_index()
    }

    #[getter]
    fn side(&self) -> usize {
        self.inner.side()
    }

    /// "F" or "D" for one (server, client) pair.
    fn action(&self, server: usize, client: usize) -> PyResult<String> {
        if server >= self.inner.side() || client >= self.inner.side() {
            return Err(PyValueError::new_err("reputation out of range"));
        }
        Ok(self.inner.action(server, client).symbol().to_string())
    }

    fn __repr__(&self) -> String {
        format!("SocialStrategy({:?})", self.inner.to_string())
    }
}

/// A reputation scheme plus the strategy agents are expected to follow.
#[pyclass(name = "SocialNorm", frozen, from_py_object)]
#[derive(Clone)]
struct PySocialNorm {
    inner: core::SocialNorm,
}

#[pymethods]
impl PySocialNorm {
    #[new]
    fn new(scheme: PyReputationScheme, strategy: PySocialStrategy) -> PyResult<Self> {
        Ok(Self {
            inner: core::SocialNorm::new(scheme.inner, strategy.inner).into_py()?,
        })
    }

    #[getter]
    fn scheme(&self) -> PyReputationScheme {
        PyReputationScheme {
            inner: self.inner.scheme,
        }
    }

    #[getter]
    fn strategy(&self) -> PySocialStrategy {
        PySocialStrategy {
            inner: self.inner.strategy.clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "SocialNorm(scheme={}, strategy={:?})",
            PyReputationScheme {
                inner: self.inner.scheme
            }
            .__repr__(),
            self.inner.strategy.to_string(),
        )
    }
}

/// Stationary reputation distribution of a scheme.
#[pyfunction]
fn stationary(params: &PyCommunityParams, scheme: &PyReputationScheme) -> PyResult<Vec<f64>> {
    Ok(core::stationary_general(&params.inner, &scheme.inner)
        .into_py()?
        .as_slice()
        .to_vec())
}

/// Closed-form stationary distribution under maximum punishment.
#[pyfunction]
fn closed_form_stationary(params: &PyCommunityParams, max_reputation: usize) -> PyResult<Vec<f64>> {
    if max_reputation == 0 || max_reputation > 8 {
        return Err(PyValueError::new_err("max_reputation must lie in 1..=8"));
    }
    Ok(core::stationary_closed_form(&params.inner, max_reputation)
        .as_slice()
        .to_vec())
}

/// Welfare, values, and incentive diagnostics for one norm.
#[pyfunction]
fn evaluate<'py>(
    py: Python<'py>,
    params: &PyCommunityParams,
    norm: &PySocialNorm,
) -> PyResult<Bound<'py, PyDict>> {
    let report = core::evaluate_norm(&norm.inner, &params.inner).into_py()?;
    let out = PyDict::new(py);
    out.set_item("welfare", report.welfare)?;
    out.set_item("stationary", report.stationary.as_slice().to_vec())?;
    out.set_item("period_values", report.values.period)?;
    out.set_item("longterm_values", report.values.longterm)?;
    out.set_item("cooperation_margins", report.incentives.cooperation_margins)?;
    out.set_item(
        "cooperation_incentive",
        report.incentives.cooperation_incentive,
    )?;
    out.set_item("binding_reputations", report.incentives.binding_reputations)?;
    out.set_item("sustainable", report.incentives.sustainable)?;
    out.set_item("whitewash_incentive", report.incentives.whitewash_incentive)?;
    out.set_item("whitewash_proof", report.incentives.whitewash_proof)?;
    Ok(out)
}

/// One-shot deviation test.
#[pyfunction]
fn is_sustainable(params: &PyCommunityParams, norm: &PySocialNorm) -> PyResult<bool> {
    core::is_sustainable(&norm.inner, &params.inner).into_py()
}

fn solution_dict<'py>(
    py: Python<'py>,
    solution: &core::DesignSolution,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("strategy", solution.norm.strategy.matrix_string())?;
    out.set_item("index", solution.norm.strategy.canonical_index())?;
    out.set_item("max_reputation", solution.norm.scheme.max_reputation())?;
    out.set_item(
        "punishment_length",
        solution.norm.scheme.punishment_length(),
    )?;
    out.set_item("entry_reputation", solution.norm.scheme.entry_reputation())?;
    out.set_item("welfare", solution.welfare)?;
    out.set_item("feasible_count", solution.feasible_count)?;
    out.set_item("cooperative", solution.cooperative)?;
    out.set_item(
        "cooperation_incentive",
        solution.report.cooperation_incentive,
    )?;
    out.set_item("whitewash_incentive", solution.report.whitewash_incentive)?;
    Ok(out)
}

/// Exact welfare-maximal sustainable norm under maximum punishment.
#[pyfunction]
fn optimize_fixed<'py>(
    py: Python<'py>,
    params: &PyCommunityParams,
    max_reputation: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let solution = core::solve_dp_fixed_l(&params.inner, max_reputation).into_py()?;
    solution_dict(py, &solution)
}

/// Design problem over punishment lengths; returns the best and a per-length table.
#[pyfunction]
fn optimize_variable_m<'py>(
    py: Python<'py>,
    params: &PyCommunityParams,
    max_reputation: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let solution = core::solve_dp_variable_m(&params.inner, max_reputation).into_py()?;
    let out = PyDict::new(py);
    out.set_item("best", solution_dict(py, &solution.best)?)?;
    let table = PyList::empty(py);
    for per_length in &solution.per_length {
        table.append(solution_dict(py, per_length)?)?;
    }
    out.set_item("per_length", table)?;
    Ok(out)
}

/// Design problem over entry reputations under whitewash constraints.
#[pyfunction]
fn optimize_whitewash<'py>(
    py: Python<'py>,
    params: &PyCommunityParams,
    max_reputation: usize,
    whitewash_cost: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let solution =
        core::solve_dp_whitewash(&params.inner, max_reputation, whitewash_cost).into_py()?;
    let out = PyDict::new(py);
    out.set_item("best", solution_dict(py, &solution.best)?)?;
    let table = PyList::empty(py);
    for per_entry in &solution.per_entry {
        table.append(solution_dict(py, per_entry)?)?;
    }
    out.set_item("per_entry", table)?;
    Ok(out)
}

/// Finite-population Monte-Carlo run plus per-reputation value estimates.
#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (params, norm, population=2000, horizon=200, burn_in=20, seed=1, rollouts=20000))]
fn simulate<'py>(
    py: Python<'py>,
    params: &PyCommunityParams,
    norm: &PySocialNorm,
    population: usize,
    horizon: usize,
    burn_in: usize,
    seed: u64,
    rollouts: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let config = core::SimulationConfig {
        population,
        horizon,
        burn_in,
        seed,
    };
    let report = core::simulate_report(&norm.inner, &params.inner, &config, rollouts).into_py()?;
    let out = PyDict::new(py);
    out.set_item(
        "distribution",
        report.empirical_distribution.as_slice().to_vec(),
    )?;
    out.set_item("welfare", report.empirical_welfare)?;
    out.set_item("welfare_std_error", report.welfare_std_error)?;
    out.set_item("periods_measured", report.periods_measured)?;
    let estimates = PyList::empty(py);
    for estimate in &report.value_estimates {
        let entry = PyDict::new(py);
        entry.set_item("mean", estimate.mean)?;
        entry.set_item("std_error", estimate.std_error)?;
        entry.set_item("rollouts", estimate.rollouts)?;
        estimates.append(entry)?;
    }
    out.set_item("value_estimates", estimates)?;
    out.set_item("rng", report.rng_algorithm)?;
    Ok(out)
}

/// Whitewashing cost above which every norm is whitewash-proof.
#[pyfunction]
fn whitewash_bound(params: &PyCommunityParams) -> f64 {
    core::whitewash_sufficiency_bound(&params.inner)
}

/// True when no cooperation can be enforced at all.
#[pyfunction]
fn zero_welfare(params: &PyCommunityParams) -> bool {
    core::zero_welfare_test(&params.inner)
}

/// Names accepted by SocialStrategy.named.
#[pyfunction]
fn strategy_names() -> Vec<String> {
    core::catalog::STRATEGY_NAMES
        .iter()
        .map(|name| name.to_string())
        .collect()
}

#[pymodule]
fn normforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCommunityParams>()?;
    m.add_class::<PyReputationScheme>()?;
    m.add_class::<PySocialStrategy>()?;
    m.add_class::<PySocialNorm>()?;
    m.add_function(wrap_pyfunction!(stationary, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_stationary, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(is_sustainable, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_fixed, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_variable_m, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_whitewash, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(whitewash_bound, m)?)?;
    m.add_function(wrap_pyfunction!(zero_welfare, m)?)?;
    m.add_function(wrap_pyfunction!(strategy_names, m)?)?;
    Ok(())
}
