//! Python bindings: `import pyrelevance`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use relevance::comparators::nhst_point_null;
use relevance::config::ConfigDocument;
use relevance::decision::{bayes_two_action_decision, expected_loss_decision};
use relevance::hypotheses::check_incorporation;
use relevance::partition::{is_practically_relevant, partition};
use relevance::report::partition_csv;
use relevance::sim::run_operating_characteristics_with_threads;
use relevance::{
    Action, BinomialModel, Error, HypothesisPair, Interval, LossCurve, LossRatio, LossSpec, NormalKnownVarModel,
    ParameterSpace, PartitionOptions, PosteriorModel, RegionSet, RelevancePartition, SamplingModel,
};

fn to_py(err: Error) -> PyErr {
    if err.is_input_error() {
        PyValueError::new_err(err.to_string())
    } else {
        PyRuntimeError::new_err(err.to_string())
    }
}

fn action(name: &str) -> PyResult<Action> {
    match name {
        "a0" => Ok(Action::A0),
        "a1" => Ok(Action::A1),
        other => Err(PyValueError::new_err(format!(
            "action must be 'a0' or 'a1', got {other:?}"
        ))),
    }
}

type IntervalTuple = (f64, f64, bool, bool);

fn tuples(set: &RegionSet) -> Vec<IntervalTuple> {
    set.intervals()
        .iter()
        .map(|iv| (iv.lo, iv.hi, iv.lo_open, iv.hi_open))
        .collect()
}

/// Accepts points, `(lo, hi)` closed intervals and `(lo, hi, lo_open, hi_open)`.
fn region(items: &Bound<'_, PyList>) -> PyResult<RegionSet> {
    let mut intervals = Vec::with_capacity(items.len());
    for item in items.iter() {
        let iv = if let Ok(t) = item.extract::<f64>() {
            Interval::point(t)
        } else if let Ok((lo, hi, lo_open, hi_open)) = item.extract::<IntervalTuple>() {
            Interval::new(lo, hi, lo_open, hi_open)
        } else if let Ok((lo, hi)) = item.extract::<(f64, f64)>() {
            Interval::closed(lo, hi)
        } else {
            return Err(PyValueError::new_err(
                "region entries must be a number, (lo, hi) or (lo, hi, lo_open, hi_open)",
            ));
        };
        intervals.push(iv);
    }
    RegionSet::new(intervals).map_err(to_py)
}

fn loss_ratio(value: &Bound<'_, PyAny>) -> PyResult<LossRatio> {
    if let Ok(r) = value.extract::<f64>() {
        LossRatio::scalar(r).map_err(to_py)
    } else if let Ok((lo, hi)) = value.extract::<(f64, f64)>() {
        LossRatio::interval(lo, hi).map_err(to_py)
    } else {
        Err(PyValueError::new_err("loss_ratio must be a number or (lo, hi)"))
    }
}

#[pyclass(name = "LossSpec", frozen, from_py_object)]
#[derive(Clone)]
struct PyLossSpec {
    inner: LossSpec,
}

#[pymethods]
impl PyLossSpec {
    /// `L(b, a0) = |b|`, `L(b, a1) = k(0.5 − |b|)` on `[−0.5, 0.5]`.
    #[staticmethod]
    fn coin_demo() -> Self {
        PyLossSpec {
            inner: LossSpec::coin_demo(),
        }
    }

    /// Quadratic losses `c(θ − center)² + offset`, each given as a tuple.
    #[staticmethod]
    fn quadratic(lo: f64, hi: f64, a0: (f64, f64, f64), a1: (f64, f64, f64)) -> PyResult<Self> {
        let space = ParameterSpace::new(lo, hi).map_err(to_py)?;
        let inner = LossSpec::new(
            space,
            LossCurve::quadratic(a0.0, a0.1, a0.2),
            LossCurve::quadratic(a1.0, a1.1, a1.2),
        );
        inner.validate().into_result().map_err(to_py)?;
        Ok(PyLossSpec { inner })
    }

    /// Tabulated losses on a shared grid, linearly interpolated.
    #[staticmethod]
    fn table(grid: Vec<f64>, a0: Vec<f64>, a1: Vec<f64>) -> PyResult<Self> {
        let (lo, hi) = match (grid.first(), grid.last()) {
            (Some(lo), Some(hi)) => (*lo, *hi),
            _ => return Err(PyValueError::new_err("grid must not be empty")),
        };
        let space = ParameterSpace::new(lo, hi).map_err(to_py)?;
        let inner = LossSpec::new(space, LossCurve::table(grid.clone(), a0), LossCurve::table(grid, a1));
        inner.validate().into_result().map_err(to_py)?;
        Ok(PyLossSpec { inner })
    }

    /// The loss described by a TOML config document.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        let doc = ConfigDocument::from_toml_str(text).map_err(to_py)?;
        Ok(PyLossSpec {
            inner: doc.loss_spec().map_err(to_py)?,
        })
    }

    #[getter]
    fn space(&self) -> (f64, f64) {
        (self.inner.space.lo, self.inner.space.hi)
    }

    fn evaluate(&self, theta: f64, action_name: &str) -> PyResult<f64> {
        self.inner.evaluate(theta, action(action_name)?).map_err(to_py)
    }

    /// `L(θ, a1) − L(θ, a0)`; negative where `a1` is preferred.
    fn loss_difference(&self, theta: f64) -> PyResult<f64> {
        self.inner.loss_difference(theta).map_err(to_py)
    }

    fn is_practically_relevant(&self, theta: f64) -> PyResult<bool> {
        is_practically_relevant(&self.inner, theta).map_err(to_py)
    }

    #[pyo3(signature = (grid_size = 4096, root_tol = 1e-9))]
    fn partition(&self, grid_size: usize, root_tol: f64) -> PyResult<PyPartition> {
        let opts = PartitionOptions { grid_size, root_tol };
        Ok(PyPartition {
            inner: partition(&self.inner, &opts).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("LossSpec(space=[{}, {}])", self.inner.space.lo, self.inner.space.hi)
    }
}

#[pyclass(name = "Partition", frozen)]
struct PyPartition {
    inner: RelevancePartition,
}

#[pymethods]
impl PyPartition {
    /// Intervals as `(lo, hi, lo_open, hi_open)`.
    #[getter]
    fn negligible(&self) -> Vec<IntervalTuple> {
        tuples(&self.inner.negligible)
    }

    #[getter]
    fn relevant(&self) -> Vec<IntervalTuple> {
        tuples(&self.inner.relevant)
    }

    #[getter]
    fn crossings(&self) -> Vec<f64> {
        self.inner.crossings.clone()
    }

    fn csv(&self) -> PyResult<String> {
        partition_csv(&self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Partition(negligible={}, relevant={})",
            self.inner.negligible, self.inner.relevant
        )
    }
}

#[pyclass(name = "Posterior", frozen, from_py_object)]
#[derive(Clone)]
struct PyPosterior {
    inner: PosteriorModel,
}

#[pymethods]
impl PyPosterior {
    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    #[getter]
    fn sd(&self) -> f64 {
        self.inner.sd()
    }

    fn cdf(&self, effect: f64) -> f64 {
        self.inner.cdf(effect)
    }

    fn region_prob(&self, items: &Bound<'_, PyList>) -> PyResult<f64> {
        Ok(self.inner.region_prob(&region(items)?))
    }

    #[pyo3(signature = (mass = 0.95))]
    fn credible_interval(&self, mass: f64) -> PyResult<(f64, f64)> {
        self.inner.credible_interval(mass).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        match self.inner {
            PosteriorModel::Beta { alpha, beta } => format!("Posterior(beta, alpha={alpha}, beta={beta})"),
            PosteriorModel::Normal { mean, sd } => format!("Posterior(normal, mean={mean}, sd={sd})"),
        }
    }
}

fn binomial(n: u64, k: u64, alpha: f64, beta: f64) -> SamplingModel {
    SamplingModel::Binomial(BinomialModel {
        n,
        k,
        prior_alpha: alpha,
        prior_beta: beta,
    })
}

fn normal(n: u64, ybar: f64, sigma: f64, prior_mean: f64, prior_sd: f64) -> SamplingModel {
    SamplingModel::Normal(NormalKnownVarModel {
        n,
        ybar,
        sigma,
        prior_mean,
        prior_sd,
    })
}

/// Beta posterior for the coin bias `b = π − 0.5` after `k` heads in `n`.
#[pyfunction]
#[pyo3(signature = (n, k, alpha = 1.0, beta = 1.0))]
fn posterior_binomial(n: u64, k: u64, alpha: f64, beta: f64) -> PyResult<PyPosterior> {
    Ok(PyPosterior {
        inner: binomial(n, k, alpha, beta).posterior().map_err(to_py)?,
    })
}

#[pyfunction]
fn posterior_normal(n: u64, ybar: f64, sigma: f64, prior_mean: f64, prior_sd: f64) -> PyResult<PyPosterior> {
    Ok(PyPosterior {
        inner: normal(n, ybar, sigma, prior_mean, prior_sd)
            .posterior()
            .map_err(to_py)?,
    })
}

/// Complete and partial incorporation verdicts with witnesses.
#[pyfunction]
fn check_hypotheses<'py>(
    py: Python<'py>,
    spec: &PyLossSpec,
    h0: &Bound<'py, PyList>,
    h1: &Bound<'py, PyList>,
) -> PyResult<Bound<'py, PyDict>> {
    let pair = HypothesisPair::new(region(h0)?, region(h1)?, spec.inner.space).map_err(to_py)?;
    let report = check_incorporation(&pair, &spec.inner, &PartitionOptions::default()).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("complete", report.complete.holds)?;
    out.set_item("partial", report.partial.holds)?;
    out.set_item("witness", report.partial.witness.or(report.complete.witness))?;
    Ok(out)
}

/// Hypothesis-ratio decision from posterior odds and a (possibly interval)
/// loss ratio. `space` defaults to the coin space for beta posteriors and to
/// the hull of both regions otherwise.
#[pyfunction]
#[pyo3(signature = (posterior, h0, h1, loss_ratio = None, restricted_space = false, space = None))]
fn decide<'py>(
    py: Python<'py>,
    posterior: &PyPosterior,
    h0: &Bound<'py, PyList>,
    h1: &Bound<'py, PyList>,
    loss_ratio: Option<&Bound<'py, PyAny>>,
    restricted_space: bool,
    space: Option<(f64, f64)>,
) -> PyResult<Bound<'py, PyDict>> {
    let ratio = match loss_ratio {
        Some(v) => self::loss_ratio(v)?,
        None => LossRatio::scalar(1.0).map_err(to_py)?,
    };
    let (r0, r1) = (region(h0)?, region(h1)?);
    let space = match (space, posterior.inner) {
        (Some((lo, hi)), _) => ParameterSpace::new(lo, hi).map_err(to_py)?,
        (None, PosteriorModel::Beta { .. }) => ParameterSpace::coin(),
        (None, PosteriorModel::Normal { .. }) => {
            let ends: Vec<(f64, f64)> = [r0.hull(), r1.hull()].into_iter().flatten().collect();
            let lo = ends.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
            let hi = ends.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
            ParameterSpace::new(lo, hi).map_err(to_py)?
        }
    };
    let pair = HypothesisPair::new(r0, r1, space).map_err(to_py)?;
    let outcome = bayes_two_action_decision(&posterior.inner, &pair, &ratio, restricted_space).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("decision", outcome.decision.label())?;
    out.set_item("posterior_h0", outcome.posterior_h0)?;
    out.set_item("posterior_h1", outcome.posterior_h1)?;
    out.set_item("posterior_odds", outcome.posterior_odds)?;
    out.set_item("threshold_lo", outcome.threshold_lo)?;
    out.set_item("threshold_hi", outcome.threshold_hi)?;
    Ok(out)
}

/// Action with the smaller posterior expected loss.
#[pyfunction]
fn decide_expected_loss(posterior: &PyPosterior, spec: &PyLossSpec) -> PyResult<(String, f64, f64)> {
    let outcome = expected_loss_decision(&posterior.inner, &spec.inner).map_err(to_py)?;
    Ok((
        outcome.decision.label().to_string(),
        outcome.threshold_lo,
        outcome.threshold_hi,
    ))
}

/// Exact binomial test of `π = 0.5`: `(p_value, verdict)`.
#[pyfunction]
#[pyo3(signature = (n, k, alpha = 0.05))]
fn nhst_binomial(n: u64, k: u64, alpha: f64) -> PyResult<(f64, String)> {
    let r = nhst_point_null(&binomial(n, k, 1.0, 1.0), alpha).map_err(to_py)?;
    Ok((r.p_value.unwrap_or(f64::NAN), r.verdict.to_string()))
}

/// z-test of `θ = 0` with known `sigma`: `(p_value, verdict)`.
#[pyfunction]
#[pyo3(signature = (n, ybar, sigma, alpha = 0.05))]
fn nhst_normal(n: u64, ybar: f64, sigma: f64, alpha: f64) -> PyResult<(f64, String)> {
    let r = nhst_point_null(&normal(n, ybar, sigma, 0.0, 1.0), alpha).map_err(to_py)?;
    Ok((r.p_value.unwrap_or(f64::NAN), r.verdict.to_string()))
}

/// Runs the `scenario` section of a config document. Rows are dicts with
/// keys `true_effect, n, procedure, verdict, count, frequency, std_error`.
#[pyfunction]
#[pyo3(signature = (config, seed = None, threads = 1))]
fn simulate<'py>(py: Python<'py>, config: &str, seed: Option<u64>, threads: usize) -> PyResult<Bound<'py, PyList>> {
    let doc = ConfigDocument::from_toml_str(config).map_err(to_py)?;
    let scenario = doc.scenario(seed).map_err(to_py)?;
    let table = py
        .detach(|| run_operating_characteristics_with_threads(&scenario, threads.max(1)))
        .map_err(to_py)?;
    let rows = PyList::empty(py);
    for r in &table.rows {
        let d = PyDict::new(py);
        d.set_item("true_effect", r.true_effect)?;
        d.set_item("n", r.n)?;
        d.set_item("procedure", &r.procedure)?;
        d.set_item("verdict", &r.verdict)?;
        d.set_item("count", r.count)?;
        d.set_item("frequency", r.frequency)?;
        d.set_item("std_error", r.std_error)?;
        rows.append(d)?;
    }
    Ok(rows)
}

#[pymodule]
fn pyrelevance(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLossSpec>()?;
    m.add_class::<PyPartition>()?;
    m.add_class::<PyPosterior>()?;
    m.add_function(wrap_pyfunction!(posterior_binomial, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_normal, m)?)?;
    m.add_function(wrap_pyfunction!(check_hypotheses, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(decide_expected_loss, m)?)?;
    m.add_function(wrap_pyfunction!(nhst_binomial, m)?)?;
    m.add_function(wrap_pyfunction!(nhst_normal, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
