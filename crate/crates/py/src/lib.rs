//! Python bindings exposing the forecasting methods, the median combiner,
//! the accuracy metrics, the rolling-origin evaluation and the river-flow
//! statistics.
//!
//! ```python
//! import medcast
//! f = medcast.one_step_forecast("ses", train)
//! ev = medcast.evaluate_series(values, seed=1)
//! ev.rank("combiner of (1),(4),(5)", "RMSE")
//! ```

use medcast_core::accuracy::{self, MetricId};
use medcast_core::backtest;
use medcast_core::combine::{self, MethodId};
use medcast_core::features;
use medcast_core::forecast::{self, BaseMethod, TrainingSegment};
use medcast_core::relate;
use medcast_core::series::AnnualSeries;
use medcast_core::sim;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn segment(train: Vec<f64>) -> PyResult<TrainingSegment> {
    TrainingSegment::new(train, 1).map_err(value_err)
}

fn parse_metric(name: &str) -> PyResult<MetricId> {
    MetricId::parse(name).map_err(value_err)
}

/// Sample median of two or more forecasts.
#[pyfunction]
fn median_combine(forecasts: Vec<f64>) -> PyResult<f64> {
    combine::median_combine(&forecasts).map_err(value_err)
}

/// Labels of the 26 combiner variants over the five base methods.
#[pyfunction]
fn enumerate_variants() -> PyResult<Vec<String>> {
    Ok(combine::enumerate_variants(&BaseMethod::ALL)
        .map_err(value_err)?
        .iter()
        .map(|m| m.label())
        .collect())
}

/// Labels of all 31 methods in canonical report order.
#[pyfunction]
fn method_labels() -> Vec<String> {
    combine::all_method_ids().iter().map(|m| m.label()).collect()
}

/// One accuracy metric ("MAE", "MAPE", "MdAE", "MdAPE" or "RMSE").
#[pyfunction]
fn compute_metric(metric: &str, forecasts: Vec<f64>, targets: Vec<f64>) -> PyResult<f64> {
    let m = parse_metric(metric)?;
    Ok(accuracy::compute_metric(m, &forecasts, &targets).map_err(value_err)?.value)
}

/// Relative improvement `(benchmark - method) / benchmark`.
#[pyfunction]
fn relative_improvement(benchmark: f64, method: f64) -> PyResult<f64> {
    accuracy::relative_improvement(benchmark, method).map_err(value_err)
}

/// Truncated fractional differencing `(1-B)^d`.
#[pyfunction]
fn frac_diff(values: Vec<f64>, d: f64) -> Vec<f64> {
    forecast::frac_diff(&values, d)
}

/// One-step forecast of a base method ("naive", "ses", "ces", "arfima",
/// "prophet") fitted on the training values.
#[pyfunction]
fn one_step_forecast(method: &str, train: Vec<f64>) -> PyResult<f64> {
    let base = BaseMethod::parse(method)
        .ok_or_else(|| PyValueError::new_err(format!("unknown method: {method}")))?;
    let seg = segment(train)?;
    Ok(forecast::forecast_base(base, &seg).0)
}

/// SES fit: returns `(alpha, level0, forecast)`.
#[pyfunction]
fn fit_ses(train: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let m = forecast::fit_ses(&segment(train)?);
    Ok((m.alpha(), m.level0(), m.forecast()))
}

/// CES fit: returns `(alpha0, alpha1, forecast)`.
#[pyfunction]
fn fit_ces(train: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let m = forecast::fit_ces(&segment(train)?);
    Ok((m.alpha0(), m.alpha1(), m.forecast()))
}

/// Automatic ARFIMA fit: returns `(d, p, q, forecast)`.
#[pyfunction]
fn fit_arfima(train: Vec<f64>) -> PyResult<(f64, usize, usize, f64)> {
    let m = forecast::fit_arfima(&segment(train)?);
    Ok((m.d(), m.p(), m.q(), m.forecast()))
}

/// Piecewise-linear trend fit: returns the one-step forecast.
#[pyfunction]
fn fit_trend_forecast(train: Vec<f64>) -> PyResult<f64> {
    Ok(forecast::fit_trend(&segment(train)?).forecast())
}

/// Per-station evaluation result.
#[pyclass]
struct Evaluation {
    methods: Vec<MethodId>,
    report: backtest::EvaluationReport,
    matrix: backtest::ForecastMatrix,
}

impl Evaluation {
    fn find(&self, label: &str) -> PyResult<MethodId> {
        self.methods
            .iter()
            .find(|m| m.label() == label)
            .copied()
            .ok_or_else(|| PyValueError::new_err(format!("unknown method label: {label}")))
    }
}

#[pymethods]
impl Evaluation {
    /// Method labels in report order.
    fn methods(&self) -> Vec<String> {
        self.methods.iter().map(|m| m.label()).collect()
    }

    fn targets(&self) -> Vec<f64> {
        self.matrix.targets.clone()
    }

    fn forecasts(&self, method: &str) -> PyResult<Vec<f64>> {
        let m = self.find(method)?;
        Ok(self.matrix.row(m).expect("method in matrix").to_vec())
    }

    fn metric(&self, method: &str, metric: &str) -> PyResult<f64> {
        let m = self.find(method)?;
        let k = parse_metric(metric)?;
        Ok(self.report.metric(m, k).expect("method in report"))
    }

    fn rank(&self, method: &str, metric: &str) -> PyResult<f64> {
        let m = self.find(method)?;
        let k = parse_metric(metric)?;
        Ok(self.report.rank(m, k).expect("method in report"))
    }

    /// Relative improvement over the benchmark, or None for the benchmark
    /// itself and for percentage metrics.
    fn relative_improvement(&self, method: &str, metric: &str) -> PyResult<Option<f64>> {
        let m = self.find(method)?;
        let k = parse_metric(metric)?;
        Ok(self.report.relative_improvement(m, k))
    }

    fn __repr__(&self) -> String {
        format!(
            "Evaluation(station='{}', methods={}, origins={})",
            self.matrix.station_id,
            self.methods.len(),
            self.matrix.targets.len()
        )
    }
}

/// Full rolling-origin evaluation of one series (10 origins of 80-value
/// training segments) over all 31 methods.
#[pyfunction]
#[pyo3(signature = (values, seed = 1))]
fn evaluate_series(values: Vec<f64>, seed: u64) -> PyResult<Evaluation> {
    let series = AnnualSeries::new("py", 1900, values).map_err(value_err)?;
    let methods = combine::all_method_ids();
    let (matrix, report) =
        backtest::evaluate_series(&series, &methods, seed).map_err(value_err)?;
    Ok(Evaluation { methods, report, matrix })
}

/// Average-rank ranking of metric values (lower is better).
#[pyfunction]
fn rank_methods(values: Vec<f64>) -> Vec<f64> {
    backtest::rank_methods(&values)
}

/// The five series statistics as a dict.
#[pyfunction]
fn series_features(py: Python<'_>, values: Vec<f64>) -> PyResult<Py<PyDict>> {
    let f = features::compute_features(&values).map_err(value_err)?;
    let dict = PyDict::new(py);
    dict.set_item("cv", f.cv)?;
    dict.set_item("acf1", f.acf1)?;
    dict.set_item("hurst", f.hurst)?;
    dict.set_item("trend_strength", f.trend_strength)?;
    dict.set_item("spectral_entropy", f.spectral_entropy)?;
    Ok(dict.into())
}

/// Maximum-likelihood fGn fit: returns `(mu, sigma, hurst, log_likelihood)`.
#[pyfunction]
fn fit_fgn(values: Vec<f64>) -> PyResult<(f64, f64, f64, f64)> {
    let f = features::fit_fgn(&values).map_err(value_err)?;
    Ok((f.mu, f.sigma, f.hurst, f.log_likelihood))
}

/// Variable-span smoother trend component.
#[pyfunction]
fn supersmooth(values: Vec<f64>) -> PyResult<Vec<f64>> {
    features::supersmooth(&values).map_err(value_err)
}

/// Lag-1 sample autocorrelation.
#[pyfunction]
fn acf1(values: Vec<f64>) -> PyResult<f64> {
    features::acf1(&values).map_err(value_err)
}

/// Normalized spectral entropy in [0, 1].
#[pyfunction]
fn spectral_entropy(values: Vec<f64>) -> PyResult<f64> {
    features::spectral_entropy(&values).map_err(value_err)
}

/// Trend strength in [0, 1].
#[pyfunction]
fn trend_strength(values: Vec<f64>) -> PyResult<f64> {
    features::trend_strength(&values).map_err(value_err)
}

/// Simple linear regression: returns `(slope, intercept, pearson_r, n)`.
#[pyfunction]
fn linear_regression(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64, f64, usize)> {
    let r = relate::linear_regression(&x, &y).map_err(value_err)?;
    Ok((r.slope, r.intercept, r.pearson_r, r.n))
}

/// Exact fractional Gaussian noise sample.
#[pyfunction]
#[pyo3(signature = (n, hurst, mu = 0.0, sigma = 1.0, seed = 1))]
fn simulate_fgn(n: usize, hurst: f64, mu: f64, sigma: f64, seed: u64) -> Vec<f64> {
    sim::fgn_series(n, hurst, mu, sigma, seed)
}

#[pymodule]
fn medcast(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(median_combine, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_variants, m)?)?;
    m.add_function(wrap_pyfunction!(method_labels, m)?)?;
    m.add_function(wrap_pyfunction!(compute_metric, m)?)?;
    m.add_function(wrap_pyfunction!(relative_improvement, m)?)?;
    m.add_function(wrap_pyfunction!(frac_diff, m)?)?;
    m.add_function(wrap_pyfunction!(one_step_forecast, m)?)?;
    m.add_function(wrap_pyfunction!(fit_ses, m)?)?;
    m.add_function(wrap_pyfunction!(fit_ces, m)?)?;
    m.add_function(wrap_pyfunction!(fit_arfima, m)?)?;
    m.add_function(wrap_pyfunction!(fit_trend_forecast, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_series, m)?)?;
    m.add_function(wrap_pyfunction!(rank_methods, m)?)?;
    m.add_function(wrap_pyfunction!(series_features, m)?)?;
    m.add_function(wrap_pyfunction!(fit_fgn, m)?)?;
    m.add_function(wrap_pyfunction!(supersmooth, m)?)?;
    m.add_function(wrap_pyfunction!(acf1, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(trend_strength, m)?)?;
    m.add_function(wrap_pyfunction!(linear_regression, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_fgn, m)?)?;
    m.add_class::<Evaluation>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
