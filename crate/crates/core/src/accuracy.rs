//! Forecast accuracy metrics and the relative-improvement statistic.
//!
//! For forecasts `f_1..f_N` against targets `x_1..x_N`:
//!
//! ```text
//! MAE   = (1/N) sum |f_i - x_i|
//! MAPE  = (1/N) sum |100 (f_i - x_i) / x_i|
//! MdAE  = median |f_i - x_i|
//! MdAPE = median |100 (f_i - x_i) / x_i|
//! RMSE  = sqrt((1/N) sum (f_i - x_i)^2)
//! ```
//!
//! MAE, MdAE and RMSE are scale-dependent; MAPE and MdAPE are percentages.
//! The relative improvement of a method over the benchmark in a metric m is
//! `(m_benchmark - m_method) / m_benchmark`.

use crate::error::{Error, Result};
use crate::util;

/// One of the five accuracy metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricId {
    Mae,
    Mape,
    MdAe,
    MdApe,
    Rmse,
}

impl MetricId {
    pub const ALL: [MetricId; 5] =
        [MetricId::Mae, MetricId::Mape, MetricId::MdAe, MetricId::MdApe, MetricId::Rmse];

    /// Serialized name, exactly as reported.
    pub fn name(self) -> &'static str {
        match self {
            MetricId::Mae => "MAE",
            MetricId::Mape => "MAPE",
            MetricId::MdAe => "MdAE",
            MetricId::MdApe => "MdAPE",
            MetricId::Rmse => "RMSE",
        }
    }

    /// True for metrics in data units (MAE, MdAE, RMSE), false for the
    /// percentage metrics.
    pub fn scale_dependent(self) -> bool {
        !matches!(self, MetricId::Mape | MetricId::MdApe)
    }

    pub fn parse(token: &str) -> Result<MetricId> {
        MetricId::ALL
            .iter()
            .find(|m| m.name().eq_ignore_ascii_case(token.trim()))
            .copied()
            .ok_or_else(|| Error::UnknownMetric(token.to_string()))
    }

    pub fn index(self) -> usize {
        MetricId::ALL.iter().position(|m| *m == self).expect("metric in ALL")
    }
}

/// A computed metric value (percentage units for MAPE/MdAPE, data units
/// otherwise).
#[derive(Debug, Clone, Copy)]
pub struct MetricValue {
    pub metric: MetricId,
    pub value: f64,
}

/// Evaluates one metric for a forecast/target pair.
pub fn compute_metric(metric: MetricId, forecasts: &[f64], targets: &[f64]) -> Result<MetricValue> {
    if forecasts.len() != targets.len() {
        return Err(Error::LengthMismatch { forecasts: forecasts.len(), targets: targets.len() });
    }
    if forecasts.is_empty() {
        return Err(Error::TooFewValues { need: 1, got: 0 });
    }
    if let Some(idx) = forecasts.iter().chain(targets.iter()).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(idx % forecasts.len()));
    }
    if !metric.scale_dependent() {
        if let Some(idx) = targets.iter().position(|x| *x == 0.0) {
            return Err(Error::ZeroTarget { index: idx });
        }
    }

    let n = forecasts.len() as f64;
    let value = match metric {
        MetricId::Mae => {
            forecasts.iter().zip(targets).map(|(f, x)| (f - x).abs()).sum::<f64>() / n
        }
        MetricId::Rmse => {
            (forecasts.iter().zip(targets).map(|(f, x)| (f - x) * (f - x)).sum::<f64>() / n).sqrt()
        }
        MetricId::Mape => {
            forecasts.iter().zip(targets).map(|(f, x)| (100.0 * (f - x) / x).abs()).sum::<f64>()
                / n
        }
        MetricId::MdAe => {
            let mut errs: Vec<f64> =
                forecasts.iter().zip(targets).map(|(f, x)| (f - x).abs()).collect();
            util::median_in_place(&mut errs)
        }
        MetricId::MdApe => {
            let mut errs: Vec<f64> = forecasts
                .iter()
                .zip(targets)
                .map(|(f, x)| (100.0 * (f - x) / x).abs())
                .collect();
            util::median_in_place(&mut errs)
        }
    };
    Ok(MetricValue { metric, value })
}

/// Relative improvement of a method over the benchmark:
/// `(m_benchmark - m_method) / m_benchmark`, a dimensionless fraction
/// (multiply by 100 for reporting).
pub fn relative_improvement(m_benchmark: f64, m_method: f64) -> Result<f64> {
    if m_benchmark <= 0.0 {
        return Err(Error::ZeroBenchmark);
    }
    Ok((m_benchmark - m_method) / m_benchmark)
}
