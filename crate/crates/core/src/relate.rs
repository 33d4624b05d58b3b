//! Relationship analyses between forecasting performance, series statistics
//! and catchment attributes, plus the one-year-ahead predictability
//! assessment.
//!
//! Relative improvements in RMSE from all non-benchmark methods are pooled
//! (30 points per station) against per-station explanatory values; simple
//! linear regression and Pearson's r quantify each relationship.

use crate::accuracy::MetricId;
use crate::backtest::EvaluationReport;
use crate::combine::MethodId;
use crate::error::{Error, Result};
use crate::features::{SeriesFeatures, FEATURE_NAMES};
use crate::series::{RegionTag, StationMeta};
use crate::util;
use std::collections::BTreeMap;

/// Ordinary least squares fit of `y` on `x` with Pearson's correlation.
#[derive(Debug, Clone, Copy)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub pearson_r: f64,
    pub n: usize,
    /// set when the response had zero variance and r was defined as 0
    pub degenerate_response: bool,
}

/// Simple linear regression. Zero predictor variance is an error; zero
/// response variance yields slope 0 and r defined as 0 with the flag set.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { forecasts: x.len(), targets: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewValues { need: 2, got: n });
    }
    if let Some(idx) = x.iter().chain(y.iter()).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(idx % n));
    }
    let mx = util::mean(x);
    let my = util::mean(y);
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 {
        return Err(Error::ZeroVariancePredictor);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (pearson_r, degenerate) =
        if syy <= 0.0 { (0.0, true) } else { (sxy / (sxx.sqrt() * syy.sqrt()), false) };
    Ok(RegressionResult { slope, intercept, pearson_r, n, degenerate_response: degenerate })
}

/// Pairwise Pearson correlations between the five statistics.
/// Returns the symmetric 5x5 matrix with unit diagonal plus diagnostics for
/// zero-variance columns (their correlations are set to 0).
pub fn correlation_matrix(
    features: &[(String, SeriesFeatures)],
) -> Result<([[f64; 5]; 5], Vec<String>)> {
    if features.len() < 2 {
        return Err(Error::TooFewValues { need: 2, got: features.len() });
    }
    let columns: Vec<Vec<f64>> = (0..5)
        .map(|k| features.iter().map(|(_, f)| f.as_array()[k]).collect())
        .collect();
    let mut diagnostics = Vec::new();
    let mut matrix = [[0.0; 5]; 5];
    let variances: Vec<f64> = columns.iter().map(|c| util::variance(c)).collect();
    for (k, v) in variances.iter().enumerate() {
        if *v <= 0.0 {
            diagnostics
                .push(format!("feature {} has zero variance; correlations set to 0", FEATURE_NAMES[k]));
        }
    }
    for i in 0..5 {
        matrix[i][i] = 1.0;
        for j in i + 1..5 {
            let r = if variances[i] <= 0.0 || variances[j] <= 0.0 {
                0.0
            } else {
                let mi = util::mean(&columns[i]);
                let mj = util::mean(&columns[j]);
                let mut sij = 0.0;
                for (a, b) in columns[i].iter().zip(&columns[j]) {
                    sij += (a - mi) * (b - mj);
                }
                sij / (features.len() as f64 * variances[i].sqrt() * variances[j].sqrt())
            };
            matrix[i][j] = r;
            matrix[j][i] = r;
        }
    }
    Ok((matrix, diagnostics))
}

/// Pooled RMSE relative improvements per station (all non-benchmark
/// methods), paired with a per-station explanatory value.
fn pooled_ri_points<'a>(
    reports: &'a [EvaluationReport],
    value_of: impl Fn(&str) -> Option<f64>,
) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for report in reports {
        let Some(x) = value_of(&report.station_id) else { continue };
        for (_, metric, ri) in report.relative_improvements() {
            if *metric == MetricId::Rmse {
                xs.push(x);
                ys.push(*ri);
            }
        }
    }
    (xs, ys)
}

/// Regression of pooled RMSE relative improvements on one series statistic.
pub fn ri_vs_feature(
    reports: &[EvaluationReport],
    features: &[(String, SeriesFeatures)],
    feature_name: &str,
) -> Result<RegressionResult> {
    if !FEATURE_NAMES.contains(&feature_name) {
        return Err(Error::UnknownFeature(feature_name.to_string()));
    }
    let table: BTreeMap<&str, &SeriesFeatures> =
        features.iter().map(|(id, f)| (id.as_str(), f)).collect();
    let (xs, ys) =
        pooled_ri_points(reports, |id| table.get(id).and_then(|f| f.get(feature_name)));
    linear_regression(&xs, &ys)
}

/// Diagnostic variant of [`ri_vs_feature`]: one regression per non-benchmark
/// method instead of pooling, in canonical method order.
pub fn ri_vs_feature_per_method(
    reports: &[EvaluationReport],
    features: &[(String, SeriesFeatures)],
    feature_name: &str,
) -> Result<Vec<(MethodId, RegressionResult)>> {
    if !FEATURE_NAMES.contains(&feature_name) {
        return Err(Error::UnknownFeature(feature_name.to_string()));
    }
    let table: BTreeMap<&str, &SeriesFeatures> =
        features.iter().map(|(id, f)| (id.as_str(), f)).collect();
    let methods: Vec<MethodId> = reports
        .first()
        .map(|r| r.methods().iter().copied().filter(|m| !m.is_benchmark()).collect())
        .unwrap_or_default();
    let mut out = Vec::with_capacity(methods.len());
    for method in methods {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for report in reports {
            let Some(x) =
                table.get(report.station_id.as_str()).and_then(|f| f.get(feature_name))
            else {
                continue;
            };
            if let Some(ri) = report.relative_improvement(method, MetricId::Rmse) {
                xs.push(x);
                ys.push(ri);
            }
        }
        out.push((method, linear_regression(&xs, &ys)?));
    }
    Ok(out)
}

/// Per-class summary of pooled relative improvements for a categorical
/// covariate.
#[derive(Debug, Clone)]
pub struct GroupSummary {
    pub class: String,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Result of a covariate analysis: numeric covariates get the regression
/// path, categorical ones the grouped path.
#[derive(Debug, Clone)]
pub enum CovariateAnalysis {
    Regression(RegressionResult),
    Grouped(Vec<GroupSummary>),
}

/// Relates pooled RMSE relative improvements to one catchment attribute.
pub fn ri_vs_covariate(
    reports: &[EvaluationReport],
    metas: &[StationMeta],
    covariate: &str,
) -> Result<CovariateAnalysis> {
    let numeric: BTreeMap<&str, f64> = metas
        .iter()
        .filter_map(|m| m.numeric_covariates.get(covariate).map(|v| (m.station_id.as_str(), *v)))
        .collect();
    let categorical: BTreeMap<&str, &str> = metas
        .iter()
        .filter_map(|m| {
            m.categorical_covariates.get(covariate).map(|v| (m.station_id.as_str(), v.as_str()))
        })
        .collect();

    // built-in location attributes are always available numerically
    let location = |id: &str| -> Option<f64> {
        let meta = metas.iter().find(|m| m.station_id == id)?;
        match covariate {
            "longitude" => Some(meta.longitude),
            "latitude" => Some(meta.latitude),
            _ => None,
        }
    };

    if covariate == "longitude" || covariate == "latitude" {
        let (xs, ys) = pooled_ri_points(reports, location);
        return Ok(CovariateAnalysis::Regression(linear_regression(&xs, &ys)?));
    }
    if !numeric.is_empty() {
        let (xs, ys) = pooled_ri_points(reports, |id| numeric.get(id).copied());
        if xs.is_empty() {
            return Err(Error::EmptyCovariate(covariate.to_string()));
        }
        return Ok(CovariateAnalysis::Regression(linear_regression(&xs, &ys)?));
    }
    if !categorical.is_empty() {
        let mut by_class: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for report in reports {
            let Some(class) = categorical.get(report.station_id.as_str()) else { continue };
            let bucket = by_class.entry(class.to_string()).or_default();
            for (_, metric, ri) in report.relative_improvements() {
                if *metric == MetricId::Rmse {
                    bucket.push(*ri);
                }
            }
        }
        if by_class.values().all(|v| v.is_empty()) {
            return Err(Error::EmptyCovariate(covariate.to_string()));
        }
        let groups = by_class
            .into_iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(class, mut values)| {
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                GroupSummary {
                    class,
                    count: values.len(),
                    mean: util::mean(&values),
                    median: util::quantile_sorted(&values, 0.5),
                    q1: util::quantile_sorted(&values, 0.25),
                    q3: util::quantile_sorted(&values, 0.75),
                }
            })
            .collect();
        return Ok(CovariateAnalysis::Grouped(groups));
    }
    Err(Error::UnknownCovariate(covariate.to_string()))
}

/// Best method for one station by RMSE rank.
#[derive(Debug, Clone)]
pub struct StationBest {
    pub station_id: String,
    pub region: RegionTag,
    pub best: MethodId,
    /// RMSE relative improvement of the best method over the benchmark
    /// (zero when the benchmark itself is best).
    pub best_ri: f64,
}

/// Distribution summary of the best relative improvements within a region.
#[derive(Debug, Clone)]
pub struct RegionPredictability {
    pub region: RegionTag,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub benchmark_best: usize,
}

/// Predictability assessment: the improvement the best-performing method
/// offers over the last-observation benchmark, per station and aggregated.
#[derive(Debug, Clone)]
pub struct PredictabilitySummary {
    pub per_station: Vec<StationBest>,
    pub global_mean_ri: f64,
    /// stations where the benchmark is (co-)best in RMSE
    pub benchmark_best_count: usize,
    pub regional: Vec<RegionPredictability>,
    pub diagnostics: Vec<String>,
}

/// Picks each station's rank-1 method in RMSE (ties resolved toward the
/// earliest method in report order, logged) and aggregates the relative
/// improvements.
pub fn predictability_summary(
    reports: &[EvaluationReport],
    regions: &BTreeMap<String, RegionTag>,
) -> Result<PredictabilitySummary> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("no evaluation reports"));
    }
    let mut per_station = Vec::with_capacity(reports.len());
    let mut diagnostics = Vec::new();
    let mut benchmark_best_count = 0usize;

    for report in reports {
        let methods = report.methods();
        let mut best_idx = 0usize;
        let mut best_rank = f64::INFINITY;
        let mut tied = 0usize;
        for (i, m) in methods.iter().enumerate() {
            let rank = report.rank(*m, MetricId::Rmse).expect("method in report");
            if rank < best_rank {
                best_rank = rank;
                best_idx = i;
                tied = 1;
            } else if rank == best_rank {
                tied += 1;
            }
        }
        if tied > 1 {
            diagnostics.push(format!(
                "station {}: {tied} methods tie at RMSE rank {best_rank}; kept {}",
                report.station_id,
                methods[best_idx].label()
            ));
        }
        let best = methods[best_idx];
        let benchmark_rank = report
            .rank(MethodId::benchmark(), MetricId::Rmse)
            .expect("benchmark in report");
        if benchmark_rank == best_rank {
            benchmark_best_count += 1;
        }
        let best_ri = if best.is_benchmark() {
            0.0
        } else {
            report.relative_improvement(best, MetricId::Rmse).unwrap_or(0.0)
        };
        let region = regions.get(&report.station_id).copied().unwrap_or(RegionTag::Other);
        per_station.push(StationBest {
            station_id: report.station_id.clone(),
            region,
            best,
            best_ri,
        });
    }

    let global_mean_ri = util::mean(
        &per_station.iter().map(|s| s.best_ri).collect::<Vec<f64>>(),
    );

    let mut regional = Vec::new();
    for tag in [RegionTag::A, RegionTag::B, RegionTag::Other] {
        let mut values: Vec<f64> = per_station
            .iter()
            .filter(|s| s.region == tag)
            .map(|s| s.best_ri)
            .collect();
        if values.is_empty() {
            continue;
        }
        let benchmark_best = per_station
            .iter()
            .filter(|s| s.region == tag && s.best.is_benchmark())
            .count();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        regional.push(RegionPredictability {
            region: tag,
            n: values.len(),
            mean: util::mean(&values),
            median: util::quantile_sorted(&values, 0.5),
            q1: util::quantile_sorted(&values, 0.25),
            q3: util::quantile_sorted(&values, 0.75),
            benchmark_best,
        });
    }

    Ok(PredictabilitySummary {
        per_station,
        global_mean_ri,
        benchmark_best_count,
        regional,
        diagnostics,
    })
}
