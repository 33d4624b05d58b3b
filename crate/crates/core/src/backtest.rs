//! Rolling-origin forecasting-and-testing workflow.
//!
//! For each station: extract the training segments, fit every base method on
//! each, clamp negative forecasts to zero, form the combiner rows, compute
//! all metric values, rank the methods per metric (ties share the average of
//! the covered positions) and compute the relative improvements over the
//! benchmark for the scale-dependent metrics. Station evaluations are
//! independent work units; the aggregation is a deterministic reduction.

use crate::accuracy::{self, MetricId};
use crate::combine::{median_combine, MethodId};
use crate::error::{Error, Result};
use crate::forecast::{forecast_base, BaseMethod, TrainingSegment};
use crate::series::{AnnualSeries, RegionTag};
use crate::util;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Per-station forecasts: targets plus one row of one-step forecasts per
/// method.
#[derive(Debug, Clone)]
pub struct ForecastMatrix {
    pub station_id: String,
    pub targets: Vec<f64>,
    methods: Vec<MethodId>,
    rows: Vec<Vec<f64>>,
}

impl ForecastMatrix {
    pub fn methods(&self) -> &[MethodId] {
        &self.methods
    }

    pub fn row(&self, method: MethodId) -> Option<&[f64]> {
        self.methods.iter().position(|m| *m == method).map(|i| self.rows[i].as_slice())
    }

    pub fn rows(&self) -> impl Iterator<Item = (MethodId, &[f64])> {
        self.methods.iter().copied().zip(self.rows.iter().map(|r| r.as_slice()))
    }
}

/// Per-station evaluation: metric table, per-metric ranks and relative
/// improvements.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub station_id: String,
    methods: Vec<MethodId>,
    /// `[method][metric]`
    metric_table: Vec<[f64; 5]>,
    /// `[method][metric]`, average ranks on ties
    ranks: Vec<[f64; 5]>,
    /// (method, metric, value) for scale-dependent metrics and
    /// non-benchmark methods
    relative_improvements: Vec<(MethodId, MetricId, f64)>,
    pub diagnostics: Vec<String>,
}

impl EvaluationReport {
    pub fn methods(&self) -> &[MethodId] {
        &self.methods
    }

    pub fn metric(&self, method: MethodId, metric: MetricId) -> Option<f64> {
        let i = self.methods.iter().position(|m| *m == method)?;
        Some(self.metric_table[i][metric.index()])
    }

    pub fn rank(&self, method: MethodId, metric: MetricId) -> Option<f64> {
        let i = self.methods.iter().position(|m| *m == method)?;
        Some(self.ranks[i][metric.index()])
    }

    pub fn relative_improvements(&self) -> &[(MethodId, MetricId, f64)] {
        &self.relative_improvements
    }

    pub fn relative_improvement(&self, method: MethodId, metric: MetricId) -> Option<f64> {
        self.relative_improvements
            .iter()
            .find(|(m, k, _)| *m == method && *k == metric)
            .map(|(_, _, v)| *v)
    }

    pub fn metric_count(&self) -> usize {
        self.metric_table.len() * 5
    }

    /// Bare report carrying only relative improvements, for analysis-layer
    /// tests that need controlled inputs.
    #[cfg(test)]
    pub(crate) fn synthetic_for_tests(
        station_id: &str,
        methods: &[MethodId],
        relative_improvements: Vec<(MethodId, MetricId, f64)>,
    ) -> Self {
        EvaluationReport {
            station_id: station_id.to_string(),
            methods: methods.to_vec(),
            metric_table: vec![[0.0; 5]; methods.len()],
            ranks: vec![[0.0; 5]; methods.len()],
            relative_improvements,
            diagnostics: Vec::new(),
        }
    }
}

/// Extracts the rolling training segments and their targets: segment `i`
/// (1-based) spans values `i .. i+train_len-1` and its target is value
/// `i+train_len`.
pub fn make_origins(
    series: &AnnualSeries,
    n_origins: usize,
    train_len: usize,
) -> Result<Vec<(TrainingSegment, f64)>> {
    let need = train_len + n_origins;
    if series.len() < need {
        return Err(Error::SeriesTooShort { need, got: series.len() });
    }
    let values = series.values();
    (0..n_origins)
        .map(|i| {
            let segment = TrainingSegment::new(values[i..i + train_len].to_vec(), i + 1)?;
            Ok((segment, values[i + train_len]))
        })
        .collect()
}

/// Ranks metric values (lower is better) with 1-based positions; ties
/// receive the average of the covered rank positions, so the rank sum is
/// always `m (m + 1) / 2`.
pub fn rank_methods(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let mut ranks = vec![0.0; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j + 1 < m && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average rank
        let avg = (i + j + 2) as f64 / 2.0;
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Evaluates one station: fits the bases over every origin, clamps, forms
/// the combiner rows, computes metrics, ranks and relative improvements.
///
/// `seed` is recorded for reproducibility of any stochastic extension; the
/// fits themselves are deterministic. A failing base fit falls back within
/// its own method and never aborts the station.
pub fn evaluate_series(
    series: &AnnualSeries,
    methods: &[MethodId],
    seed: u64,
) -> Result<(ForecastMatrix, EvaluationReport)> {
    evaluate_series_with(series, methods, seed, 10, 80)
}

pub fn evaluate_series_with(
    series: &AnnualSeries,
    methods: &[MethodId],
    seed: u64,
    n_origins: usize,
    train_len: usize,
) -> Result<(ForecastMatrix, EvaluationReport)> {
    let _ = seed;
    let origins = make_origins(series, n_origins, train_len)?;
    let targets: Vec<f64> = origins.iter().map(|(_, t)| *t).collect();
    let mut diagnostics = Vec::new();

    // bases needed anywhere (as a method or a combo member)
    let mut bases_needed: Vec<BaseMethod> = Vec::new();
    for m in methods {
        for b in m.members() {
            if !bases_needed.contains(&b) {
                bases_needed.push(b);
            }
        }
    }
    bases_needed.sort();

    // 5 x n_origins base fits, clamped at zero
    let mut base_rows: BTreeMap<BaseMethod, Vec<f64>> = BTreeMap::new();
    for &base in &bases_needed {
        let mut row = Vec::with_capacity(origins.len());
        for (segment, _) in &origins {
            let (raw, note) = forecast_base(base, segment);
            if let Some(note) = note {
                diagnostics.push(format!(
                    "station {} origin {}: {note}",
                    series.station_id(),
                    segment.origin()
                ));
            }
            row.push(if raw < 0.0 { 0.0 } else { raw });
        }
        base_rows.insert(base, row);
    }

    // combiner rows from the clamped base forecasts
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(methods.len());
    for m in methods {
        let row = match m {
            MethodId::Base(b) => base_rows[b].clone(),
            MethodId::Combo(_) => {
                let members = m.members();
                (0..origins.len())
                    .map(|i| {
                        let forecasts: Vec<f64> =
                            members.iter().map(|b| base_rows[b][i]).collect();
                        median_combine(&forecasts).expect("members >= 2, clamped finite")
                    })
                    .collect()
            }
        };
        rows.push(row);
    }

    // metric table
    let mut metric_table: Vec<[f64; 5]> = Vec::with_capacity(methods.len());
    for row in &rows {
        let mut entry = [0.0; 5];
        for metric in MetricId::ALL {
            entry[metric.index()] = accuracy::compute_metric(metric, row, &targets)?.value;
        }
        metric_table.push(entry);
    }

    // per-metric rankings
    let mut ranks: Vec<[f64; 5]> = vec![[0.0; 5]; methods.len()];
    for metric in MetricId::ALL {
        let column: Vec<f64> = metric_table.iter().map(|r| r[metric.index()]).collect();
        for (i, r) in rank_methods(&column).into_iter().enumerate() {
            ranks[i][metric.index()] = r;
        }
    }

    // relative improvements: scale-dependent metrics, non-benchmark methods
    let benchmark = MethodId::benchmark();
    let bench_idx = methods.iter().position(|m| *m == benchmark);
    let mut ris = Vec::new();
    if let Some(bi) = bench_idx {
        for metric in MetricId::ALL.into_iter().filter(|m| m.scale_dependent()) {
            let bench_value = metric_table[bi][metric.index()];
            for (i, m) in methods.iter().enumerate() {
                if *m == benchmark {
                    continue;
                }
                match accuracy::relative_improvement(bench_value, metric_table[i][metric.index()])
                {
                    Ok(ri) => ris.push((*m, metric, ri)),
                    Err(e) => diagnostics.push(format!(
                        "station {}: RI of {} in {} skipped: {e}",
                        series.station_id(),
                        m.label(),
                        metric.name()
                    )),
                }
            }
        }
    } else {
        diagnostics.push(format!(
            "station {}: benchmark not in method set, relative improvements skipped",
            series.station_id()
        ));
    }

    let matrix = ForecastMatrix {
        station_id: series.station_id().to_string(),
        targets,
        methods: methods.to_vec(),
        rows,
    };
    let report = EvaluationReport {
        station_id: series.station_id().to_string(),
        methods: methods.to_vec(),
        metric_table,
        ranks,
        relative_improvements: ris,
        diagnostics,
    };
    Ok((matrix, report))
}

/// Region scope of a summary row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RegionScope {
    Globe,
    Region(RegionTag),
}

impl RegionScope {
    pub fn name(self) -> &'static str {
        match self {
            RegionScope::Globe => "Globe",
            RegionScope::Region(tag) => tag.name(),
        }
    }
}

/// One aggregated summary row.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub region: RegionScope,
    pub metric: MetricId,
    pub method: MethodId,
    pub n_stations: usize,
    pub avg_ranking: f64,
    /// scale-dependent metrics, non-benchmark methods only
    pub avg_relative_improvement: Option<f64>,
    /// percentage metrics only
    pub avg_metric_value: Option<f64>,
    pub top5: usize,
    pub top10: usize,
    pub top15: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SummaryReport {
    pub rows: Vec<SummaryRow>,
    pub diagnostics: Vec<String>,
}

impl SummaryReport {
    pub fn row(
        &self,
        region: RegionScope,
        metric: MetricId,
        method: MethodId,
    ) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.region == region && r.metric == metric && r.method == method)
    }
}

/// Aggregates per-station reports into per-(region, metric, method)
/// averages and top-k counts. Regions without stations are omitted with a
/// diagnostic.
pub fn summarize(
    reports: &[EvaluationReport],
    regions: &BTreeMap<String, RegionTag>,
) -> SummaryReport {
    let mut summary = SummaryReport::default();
    if reports.is_empty() {
        summary.diagnostics.push("no reports to summarize".to_string());
        return summary;
    }
    let methods = reports[0].methods().to_vec();

    let scopes = [
        RegionScope::Globe,
        RegionScope::Region(RegionTag::A),
        RegionScope::Region(RegionTag::B),
    ];
    for scope in scopes {
        let in_scope: Vec<&EvaluationReport> = reports
            .iter()
            .filter(|r| match scope {
                RegionScope::Globe => true,
                RegionScope::Region(tag) => regions.get(&r.station_id) == Some(&tag),
            })
            .collect();
        if in_scope.is_empty() {
            summary
                .diagnostics
                .push(format!("region {} empty, omitted from summary", scope.name()));
            continue;
        }
        let n = in_scope.len();
        for metric in MetricId::ALL {
            for &method in &methods {
                let mut rank_sum = 0.0;
                let mut value_sum = 0.0;
                let mut ri_sum = 0.0;
                let mut ri_n = 0usize;
                let mut top = [0usize; 3];
                for rep in &in_scope {
                    let rank = rep.rank(method, metric).expect("uniform method set");
                    rank_sum += rank;
                    value_sum += rep.metric(method, metric).expect("uniform method set");
                    if let Some(ri) = rep.relative_improvement(method, metric) {
                        ri_sum += ri;
                        ri_n += 1;
                    }
                    for (slot, k) in top.iter_mut().zip([5.0, 10.0, 15.0]) {
                        if rank <= k {
                            *slot += 1;
                        }
                    }
                }
                summary.rows.push(SummaryRow {
                    region: scope,
                    metric,
                    method,
                    n_stations: n,
                    avg_ranking: rank_sum / n as f64,
                    avg_relative_improvement: (ri_n > 0).then(|| ri_sum / ri_n as f64),
                    avg_metric_value: (!metric.scale_dependent())
                        .then(|| value_sum / n as f64),
                    top5: top[0],
                    top10: top[1],
                    top15: top[2],
                });
            }
        }
    }
    summary
}

/// Evaluates every station in parallel (bounded by `jobs`), returning the
/// results ordered by station id regardless of schedule.
pub fn evaluate_stations(
    series: &[AnnualSeries],
    methods: &[MethodId],
    seed: u64,
    jobs: usize,
) -> Result<Vec<(ForecastMatrix, EvaluationReport)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool construction");
    let mut results: Vec<(ForecastMatrix, EvaluationReport)> = pool.install(|| {
        series
            .par_iter()
            .map(|s| {
                let station_seed = util::derive_seed(seed, &["station", s.station_id()]);
                evaluate_series(s, methods, station_seed)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    results.sort_by(|a, b| a.0.station_id.cmp(&b.0.station_id));
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combine::all_method_ids;
    use approx::assert_abs_diff_eq;

    fn test_series(station: &str) -> AnnualSeries {
        let values: Vec<f64> =
            (0..90).map(|i| 10.0 + (i as f64 * 0.37).sin() * 3.0 + (i as f64 * 0.11).cos()).collect();
        AnnualSeries::new(station, 1900, values).unwrap()
    }

    #[test]
    fn origins_match_the_workflow() {
        let s = test_series("s");
        let origins = make_origins(&s, 10, 80).unwrap();
        assert_eq!(origins.len(), 10);
        // segment 1 = values 1..80, target = value 81
        assert_eq!(origins[0].0.values(), &s.values()[0..80]);
        assert_eq!(origins[0].1, s.values()[80]);
        // last segment = values 10..89, target = value 90
        assert_eq!(origins[9].0.values(), &s.values()[9..89]);
        assert_eq!(origins[9].1, s.values()[89]);
        assert_eq!(origins[9].0.origin(), 10);
    }

    #[test]
    fn short_series_is_an_error() {
        let values = vec![1.0; 85];
        let s = AnnualSeries::new("s", 1900, values).unwrap();
        assert!(matches!(make_origins(&s, 10, 80), Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_methods(&[0.5, 0.2, 0.9]), vec![2.0, 1.0, 3.0]);
        assert_eq!(rank_methods(&[0.5, 0.5, 0.9]), vec![1.5, 1.5, 3.0]);
        let all_equal = vec![1.0; 31];
        let ranks = rank_methods(&all_equal);
        for r in &ranks {
            assert_abs_diff_eq!(*r, 16.0);
        }
    }

    #[test]
    fn rank_sum_is_preserved_under_ties() {
        let values = [3.0, 1.0, 3.0, 2.0, 1.0, 5.0];
        let ranks = rank_methods(&values);
        let sum: f64 = ranks.iter().sum();
        assert_abs_diff_eq!(sum, 21.0);
    }

    #[test]
    fn evaluation_counts_match_workflow() {
        let methods = all_method_ids();
        let (matrix, report) = evaluate_series(&test_series("s"), &methods, 7).unwrap();
        // 31 x 10 forecasts on 10 targets
        assert_eq!(matrix.targets.len(), 10);
        assert_eq!(matrix.methods().len(), 31);
        // 155 metric values, 90 relative improvements
        assert_eq!(report.metric_count(), 155);
        assert_eq!(report.relative_improvements().len(), 90);
        // rank sum 496 per metric
        for metric in MetricId::ALL {
            let sum: f64 =
                methods.iter().map(|m| report.rank(*m, metric).unwrap()).sum();
            assert_abs_diff_eq!(sum, 496.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn combo_rows_reproduce_median_of_bases() {
        let methods = all_method_ids();
        let (matrix, _) = evaluate_series(&test_series("s"), &methods, 7).unwrap();
        for (method, row) in matrix.rows() {
            if let MethodId::Combo(_) = method {
                let members = method.members();
                for (i, v) in row.iter().enumerate() {
                    let forecasts: Vec<f64> = members
                        .iter()
                        .map(|b| matrix.row(MethodId::Base(*b)).unwrap()[i])
                        .collect();
                    assert_abs_diff_eq!(*v, median_combine(&forecasts).unwrap(), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn per_origin_error_domination() {
        let methods = all_method_ids();
        let (matrix, _) = evaluate_series(&test_series("dom"), &methods, 7).unwrap();
        for (method, row) in matrix.rows() {
            if let MethodId::Combo(_) = method {
                let members = method.members();
                for (i, v) in row.iter().enumerate() {
                    let target = matrix.targets[i];
                    let worst = members
                        .iter()
                        .map(|b| (matrix.row(MethodId::Base(*b)).unwrap()[i] - target).abs())
                        .fold(0.0_f64, f64::max);
                    assert!((v - target).abs() <= worst + 1e-12);
                }
            }
        }
    }

    #[test]
    fn clamping_forces_nonnegative_forecasts() {
        // steep decline to a small positive plateau: the trend extrapolation
        // crosses below zero while every target stays positive
        let values: Vec<f64> = (0..90).map(|i| (1000.0 - 13.0 * i as f64).max(5.0)).collect();
        let s = AnnualSeries::new("down", 1900, values).unwrap();
        let methods = all_method_ids();
        let (matrix, _) = evaluate_series(&s, &methods, 7).unwrap();
        let mut any_zero = false;
        for (_, row) in matrix.rows() {
            for v in row {
                assert!(*v >= 0.0);
                if *v == 0.0 {
                    any_zero = true;
                }
            }
        }
        assert!(any_zero, "expected at least one clamped forecast");
    }

    #[test]
    fn summary_averages_ranks() {
        let methods = all_method_ids();
        let s1 = test_series("s1");
        let values: Vec<f64> =
            (0..90).map(|i| 20.0 + (i as f64 * 0.21).cos() * 5.0).collect();
        let s2 = AnnualSeries::new("s2", 1900, values).unwrap();
        let reports: Vec<EvaluationReport> = [&s1, &s2]
            .iter()
            .map(|s| evaluate_series(s, &methods, 7).unwrap().1)
            .collect();
        let mut regions = BTreeMap::new();
        regions.insert("s1".to_string(), RegionTag::A);
        regions.insert("s2".to_string(), RegionTag::A);
        let summary = summarize(&reports, &regions);

        // Globe average = mean of the two stations' ranks
        let m = methods[3];
        let expect = (reports[0].rank(m, MetricId::Rmse).unwrap()
            + reports[1].rank(m, MetricId::Rmse).unwrap())
            / 2.0;
        let row = summary.row(RegionScope::Globe, MetricId::Rmse, m).unwrap();
        assert_abs_diff_eq!(row.avg_ranking, expect, epsilon = 1e-12);
        // region B empty: omitted with diagnostic
        assert!(summary.rows.iter().all(|r| r.region != RegionScope::Region(RegionTag::B)));
        assert!(summary.diagnostics.iter().any(|d| d.contains("region B")));
        // single-region rows equal globe rows here
        let row_a = summary.row(RegionScope::Region(RegionTag::A), MetricId::Rmse, m).unwrap();
        assert_abs_diff_eq!(row_a.avg_ranking, row.avg_ranking, epsilon = 1e-12);
    }

    #[test]
    fn top_k_counts_match_rank_threshold() {
        let methods = all_method_ids();
        let series: Vec<AnnualSeries> = (0..3)
            .map(|k| {
                let values: Vec<f64> =
                    (0..90).map(|i| 18.0 + ((i + 3 * k) as f64 * 0.23).sin() * 4.0).collect();
                AnnualSeries::new(format!("tk{k}"), 1900, values).unwrap()
            })
            .collect();
        let reports: Vec<EvaluationReport> = series
            .iter()
            .map(|s| evaluate_series(s, &methods, 3).unwrap().1)
            .collect();
        let regions: BTreeMap<String, RegionTag> =
            series.iter().map(|s| (s.station_id().to_string(), RegionTag::A)).collect();
        let summary = summarize(&reports, &regions);
        for m in &methods {
            let row = summary.row(RegionScope::Globe, MetricId::Rmse, *m).unwrap();
            for (count, k) in [(row.top5, 5.0), (row.top10, 10.0), (row.top15, 15.0)] {
                let expect = reports
                    .iter()
                    .filter(|r| r.rank(*m, MetricId::Rmse).unwrap() <= k)
                    .count();
                assert_eq!(count, expect);
            }
        }
    }

    #[test]
    fn single_station_summary_is_identity() {
        let methods = all_method_ids();
        let report = evaluate_series(&test_series("only"), &methods, 7).unwrap().1;
        let mut regions = BTreeMap::new();
        regions.insert("only".to_string(), RegionTag::Other);
        let summary = summarize(std::slice::from_ref(&report), &regions);
        for m in &methods {
            let row = summary.row(RegionScope::Globe, MetricId::Mae, *m).unwrap();
            assert_abs_diff_eq!(
                row.avg_ranking,
                report.rank(*m, MetricId::Mae).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn parallel_evaluation_is_deterministic() {
        let methods = all_method_ids();
        let series: Vec<AnnualSeries> = (0..3)
            .map(|k| {
                let values: Vec<f64> =
                    (0..90).map(|i| 15.0 + ((i + k * 7) as f64 * 0.3).sin() * 2.0).collect();
                AnnualSeries::new(format!("st{k}"), 1900, values).unwrap()
            })
            .collect();
        let r1 = evaluate_stations(&series, &methods, 11, 1).unwrap();
        let r2 = evaluate_stations(&series, &methods, 11, 4).unwrap();
        assert_eq!(r1.len(), r2.len());
        for (a, b) in r1.iter().zip(&r2) {
            assert_eq!(a.0.station_id, b.0.station_id);
            for (ra, rb) in a.0.rows().zip(b.0.rows()) {
                assert_eq!(ra.1, rb.1, "forecast rows must be bit-identical");
            }
        }
    }
}
