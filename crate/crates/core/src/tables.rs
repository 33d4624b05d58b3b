//! Long-format table rendering of reports and summaries.
//!
//! Every artifact is a named table with a header row; cells keep their type
//! so the delimited-text writer and the JSON mirror stay consistent. Row
//! order is deterministic (station id, then canonical method order).

use crate::accuracy::MetricId;
use crate::backtest::{EvaluationReport, ForecastMatrix, SummaryReport};
use crate::features::{SeriesFeatures, FEATURE_NAMES};
use crate::relate::{GroupSummary, PredictabilitySummary, RegressionResult};
use crate::series::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Float(f64),
    Int(i64),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        let raw = match self {
            Cell::Str(s) => s.clone(),
            Cell::Float(v) => format!("{v}"),
            Cell::Int(v) => format!("{v}"),
            Cell::Empty => String::new(),
        };
        // method labels contain commas, so quote per RFC 4180
        if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
            format!("\"{}\"", raw.replace('"', "\"\""))
        } else {
            raw
        }
    }
}

/// A named table with typed cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let rendered: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&rendered.join(","));
            out.push('\n');
        }
        out
    }
}

/// Selected-dataset manifest: one row per retained station.
pub fn selected_stations_table(dataset: &Dataset) -> Table {
    let rows = dataset
        .entries()
        .iter()
        .map(|e| {
            vec![
                Cell::Str(e.series.station_id().to_string()),
                Cell::Str(e.meta.region.name().to_string()),
                Cell::Int(e.series.year_start() as i64),
                Cell::Int(e.series.len() as i64),
                Cell::Float(e.meta.longitude),
                Cell::Float(e.meta.latitude),
                e.meta.country.clone().map(Cell::Str).unwrap_or(Cell::Empty),
            ]
        })
        .collect();
    Table {
        name: "selected_stations",
        columns: vec![
            "station_id",
            "region",
            "year_start",
            "n_values",
            "longitude",
            "latitude",
            "country",
        ],
        rows,
    }
}

/// Per-station forecast matrix in long format.
pub fn forecasts_table(matrices: &[ForecastMatrix]) -> Table {
    let mut rows = Vec::new();
    for m in matrices {
        for (method, row) in m.rows() {
            for (i, v) in row.iter().enumerate() {
                rows.push(vec![
                    Cell::Str(m.station_id.clone()),
                    Cell::Str(method.label()),
                    Cell::Int((i + 1) as i64),
                    Cell::Float(*v),
                    Cell::Float(m.targets[i]),
                ]);
            }
        }
    }
    Table {
        name: "forecasts",
        columns: vec!["station_id", "method", "origin", "forecast", "target"],
        rows,
    }
}

/// Per-station evaluation report: metric value, rank and (where defined)
/// relative improvement.
pub fn evaluation_table(reports: &[EvaluationReport]) -> Table {
    let mut rows = Vec::new();
    for r in reports {
        for method in r.methods() {
            for metric in MetricId::ALL {
                let ri = r.relative_improvement(*method, metric);
                rows.push(vec![
                    Cell::Str(r.station_id.clone()),
                    Cell::Str(method.label()),
                    Cell::Str(metric.name().to_string()),
                    Cell::Float(r.metric(*method, metric).expect("method in report")),
                    Cell::Float(r.rank(*method, metric).expect("method in report")),
                    ri.map(Cell::Float).unwrap_or(Cell::Empty),
                    ri.map(|v| Cell::Float(100.0 * v)).unwrap_or(Cell::Empty),
                ]);
            }
        }
    }
    Table {
        name: "evaluation",
        columns: vec![
            "station_id",
            "method",
            "metric",
            "value",
            "rank",
            "relative_improvement",
            "relative_improvement_pct",
        ],
        rows,
    }
}

pub fn summary_table(summary: &SummaryReport) -> Table {
    let rows = summary
        .rows
        .iter()
        .map(|r| {
            vec![
                Cell::Str(r.region.name().to_string()),
                Cell::Str(r.metric.name().to_string()),
                Cell::Str(r.method.label()),
                Cell::Int(r.n_stations as i64),
                Cell::Float(r.avg_ranking),
                r.avg_relative_improvement.map(Cell::Float).unwrap_or(Cell::Empty),
                r.avg_relative_improvement
                    .map(|v| Cell::Float(100.0 * v))
                    .unwrap_or(Cell::Empty),
                r.avg_metric_value.map(Cell::Float).unwrap_or(Cell::Empty),
                Cell::Int(r.top5 as i64),
                Cell::Int(r.top10 as i64),
                Cell::Int(r.top15 as i64),
            ]
        })
        .collect();
    Table {
        name: "summary",
        columns: vec![
            "region",
            "metric",
            "method",
            "n_stations",
            "avg_ranking",
            "avg_relative_improvement",
            "avg_relative_improvement_pct",
            "avg_metric_value",
            "top5",
            "top10",
            "top15",
        ],
        rows,
    }
}

/// One row per station with the five named feature columns.
pub fn features_table_rows(features: &[(String, SeriesFeatures)]) -> Table {
    let rows = features
        .iter()
        .map(|(id, f)| {
            let mut row = vec![Cell::Str(id.clone())];
            row.extend(f.as_array().into_iter().map(Cell::Float));
            row
        })
        .collect();
    let mut columns = vec!["station_id"];
    columns.extend(FEATURE_NAMES);
    Table { name: "features", columns, rows }
}

/// Regression summaries in the explanatory-variable table shape.
pub fn regressions_table(rows_in: &[(String, RegressionResult)]) -> Table {
    let rows = rows_in
        .iter()
        .map(|(name, r)| {
            vec![
                Cell::Str(name.clone()),
                Cell::Float(r.slope),
                Cell::Float(r.intercept),
                Cell::Float(r.pearson_r),
                Cell::Int(r.n as i64),
                Cell::Str(r.degenerate_response.to_string()),
            ]
        })
        .collect();
    Table {
        name: "regressions",
        columns: vec![
            "explanatory_variable",
            "slope",
            "intercept",
            "pearson_r",
            "n",
            "degenerate_response",
        ],
        rows,
    }
}

/// Pairwise feature correlations in long format.
pub fn correlations_table(matrix: &[[f64; 5]; 5]) -> Table {
    let mut rows = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            rows.push(vec![
                Cell::Str(FEATURE_NAMES[i].to_string()),
                Cell::Str(FEATURE_NAMES[j].to_string()),
                Cell::Float(*v),
            ]);
        }
    }
    Table { name: "correlations", columns: vec!["feature_a", "feature_b", "pearson_r"], rows }
}

/// Grouped relative-improvement summaries for categorical covariates.
pub fn grouped_table(groups: &[(String, Vec<GroupSummary>)]) -> Table {
    let mut rows = Vec::new();
    for (covariate, summaries) in groups {
        for g in summaries {
            rows.push(vec![
                Cell::Str(covariate.clone()),
                Cell::Str(g.class.clone()),
                Cell::Int(g.count as i64),
                Cell::Float(g.mean),
                Cell::Float(g.median),
                Cell::Float(g.q1),
                Cell::Float(g.q3),
            ]);
        }
    }
    Table {
        name: "grouped_ri",
        columns: vec!["covariate", "class", "count", "mean", "median", "q1", "q3"],
        rows,
    }
}

/// Per-station best method and its relative improvement.
pub fn predictability_table(summary: &PredictabilitySummary) -> Table {
    let rows = summary
        .per_station
        .iter()
        .map(|s| {
            vec![
                Cell::Str(s.station_id.clone()),
                Cell::Str(s.region.name().to_string()),
                Cell::Str(s.best.label()),
                Cell::Float(s.best_ri),
                Cell::Float(100.0 * s.best_ri),
            ]
        })
        .collect();
    Table {
        name: "predictability",
        columns: vec!["station_id", "region", "best_method", "best_ri", "best_ri_pct"],
        rows,
    }
}

/// Aggregated predictability: one Globe row plus one per populated region.
pub fn predictability_summary_table(summary: &PredictabilitySummary) -> Table {
    let mut globe_ris: Vec<f64> = summary.per_station.iter().map(|s| s.best_ri).collect();
    globe_ris.sort_by(|a, b| a.partial_cmp(b).expect("finite RI"));
    let quantile = |p: f64| -> Cell {
        if globe_ris.is_empty() {
            return Cell::Empty;
        }
        let h = (globe_ris.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        Cell::Float(globe_ris[lo] + (h - lo as f64) * (globe_ris[hi] - globe_ris[lo]))
    };
    let mut rows = vec![vec![
        Cell::Str("Globe".to_string()),
        Cell::Int(summary.per_station.len() as i64),
        Cell::Float(summary.global_mean_ri),
        Cell::Int(summary.benchmark_best_count as i64),
        quantile(0.5),
        quantile(0.25),
        quantile(0.75),
    ]];
    for r in &summary.regional {
        rows.push(vec![
            Cell::Str(r.region.name().to_string()),
            Cell::Int(r.n as i64),
            Cell::Float(r.mean),
            Cell::Int(r.benchmark_best as i64),
            Cell::Float(r.median),
            Cell::Float(r.q1),
            Cell::Float(r.q3),
        ]);
    }
    Table {
        name: "predictability_summary",
        columns: vec![
            "region",
            "n_stations",
            "mean_best_ri",
            "benchmark_best_count",
            "median_best_ri",
            "q1_best_ri",
            "q3_best_ri",
        ],
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backtest::evaluate_series;
    use crate::combine::all_method_ids;
    use crate::sim;

    #[test]
    fn tables_have_headers_and_expected_counts() {
        let ds = sim::synthetic_flow_dataset(2, 90, 0.7, 3);
        let methods = all_method_ids();
        let results: Vec<_> = ds
            .entries()
            .iter()
            .map(|e| evaluate_series(&e.series, &methods, 1).unwrap())
            .collect();
        let matrices: Vec<_> = results.iter().map(|r| r.0.clone()).collect();
        let reports: Vec<_> = results.iter().map(|r| r.1.clone()).collect();

        let t = forecasts_table(&matrices);
        assert_eq!(t.rows.len(), 2 * 31 * 10);
        let csv = t.to_csv_string();
        assert!(csv.starts_with("station_id,method,origin,forecast,target\n"));

        let t = evaluation_table(&reports);
        assert_eq!(t.rows.len(), 2 * 31 * 5);
        // benchmark rows carry no relative improvement
        let empty_ri = t
            .rows
            .iter()
            .filter(|r| r[1] == Cell::Str("Naive".into()) && r[5] == Cell::Empty)
            .count();
        assert_eq!(empty_ri, 2 * 5);

        let t = selected_stations_table(&ds);
        assert_eq!(t.rows.len(), 2);
    }

    #[test]
    fn csv_rendering_is_stable() {
        let table = Table {
            name: "t",
            columns: vec!["a", "b"],
            rows: vec![vec![Cell::Float(1.5), Cell::Empty], vec![Cell::Int(2), Cell::Str("x".into())]],
        };
        assert_eq!(table.to_csv_string(), "a,b\n1.5,\n2,x\n");
    }

    #[test]
    fn csv_quotes_method_labels() {
        let table = Table {
            name: "t",
            columns: vec!["method"],
            rows: vec![vec![Cell::Str("combiner of (1),(4),(5)".into())]],
        };
        assert_eq!(table.to_csv_string(), "method\n\"combiner of (1),(4),(5)\"\n");
    }
}
