//! Pipeline orchestration and artifact writing.
//!
//! Artifact order within a full run: selected-dataset manifest, per-station
//! forecast matrix, per-station evaluation report, summary report, feature
//! table, regression/correlation tables, predictability summary, then the
//! run manifest recording the seed and configuration hash. The manifest
//! excludes paths and the parallelism degree, so runs over the same data
//! with different `--jobs` or output directories stay byte-identical.

use medcast_core::accuracy::MetricId;
use medcast_core::backtest::{self, EvaluationReport, ForecastMatrix};
use medcast_core::combine::{all_method_ids, MethodId};
use medcast_core::features::{self, SeriesFeatures, FEATURE_NAMES};
use medcast_core::relate::{self, CovariateAnalysis, GroupSummary, RegressionResult};
use medcast_core::series::{
    self, Dataset, RegionConfig, SchemaConfig, SelectionRules,
};
use medcast_core::tables::{self, Cell, Table};
use medcast_core::Error as CoreError;
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Ingest,
    Evaluate,
    Features,
    Analyze,
    Run,
}

#[derive(Debug)]
pub enum PipelineError {
    /// input data problems
    Data(CoreError),
}

impl From<CoreError> for PipelineError {
    fn from(e: CoreError) -> Self {
        PipelineError::Data(e)
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        PipelineError::Data(CoreError::Io(e))
    }
}

pub struct RunConfig {
    pub data: PathBuf,
    pub meta: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    pub region_config: RegionConfig,
    pub methods: Vec<MethodId>,
    pub metrics: Vec<MetricId>,
    pub json: bool,
    pub schema: SchemaConfig,
    pub selection: SelectionRules,
    /// set when the benchmark had to be added to a user-provided subset
    benchmark_added: bool,
}

impl RunConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        data: PathBuf,
        meta: PathBuf,
        out: PathBuf,
        seed: u64,
        jobs: usize,
        region_config_path: Option<&Path>,
        methods: Option<&str>,
        metrics: Option<&str>,
        json: bool,
    ) -> Result<Self, String> {
        let region_config = match region_config_path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| format!("cannot read region config {}: {e}", p.display()))?;
                toml::from_str::<RegionConfig>(&text)
                    .map_err(|e| format!("invalid region config {}: {e}", p.display()))?
            }
            None => RegionConfig::default(),
        };

        let (methods, benchmark_added) = match methods {
            None => (all_method_ids(), false),
            Some(spec) => {
                let mut set: Vec<MethodId> = Vec::new();
                for token in spec.split(',') {
                    let m = MethodId::parse(token).map_err(|e| e.to_string())?;
                    if !set.contains(&m) {
                        set.push(m);
                    }
                }
                let mut added = false;
                if !set.contains(&MethodId::benchmark()) {
                    // relative improvements need the benchmark
                    set.push(MethodId::benchmark());
                    added = true;
                }
                set.sort();
                (set, added)
            }
        };

        let metrics = match metrics {
            None => MetricId::ALL.to_vec(),
            Some(spec) => {
                let mut set = Vec::new();
                for token in spec.split(',') {
                    let m = MetricId::parse(token).map_err(|e| e.to_string())?;
                    if !set.contains(&m) {
                        set.push(m);
                    }
                }
                set.sort();
                set
            }
        };

        Ok(RunConfig {
            data,
            meta,
            out,
            seed,
            jobs: jobs.max(1),
            region_config,
            methods,
            metrics,
            json,
            schema: SchemaConfig::default(),
            selection: SelectionRules::default(),
            benchmark_added,
        })
    }

    /// Configuration hash over everything that determines the outputs,
    /// excluding file paths and the parallelism degree.
    fn config_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(format!("seed={};", self.seed));
        let labels: Vec<String> = self.methods.iter().map(|m| m.label()).collect();
        hasher.update(format!("methods={};", labels.join("|")));
        let names: Vec<&str> = self.metrics.iter().map(|m| m.name()).collect();
        hasher.update(format!("metrics={};", names.join("|")));
        let rc = &self.region_config;
        hasher.update(format!(
            "boxA=({},{},{},{});boxB=({},{},{},{});",
            rc.box_a.lon_min,
            rc.box_a.lon_max,
            rc.box_a.lat_min,
            rc.box_a.lat_max,
            rc.box_b.lon_min,
            rc.box_b.lon_max,
            rc.box_b.lat_min,
            rc.box_b.lat_max
        ));
        for (country, tag) in &rc.country_map {
            hasher.update(format!("map:{country}={};", tag.name()));
        }
        hasher.update(format!(
            "required_len={};missing_col={:?};missing_thresh={};homogeneity={:?};",
            self.selection.required_len,
            self.selection.missing_fraction_column,
            self.selection.missing_fraction_threshold,
            self.selection.homogeneity_column
        ));
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

struct Writer<'a> {
    out: &'a Path,
    json: bool,
}

impl Writer<'_> {
    fn write(&self, table: &Table) -> Result<(), PipelineError> {
        let csv_path = self.out.join(format!("{}.csv", table.name));
        let mut f = fs::File::create(&csv_path)?;
        f.write_all(table.to_csv_string().as_bytes())?;
        if self.json {
            let records: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    for (col, cell) in table.columns.iter().zip(row) {
                        let value = match cell {
                            Cell::Str(s) => serde_json::Value::String(s.clone()),
                            Cell::Float(v) => serde_json::Number::from_f64(*v)
                                .map(serde_json::Value::Number)
                                .unwrap_or(serde_json::Value::Null),
                            Cell::Int(v) => serde_json::Value::Number((*v).into()),
                            Cell::Empty => serde_json::Value::Null,
                        };
                        obj.insert(col.to_string(), value);
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            let json_path = self.out.join(format!("{}.json", table.name));
            let mut f = fs::File::create(&json_path)?;
            serde_json::to_writer_pretty(&mut f, &records)
                .map_err(|e| PipelineError::Data(CoreError::Io(e.into())))?;
            f.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Keeps only rows whose metric column matches the configured subset.
fn filter_metric_rows(mut table: Table, metrics: &[MetricId], metric_col: usize) -> Table {
    let wanted: BTreeSet<&str> = metrics.iter().map(|m| m.name()).collect();
    table.rows.retain(|row| match &row[metric_col] {
        Cell::Str(s) => wanted.contains(s.as_str()),
        _ => true,
    });
    table
}

/// Runs the requested phase end to end, writing artifacts in order.
pub fn run_pipeline(phase: Phase, config: &RunConfig) -> Result<(), PipelineError> {
    // ingestion happens before any write, so hard errors leave no partial
    // artifacts behind
    let (raw, ingest_report) = series::load_dataset(
        &config.data,
        &config.meta,
        &config.schema,
        &config.region_config,
        config.selection.required_len,
    )?;
    let (dataset, selection_report) = series::select_series(&raw, &config.selection);
    if selection_report.empty_result {
        eprintln!("medcast: warning: no stations passed selection");
    }
    for d in &ingest_report.row_diagnostics {
        eprintln!("medcast: {d}");
    }
    for (station, reason) in &ingest_report.excluded_stations {
        eprintln!("medcast: station {station} excluded: {reason}");
    }

    fs::create_dir_all(&config.out)?;
    let writer = Writer { out: &config.out, json: config.json };
    let mut diagnostics: Vec<String> = Vec::new();

    writer.write(&tables::selected_stations_table(&dataset))?;
    writer.write(&selection_report_table(&selection_report))?;

    let need_eval = matches!(phase, Phase::Evaluate | Phase::Analyze | Phase::Run);
    let need_features = matches!(phase, Phase::Features | Phase::Analyze | Phase::Run);

    let mut matrices: Vec<ForecastMatrix> = Vec::new();
    let mut reports: Vec<EvaluationReport> = Vec::new();
    if need_eval {
        let series_list: Vec<_> =
            dataset.entries().iter().map(|e| e.series.clone()).collect();
        let results =
            backtest::evaluate_stations(&series_list, &config.methods, config.seed, config.jobs)?;
        for (m, r) in results {
            diagnostics.extend(r.diagnostics.iter().cloned());
            matrices.push(m);
            reports.push(r);
        }
        if matches!(phase, Phase::Evaluate | Phase::Run) {
            writer.write(&tables::forecasts_table(&matrices))?;
            writer.write(&filter_metric_rows(
                tables::evaluation_table(&reports),
                &config.metrics,
                2,
            ))?;
            let summary = backtest::summarize(&reports, &dataset.regions());
            diagnostics.extend(summary.diagnostics.iter().cloned());
            writer.write(&filter_metric_rows(
                tables::summary_table(&summary),
                &config.metrics,
                1,
            ))?;
        }
    }

    let mut feature_rows: Vec<(String, SeriesFeatures)> = Vec::new();
    if need_features {
        let (rows, notes) = features::features_table(&dataset);
        diagnostics.extend(notes);
        feature_rows = rows;
        writer.write(&tables::features_table_rows(&feature_rows))?;
    }

    if matches!(phase, Phase::Analyze | Phase::Run) {
        let (regressions, groups) =
            analysis_tables(&reports, &feature_rows, &dataset, &mut diagnostics);
        writer.write(&tables::regressions_table(&regressions))?;
        if feature_rows.len() >= 2 {
            let (matrix, notes) = relate::correlation_matrix(&feature_rows)?;
            diagnostics.extend(notes);
            writer.write(&tables::correlations_table(&matrix))?;
        } else {
            diagnostics.push("fewer than two feature rows; correlations skipped".to_string());
        }
        writer.write(&tables::grouped_table(&groups))?;

        let predictability = relate::predictability_summary(&reports, &dataset.regions())?;
        diagnostics.extend(predictability.diagnostics.iter().cloned());
        writer.write(&tables::predictability_table(&predictability))?;
        writer.write(&tables::predictability_summary_table(&predictability))?;
    }

    for d in &diagnostics {
        eprintln!("medcast: {d}");
    }

    writer.write(&manifest_table(config, &dataset))?;
    Ok(())
}

fn selection_report_table(report: &series::SelectionReport) -> Table {
    let rows = report
        .rejected
        .iter()
        .map(|(reason, count)| vec![Cell::Str(reason.clone()), Cell::Int(*count as i64)])
        .collect();
    Table { name: "selection_report", columns: vec!["rejection_reason", "count"], rows }
}

/// Regression rows (features first, then location, then numeric covariates)
/// and grouped summaries for categorical covariates.
fn analysis_tables(
    reports: &[EvaluationReport],
    feature_rows: &[(String, SeriesFeatures)],
    dataset: &Dataset,
    diagnostics: &mut Vec<String>,
) -> (Vec<(String, RegressionResult)>, Vec<(String, Vec<GroupSummary>)>) {
    let mut regressions: Vec<(String, RegressionResult)> = Vec::new();
    let mut groups: Vec<(String, Vec<GroupSummary>)> = Vec::new();
    let metas: Vec<_> = dataset.entries().iter().map(|e| e.meta.clone()).collect();

    for name in FEATURE_NAMES {
        match relate::ri_vs_feature(reports, feature_rows, name) {
            Ok(r) => regressions.push((name.to_string(), r)),
            Err(e) => diagnostics.push(format!("regression on {name} skipped: {e}")),
        }
    }
    let mut covariate_names: Vec<String> = vec!["longitude".into(), "latitude".into()];
    let mut numeric_names: BTreeSet<String> = BTreeSet::new();
    let mut categorical_names: BTreeSet<String> = BTreeSet::new();
    for m in &metas {
        numeric_names.extend(m.numeric_covariates.keys().cloned());
        categorical_names.extend(m.categorical_covariates.keys().cloned());
    }
    covariate_names.extend(numeric_names);
    for name in covariate_names {
        match relate::ri_vs_covariate(reports, &metas, &name) {
            Ok(CovariateAnalysis::Regression(r)) => regressions.push((name, r)),
            Ok(CovariateAnalysis::Grouped(g)) => groups.push((name, g)),
            Err(e) => diagnostics.push(format!("covariate {name} skipped: {e}")),
        }
    }
    for name in categorical_names {
        match relate::ri_vs_covariate(reports, &metas, &name) {
            Ok(CovariateAnalysis::Grouped(g)) => groups.push((name.clone(), g)),
            Ok(CovariateAnalysis::Regression(r)) => regressions.push((name.clone(), r)),
            Err(e) => diagnostics.push(format!("covariate {name} skipped: {e}")),
        }
    }
    (regressions, groups)
}

fn manifest_table(config: &RunConfig, dataset: &Dataset) -> Table {
    let labels: Vec<String> = config.methods.iter().map(|m| m.label()).collect();
    let metric_names: Vec<&str> = config.metrics.iter().map(|m| m.name()).collect();
    let mut rows = vec![
        vec![Cell::Str("tool".into()), Cell::Str("medcast".into())],
        vec![Cell::Str("seed".into()), Cell::Int(config.seed as i64)],
        vec![Cell::Str("config_hash".into()), Cell::Str(config.config_hash())],
        vec![Cell::Str("n_stations_selected".into()), Cell::Int(dataset.len() as i64)],
        vec![Cell::Str("n_methods".into()), Cell::Int(config.methods.len() as i64)],
        vec![Cell::Str("methods".into()), Cell::Str(labels.join("; "))],
        vec![Cell::Str("metrics".into()), Cell::Str(metric_names.join("; "))],
    ];
    if config.benchmark_added {
        rows.push(vec![
            Cell::Str("note".into()),
            Cell::Str("benchmark added to method subset (relative improvements need it)".into()),
        ]);
    }
    Table { name: "run_manifest", columns: vec!["key", "value"], rows }
}
