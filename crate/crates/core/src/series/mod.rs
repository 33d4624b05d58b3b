//! Station data model, selection rules and region assignment.

mod io;

pub use io::{load_dataset, IngestReport, SchemaConfig};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Continental-scale region tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionTag {
    A,
    B,
    Other,
}

impl RegionTag {
    pub fn name(self) -> &'static str {
        match self {
            RegionTag::A => "A",
            RegionTag::B => "B",
            RegionTag::Other => "Other",
        }
    }
}

/// One station's annual flow record.
#[derive(Debug, Clone)]
pub struct AnnualSeries {
    station_id: String,
    year_start: i32,
    values: Vec<f64>,
}

impl AnnualSeries {
    /// Validates finiteness and nonnegativity (flows cannot be negative).
    /// Length requirements are enforced by the selection rules, not here, so
    /// shorter records can still be represented and rejected with reasons.
    pub fn new(station_id: impl Into<String>, year_start: i32, values: Vec<f64>) -> Result<Self> {
        let station_id = station_id.into();
        if values.is_empty() {
            return Err(Error::InvalidSeries { station: station_id, reason: "empty".into() });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidSeries {
                    station: station_id,
                    reason: format!("non-finite value at position {i}"),
                });
            }
            if *v < 0.0 {
                return Err(Error::InvalidSeries {
                    station: station_id,
                    reason: format!("negative value {v} at position {i}"),
                });
            }
        }
        Ok(Self { station_id, year_start, values })
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn year_start(&self) -> i32 {
        self.year_start
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Station metadata: location, region and free-form covariates.
#[derive(Debug, Clone)]
pub struct StationMeta {
    pub station_id: String,
    pub longitude: f64,
    pub latitude: f64,
    pub country: Option<String>,
    pub region: RegionTag,
    /// Named real-valued attributes (altitude, catchment area, ...).
    pub numeric_covariates: BTreeMap<String, f64>,
    /// Named categorical attributes (climate class, land cover, ...).
    pub categorical_covariates: BTreeMap<String, String>,
}

/// A longitude/latitude rectangle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LonLatBox {
    pub lon_min: f64,
    pub lon_max: f64,
    pub lat_min: f64,
    pub lat_max: f64,
}

impl LonLatBox {
    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        lon >= self.lon_min && lon <= self.lon_max && lat >= self.lat_min && lat <= self.lat_max
    }
}

/// Region definition: bounding boxes for A and B plus an optional
/// country-to-region mapping that takes precedence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionConfig {
    pub box_a: LonLatBox,
    pub box_b: LonLatBox,
    #[serde(default)]
    pub country_map: BTreeMap<String, RegionTag>,
}

impl Default for RegionConfig {
    /// Documented defaults: A is a North America box, B a Europe box.
    fn default() -> Self {
        RegionConfig {
            box_a: LonLatBox { lon_min: -170.0, lon_max: -50.0, lat_min: 15.0, lat_max: 85.0 },
            box_b: LonLatBox { lon_min: -25.0, lon_max: 45.0, lat_min: 35.0, lat_max: 72.0 },
            country_map: BTreeMap::new(),
        }
    }
}

/// Assigns a station to region A, B or Other. The country mapping, when it
/// covers the station's country, takes precedence over the boxes.
pub fn assign_region(
    longitude: f64,
    latitude: f64,
    country: Option<&str>,
    config: &RegionConfig,
) -> Result<RegionTag> {
    if !(-180.0..=180.0).contains(&longitude) || !(-90.0..=90.0).contains(&latitude) {
        return Err(Error::InvalidCoordinates { lon: longitude, lat: latitude });
    }
    if let Some(c) = country {
        if let Some(tag) = config.country_map.get(c) {
            return Ok(*tag);
        }
    }
    if config.box_a.contains(longitude, latitude) {
        Ok(RegionTag::A)
    } else if config.box_b.contains(longitude, latitude) {
        Ok(RegionTag::B)
    } else {
        Ok(RegionTag::Other)
    }
}

/// One retained station: validated series plus metadata.
#[derive(Debug, Clone)]
pub struct DatasetEntry {
    pub series: AnnualSeries,
    pub meta: StationMeta,
}

/// Immutable collection of retained stations, ordered by station id.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    entries: Vec<DatasetEntry>,
}

impl Dataset {
    pub fn new(mut entries: Vec<DatasetEntry>) -> Result<Self> {
        entries.sort_by(|a, b| a.series.station_id().cmp(b.series.station_id()));
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.series.station_id().to_string()) {
                return Err(Error::DuplicateStation(e.series.station_id().to_string()));
            }
        }
        Ok(Dataset { entries })
    }

    pub fn entries(&self) -> &[DatasetEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, station_id: &str) -> Option<&DatasetEntry> {
        self.entries
            .binary_search_by(|e| e.series.station_id().cmp(station_id))
            .ok()
            .map(|i| &self.entries[i])
    }

    /// station id -> region map used by the aggregation stages.
    pub fn regions(&self) -> BTreeMap<String, RegionTag> {
        self.entries
            .iter()
            .map(|e| (e.series.station_id().to_string(), e.meta.region))
            .collect()
    }
}

/// A station record as ingested: the value sequence may have gaps.
#[derive(Debug, Clone)]
pub struct RawSeries {
    pub station_id: String,
    pub year_start: i32,
    pub values: Vec<Option<f64>>,
}

/// Ingestion product: per-station raw sequences plus metadata, before
/// selection.
#[derive(Debug, Clone, Default)]
pub struct RawDataset {
    pub series: Vec<RawSeries>,
    pub meta: BTreeMap<String, StationMeta>,
}

impl From<&Dataset> for RawDataset {
    fn from(ds: &Dataset) -> Self {
        RawDataset {
            series: ds
                .entries()
                .iter()
                .map(|e| RawSeries {
                    station_id: e.series.station_id().to_string(),
                    year_start: e.series.year_start(),
                    values: e.series.values().iter().map(|v| Some(*v)).collect(),
                })
                .collect(),
            meta: ds
                .entries()
                .iter()
                .map(|e| (e.meta.station_id.clone(), e.meta.clone()))
                .collect(),
        }
    }
}

/// Series selection rules.
#[derive(Debug, Clone)]
pub struct SelectionRules {
    /// Required complete length (values beyond it are trimmed at ingestion).
    pub required_len: usize,
    /// Numeric covariate holding the percentage of missing daily values
    /// behind each annual value; stations above the threshold are rejected.
    pub missing_fraction_column: Option<String>,
    /// Threshold in percent.
    pub missing_fraction_threshold: f64,
    /// Optional categorical covariate; stations must carry the value "true"
    /// or "1" to pass (homogeneity screening is accepted as a flag, not
    /// re-implemented).
    pub homogeneity_column: Option<String>,
}

impl Default for SelectionRules {
    fn default() -> Self {
        SelectionRules {
            required_len: 90,
            missing_fraction_column: Some("missing_fraction".to_string()),
            missing_fraction_threshold: 11.0,
            homogeneity_column: None,
        }
    }
}

/// Outcome counts of a selection pass.
#[derive(Debug, Clone, Default)]
pub struct SelectionReport {
    /// rejection reason -> count
    pub rejected: BTreeMap<String, usize>,
    /// per-station reasons, ordered by station id
    pub per_station: Vec<(String, String)>,
    /// set when the selection retained nothing (a warning, not an error)
    pub empty_result: bool,
}

impl SelectionReport {
    fn reject(&mut self, station: &str, reason: &str) {
        *self.rejected.entry(reason.to_string()).or_insert(0) += 1;
        self.per_station.push((station.to_string(), reason.to_string()));
    }
}

/// Applies every selection rule, returning the retained dataset and counts
/// per rejection reason. Stations missing metadata are rejected.
pub fn select_series(raw: &RawDataset, rules: &SelectionRules) -> (Dataset, SelectionReport) {
    let mut report = SelectionReport::default();
    let mut entries = Vec::new();

    let mut ordered: Vec<&RawSeries> = raw.series.iter().collect();
    ordered.sort_by(|a, b| a.station_id.cmp(&b.station_id));

    for rs in ordered {
        let id = &rs.station_id;
        let Some(meta) = raw.meta.get(id) else {
            report.reject(id, "missing metadata");
            continue;
        };
        if rs.values.len() < rules.required_len {
            report.reject(id, "insufficient length");
            continue;
        }
        let window = &rs.values[..rules.required_len];
        if window.iter().any(|v| v.is_none()) {
            report.reject(id, "missing values");
            continue;
        }
        let values: Vec<f64> = window.iter().map(|v| v.unwrap()).collect();

        if let Some(col) = &rules.missing_fraction_column {
            if let Some(frac) = meta.numeric_covariates.get(col) {
                if *frac > rules.missing_fraction_threshold {
                    report.reject(id, "daily missing fraction above threshold");
                    continue;
                }
            }
        }
        if let Some(col) = &rules.homogeneity_column {
            let passes = meta
                .categorical_covariates
                .get(col)
                .map(|v| v == "true" || v == "1" || v == "TRUE" || v == "True")
                .unwrap_or(false);
            if !passes {
                report.reject(id, "failed homogeneity screening");
                continue;
            }
        }

        match AnnualSeries::new(id.clone(), rs.year_start, values) {
            Ok(series) => entries.push(DatasetEntry { series, meta: meta.clone() }),
            Err(e) => report.reject(id, &format!("invalid values: {e}")),
        }
    }

    report.empty_result = entries.is_empty();
    let dataset = Dataset::new(entries).expect("selection never produces duplicate ids");
    (dataset, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(id: &str, lon: f64, lat: f64) -> StationMeta {
        StationMeta {
            station_id: id.to_string(),
            longitude: lon,
            latitude: lat,
            country: None,
            region: assign_region(lon, lat, None, &RegionConfig::default()).unwrap(),
            numeric_covariates: BTreeMap::new(),
            categorical_covariates: BTreeMap::new(),
        }
    }

    fn raw(id: &str, values: Vec<Option<f64>>) -> RawSeries {
        RawSeries { station_id: id.to_string(), year_start: 1900, values }
    }

    #[test]
    fn region_examples() {
        let cfg = RegionConfig::default();
        assert_eq!(assign_region(-95.0, 40.0, None, &cfg).unwrap(), RegionTag::A);
        assert_eq!(assign_region(10.0, 50.0, None, &cfg).unwrap(), RegionTag::B);
        assert_eq!(assign_region(135.0, -30.0, None, &cfg).unwrap(), RegionTag::Other);
        assert!(assign_region(200.0, 40.0, None, &cfg).is_err());
        assert!(assign_region(0.0, 95.0, None, &cfg).is_err());
    }

    #[test]
    fn country_mapping_takes_precedence() {
        let mut cfg = RegionConfig::default();
        cfg.country_map.insert("Australia".to_string(), RegionTag::B);
        assert_eq!(
            assign_region(135.0, -30.0, Some("Australia"), &cfg).unwrap(),
            RegionTag::B
        );
        assert_eq!(assign_region(135.0, -30.0, Some("Japan"), &cfg).unwrap(), RegionTag::Other);
    }

    #[test]
    fn region_partition_is_exhaustive_and_exclusive() {
        let cfg = RegionConfig::default();
        for lon in (-180..=180).step_by(20) {
            for lat in (-90..=90).step_by(15) {
                let tag = assign_region(lon as f64, lat as f64, None, &cfg).unwrap();
                assert!(matches!(tag, RegionTag::A | RegionTag::B | RegionTag::Other));
            }
        }
    }

    #[test]
    fn annual_series_invariants() {
        assert!(AnnualSeries::new("s", 1900, vec![1.0, 2.0]).is_ok());
        assert!(AnnualSeries::new("s", 1900, vec![]).is_err());
        assert!(AnnualSeries::new("s", 1900, vec![1.0, -0.5]).is_err());
        assert!(AnnualSeries::new("s", 1900, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn selection_rules_applied() {
        let rules = SelectionRules::default();
        let mut rawset = RawDataset::default();
        rawset.meta.insert("a".into(), meta("a", -95.0, 40.0));
        rawset.meta.insert("b".into(), meta("b", -95.0, 40.0));
        rawset.meta.insert("c".into(), meta("c", 10.0, 50.0));
        rawset.meta.insert("d".into(), meta("d", 10.0, 50.0));
        // complete
        rawset.series.push(raw("a", vec![Some(1.0); 90]));
        // one missing annual value
        let mut vals = vec![Some(1.0); 90];
        vals[45] = None;
        rawset.series.push(raw("b", vals));
        // too short
        rawset.series.push(raw("c", vec![Some(1.0); 89]));
        // flagged 12% daily missing
        let mut m = meta("d", 10.0, 50.0);
        m.numeric_covariates.insert("missing_fraction".into(), 12.0);
        rawset.meta.insert("d".into(), m);
        rawset.series.push(raw("d", vec![Some(1.0); 90]));

        let (ds, report) = select_series(&rawset, &rules);
        assert_eq!(ds.len(), 1);
        assert!(ds.get("a").is_some());
        assert_eq!(report.rejected["missing values"], 1);
        assert_eq!(report.rejected["insufficient length"], 1);
        assert_eq!(report.rejected["daily missing fraction above threshold"], 1);
    }

    #[test]
    fn low_missing_fraction_is_retained() {
        let rules = SelectionRules::default();
        let mut rawset = RawDataset::default();
        let mut m = meta("a", -95.0, 40.0);
        m.numeric_covariates.insert("missing_fraction".into(), 5.0);
        rawset.meta.insert("a".into(), m);
        rawset.series.push(raw("a", vec![Some(2.0); 90]));
        let (ds, _) = select_series(&rawset, &rules);
        assert_eq!(ds.len(), 1);
    }

    #[test]
    fn selection_is_idempotent() {
        let rules = SelectionRules::default();
        let mut rawset = RawDataset::default();
        for (i, id) in ["x", "y", "z"].iter().enumerate() {
            rawset.meta.insert(id.to_string(), meta(id, -95.0, 40.0));
            let vals: Vec<Option<f64>> =
                (0..90).map(|k| Some(1.0 + (k + i) as f64 * 0.1)).collect();
            rawset.series.push(raw(id, vals));
        }
        let (first, _) = select_series(&rawset, &rules);
        let (second, _) = select_series(&RawDataset::from(&first), &rules);
        assert_eq!(first.len(), second.len());
        for (a, b) in first.entries().iter().zip(second.entries()) {
            assert_eq!(a.series.station_id(), b.series.station_id());
            assert_eq!(a.series.values(), b.series.values());
        }
    }

    #[test]
    fn homogeneity_flag_honored_when_configured() {
        let rules = SelectionRules {
            homogeneity_column: Some("homogeneous".to_string()),
            ..SelectionRules::default()
        };
        let mut rawset = RawDataset::default();
        let mut pass = meta("pass", -95.0, 40.0);
        pass.categorical_covariates.insert("homogeneous".into(), "true".into());
        rawset.meta.insert("pass".into(), pass);
        rawset.series.push(raw("pass", vec![Some(1.0); 90]));
        let mut fail = meta("fail", -95.0, 40.0);
        fail.categorical_covariates.insert("homogeneous".into(), "false".into());
        rawset.meta.insert("fail".into(), fail);
        rawset.series.push(raw("fail", vec![Some(1.0); 90]));
        // absent flag also fails the screening
        rawset.meta.insert("none".into(), meta("none", -95.0, 40.0));
        rawset.series.push(raw("none", vec![Some(1.0); 90]));

        let (ds, report) = select_series(&rawset, &rules);
        assert_eq!(ds.len(), 1);
        assert!(ds.get("pass").is_some());
        assert_eq!(report.rejected["failed homogeneity screening"], 2);
    }

    #[test]
    fn empty_result_is_warning_not_error() {
        let rules = SelectionRules::default();
        let rawset = RawDataset::default();
        let (ds, report) = select_series(&rawset, &rules);
        assert!(ds.is_empty());
        assert!(report.empty_result);
    }
}
