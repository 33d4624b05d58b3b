//! Delimited-text ingestion of station records.
//!
//! Two files: a long-format series table (one row per station-year) and a
//! metadata table (one row per station). Comma or tab delimiters are
//! auto-detected from the header line; missing values are encoded as an
//! empty field or "NA". Metadata columns beyond the schema are preserved as
//! covariates, numeric when the value parses as a float.

use super::{assign_region, RawDataset, RawSeries, RegionConfig, StationMeta};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

/// Column-name configuration for the two input tables.
#[derive(Debug, Clone)]
pub struct SchemaConfig {
    pub station_col: String,
    pub year_col: String,
    pub value_col: String,
    pub longitude_col: String,
    pub latitude_col: String,
    pub country_col: Option<String>,
}

impl Default for SchemaConfig {
    fn default() -> Self {
        SchemaConfig {
            station_col: "station_id".into(),
            year_col: "year".into(),
            value_col: "value".into(),
            longitude_col: "longitude".into(),
            latitude_col: "latitude".into(),
            country_col: Some("country".into()),
        }
    }
}

/// Ingestion diagnostics: rejected rows and excluded stations with reasons.
#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    /// per-row problems ("line 17: unparseable value 'x'")
    pub row_diagnostics: Vec<String>,
    /// stations dropped at ingestion with the reason
    pub excluded_stations: Vec<(String, String)>,
}

fn detect_delimiter(path: &Path) -> Result<u8> {
    let f = File::open(path)?;
    let mut reader = BufReader::new(f);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    Ok(if first.contains('\t') { b'\t' } else { b',' })
}

fn open_reader(path: &Path) -> Result<csv::Reader<Box<dyn Read>>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let delim = detect_delimiter(path)?;
    let file: Box<dyn Read> = Box::new(File::open(path)?);
    Ok(csv::ReaderBuilder::new().delimiter(delim).flexible(true).from_reader(file))
}

fn column_index(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| {
        Error::MalformedHeader(format!("column '{name}' not found in {}", path.display()))
    })
}

fn is_missing(field: &str) -> bool {
    let t = field.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan")
}

/// Loads the series and metadata tables into a raw dataset.
///
/// Per-station sequences are ordered by year and trimmed to the first
/// `required_len` rows; stations with fewer rows are excluded with an
/// "insufficient length" diagnostic. Rows with unparseable values become
/// missing slots with a per-row diagnostic. A duplicate station id in the
/// metadata table is a hard error.
pub fn load_dataset(
    series_path: &Path,
    meta_path: &Path,
    schema: &SchemaConfig,
    region_config: &RegionConfig,
    required_len: usize,
) -> Result<(RawDataset, IngestReport)> {
    let mut report = IngestReport::default();

    // metadata pass
    let mut meta_reader = open_reader(meta_path)?;
    let headers = meta_reader.headers()?.clone();
    let id_idx = column_index(&headers, &schema.station_col, meta_path)?;
    let lon_idx = column_index(&headers, &schema.longitude_col, meta_path)?;
    let lat_idx = column_index(&headers, &schema.latitude_col, meta_path)?;
    let country_idx = match &schema.country_col {
        Some(c) => headers.iter().position(|h| h.trim() == c),
        None => None,
    };
    let extra_cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            *i != id_idx && *i != lon_idx && *i != lat_idx && Some(*i) != country_idx
        })
        .map(|(i, h)| (i, h.trim().to_string()))
        .collect();

    let mut meta: BTreeMap<String, StationMeta> = BTreeMap::new();
    for (line_no, record) in meta_reader.records().enumerate() {
        let record = record?;
        let line = line_no + 2; // header is line 1
        let Some(id) = record.get(id_idx).map(str::trim).filter(|s| !s.is_empty()) else {
            report.row_diagnostics.push(format!("{}:{line}: empty station id", meta_path.display()));
            continue;
        };
        if meta.contains_key(id) {
            return Err(Error::DuplicateStation(id.to_string()));
        }
        let lon: f64 = match record.get(lon_idx).map(str::trim).and_then(|s| s.parse().ok()) {
            Some(v) => v,
            None => {
                report.excluded_stations.push((id.to_string(), "unparseable longitude".into()));
                continue;
            }
        };
        let lat: f64 = match record.get(lat_idx).map(str::trim).and_then(|s| s.parse().ok()) {
            Some(v) => v,
            None => {
                report.excluded_stations.push((id.to_string(), "unparseable latitude".into()));
                continue;
            }
        };
        let country = country_idx
            .and_then(|i| record.get(i))
            .map(str::trim)
            .filter(|s| !is_missing(s))
            .map(str::to_string);

        let region = match assign_region(lon, lat, country.as_deref(), region_config) {
            Ok(r) => r,
            Err(e) => {
                report.excluded_stations.push((id.to_string(), e.to_string()));
                continue;
            }
        };

        let mut numeric = BTreeMap::new();
        let mut categorical = BTreeMap::new();
        for (idx, name) in &extra_cols {
            let Some(field) = record.get(*idx) else { continue };
            if is_missing(field) {
                continue;
            }
            match field.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    numeric.insert(name.clone(), v);
                }
                _ => {
                    categorical.insert(name.clone(), field.trim().to_string());
                }
            }
        }

        meta.insert(
            id.to_string(),
            StationMeta {
                station_id: id.to_string(),
                longitude: lon,
                latitude: lat,
                country,
                region,
                numeric_covariates: numeric,
                categorical_covariates: categorical,
            },
        );
    }

    // series pass: collect (year, value) rows per station
    let mut series_reader = open_reader(series_path)?;
    let headers = series_reader.headers()?.clone();
    let sid_idx = column_index(&headers, &schema.station_col, series_path)?;
    let year_idx = column_index(&headers, &schema.year_col, series_path)?;
    let value_idx = column_index(&headers, &schema.value_col, series_path)?;

    let mut rows: BTreeMap<String, BTreeMap<i32, Option<f64>>> = BTreeMap::new();
    for (line_no, record) in series_reader.records().enumerate() {
        let record = record?;
        let line = line_no + 2;
        let Some(id) = record.get(sid_idx).map(str::trim).filter(|s| !s.is_empty()) else {
            report
                .row_diagnostics
                .push(format!("{}:{line}: empty station id", series_path.display()));
            continue;
        };
        let year: i32 = match record.get(year_idx).map(str::trim).and_then(|s| s.parse().ok()) {
            Some(y) => y,
            None => {
                report.row_diagnostics.push(format!(
                    "{}:{line}: unparseable year '{}'",
                    series_path.display(),
                    record.get(year_idx).unwrap_or("")
                ));
                continue;
            }
        };
        let value = match record.get(value_idx) {
            Some(f) if is_missing(f) => None,
            Some(f) => match f.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Some(v),
                _ => {
                    report.row_diagnostics.push(format!(
                        "{}:{line}: unparseable value '{}'",
                        series_path.display(),
                        f.trim()
                    ));
                    None
                }
            },
            None => None,
        };
        let station = rows.entry(id.to_string()).or_default();
        if station.contains_key(&year) {
            report.row_diagnostics.push(format!(
                "{}:{line}: duplicate year {year} for station {id}, first value kept",
                series_path.display()
            ));
            continue;
        }
        station.insert(year, value);
    }

    let mut raw = RawDataset { series: Vec::new(), meta };
    for (id, by_year) in rows {
        if !raw.meta.contains_key(&id) {
            report.excluded_stations.push((id.clone(), "no metadata row".into()));
            continue;
        }
        if by_year.len() < required_len {
            report.excluded_stations.push((id.clone(), "insufficient length".into()));
            continue;
        }
        // first `required_len` year rows, in year order
        let year_start = *by_year.keys().next().expect("nonempty");
        let values: Vec<Option<f64>> =
            by_year.values().take(required_len).copied().collect();
        raw.series.push(RawSeries { station_id: id, year_start, values });
    }

    Ok((raw, report))
}
