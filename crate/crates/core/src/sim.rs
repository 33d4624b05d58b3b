//! Synthetic series generation for self-tests and benchmark archives.

use crate::series::{
    assign_region, AnnualSeries, Dataset, DatasetEntry, RegionConfig, StationMeta,
};
use crate::toeplitz;
use crate::util::derive_seed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Exact fractional Gaussian noise of length `n` with the given moments.
pub fn fgn_series(n: usize, hurst: f64, mu: f64, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = toeplitz::fgn_correlations(hurst, n);
    toeplitz::hosking_simulate(&rho, n, &mut rng)
        .into_iter()
        .map(|z| mu + sigma * z)
        .collect()
}

/// Builds a synthetic flow archive of fGn stations spread over both regions
/// (and a few outside), with location covariates filled in. Values are
/// clamped at zero so they behave like flows.
pub fn synthetic_flow_dataset(n_stations: usize, n_years: usize, hurst: f64, seed: u64) -> Dataset {
    let region_cfg = RegionConfig::default();
    let mut entries = Vec::with_capacity(n_stations);
    for k in 0..n_stations {
        let station_id = format!("syn{k:04}");
        let series_seed = derive_seed(seed, &["sim", &station_id]);
        let values: Vec<f64> = fgn_series(n_years, hurst, 20.0, 4.0, series_seed)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect();
        // spread stations over region A, region B and elsewhere
        let (lon, lat, country) = match k % 5 {
            0 | 1 => (-120.0 + (k % 40) as f64, 30.0 + (k % 30) as f64, "United States"),
            2 | 3 => (-10.0 + (k % 40) as f64, 40.0 + (k % 25) as f64, "Germany"),
            _ => (120.0 + (k % 30) as f64, -20.0 - (k % 10) as f64, "Australia"),
        };
        let region = assign_region(lon, lat, Some(country), &region_cfg).expect("valid coords");
        let mut numeric = BTreeMap::new();
        numeric.insert("altitude".to_string(), 50.0 + (k as f64 * 37.0) % 900.0);
        let mut categorical = BTreeMap::new();
        categorical
            .insert("climate".to_string(), if k % 3 == 0 { "Snow" } else { "Warm Temperate" }.to_string());
        let meta = StationMeta {
            station_id: station_id.clone(),
            longitude: lon,
            latitude: lat,
            country: Some(country.to_string()),
            region,
            numeric_covariates: numeric,
            categorical_covariates: categorical,
        };
        let series = AnnualSeries::new(station_id, 1900, values).expect("clamped finite values");
        entries.push(DatasetEntry { series, meta });
    }
    Dataset::new(entries).expect("unique synthetic ids")
}

/// Renders a dataset as the two ingestion CSV files (series and metadata
/// text), for round-trip and command-line tests.
pub fn dataset_to_csv(dataset: &Dataset) -> (String, String) {
    let mut series_csv = String::from("station_id,year,value\n");
    let mut meta_csv = String::from("station_id,longitude,latitude,country,altitude,climate\n");
    for entry in dataset.entries() {
        let id = entry.series.station_id();
        for (i, v) in entry.series.values().iter().enumerate() {
            series_csv.push_str(&format!("{id},{},{v}\n", entry.series.year_start() + i as i32));
        }
        let m = &entry.meta;
        meta_csv.push_str(&format!(
            "{id},{},{},{},{},{}\n",
            m.longitude,
            m.latitude,
            m.country.as_deref().unwrap_or(""),
            m.numeric_covariates.get("altitude").copied().unwrap_or(0.0),
            m.categorical_covariates.get("climate").map(String::as_str).unwrap_or("")
        ));
    }
    (series_csv, meta_csv)
}
